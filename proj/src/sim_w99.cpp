#include "lanecrit/sim_w99.hpp"

#include "lanecrit/criticality.hpp"
#include "lanecrit/parallel.hpp"
#include "lanecrit/synth.hpp"

#include <algorithm>
#include <cmath>

namespace lanecrit {

namespace {

constexpr double kMaxDecel = -8.0;
constexpr double kSpeed80 = 80.0 / 3.6;

}  // namespace

void W99Params::validate() const {
    if (!(cc0 > 0.0)) throw Error("w99: cc0 must be > 0");
    if (!(cc1 > 0.0)) throw Error("w99: cc1 must be > 0");
    if (!(cc8 > 0.0)) throw Error("w99: cc8 must be > 0");
    if (!(cc4 < 0.0 && cc5 > 0.0)) throw Error("w99: need cc4 < 0 < cc5");
    if (!(cc2 >= 0.0 && cc6 >= 0.0 && cc7 > 0.0 && cc9 > 0.0)) throw Error("w99: invalid oscillation parameters");
    if (!(v_desired > 0.0)) throw Error("w99: v_desired must be > 0");
}

const char* to_string(W99Regime r) {
    switch (r) {
        case W99Regime::free: return "free";
        case W99Regime::closing: return "closing";
        case W99Regime::following: return "following";
        case W99Regime::emergency: return "emergency";
    }
    return "?";
}

W99Decision w99_decide(const W99Follower& f, const std::optional<W99Leader>& leader, const W99Params& p) {
    const double v = std::max(0.0, f.v);
    const double a_max = p.cc8 + (p.cc9 - p.cc8) * std::min(v, kSpeed80) / kSpeed80;
    auto clamp = [&](W99Decision d) {
        d.accel = std::clamp(d.accel, kMaxDecel, p.cc8 + p.cc9);
        return d;
    };
    if (!leader) return clamp({std::min(a_max, p.v_desired - v), W99Regime::free});

    const W99Leader& L = *leader;
    const double dx = L.s - f.s - 0.5 * (L.length + f.length);
    const double dv = L.v - v;
    const double sdxc = L.v <= 0.0 ? p.cc0 : p.cc0 + p.cc1 * std::min(v, L.v);
    const double sdxo = sdxc + p.cc2;
    const double sdxv = sdxo + p.cc3 * (dv - p.cc4);
    const double sdv = p.cc6 * dx * dx / 10000.0;
    const double sdvc = L.v > 0.0 ? p.cc4 - sdv : 0.0;
    const double sdvo = v > p.cc5 ? p.cc5 + sdv : sdv;

    if (dv < sdvo && dx <= sdxc) {
        double a = 0.0;
        if (v > 0.0 && dv < 0.0) {
            a = dx > p.cc0 ? std::min(L.a + dv * dv / (p.cc0 - dx), 0.0)
                           : std::min(L.a + 0.5 * (dv - sdvo), 0.0);
        }
        a = a > -p.cc7 ? -p.cc7 : std::max(a, -10.0 + 0.5 * std::sqrt(v));
        return clamp({a, W99Regime::emergency});
    }
    if (dv < sdvc && dx < sdxv) {
        double a = 0.5 * dv * dv / (sdxc - dx - 0.1) + std::min(L.a, 0.0);
        return clamp({std::min(a, -p.cc7), W99Regime::closing});
    }
    if (dv < sdvo && dx < sdxo) {
        const double a = dv < 0.0 ? -p.cc7 : p.cc7;
        return clamp({std::min(a, p.v_desired - v), W99Regime::following});
    }
    double a = a_max;
    if (dx < sdxo) a = std::min(a, dv * dv / (sdxo - dx));
    return clamp({std::min(a, p.v_desired - v), W99Regime::free});
}

void ScenarioSpec::validate() const {
    model.validate();
    if (!(dt > 0.0 && dt <= 0.1)) throw Error("scenario: dt must be in (0, 0.1] s");
    if (!(duration >= 0.0)) throw Error("scenario: duration must be >= 0");
    const auto it = std::find_if(trajectories.begin(), trajectories.end(),
                                 [&](const Trajectory& t) { return t.vehicle_id == substituted_id; });
    if (it == trajectories.end())
        throw Error("scenario: substituted vehicle " + std::to_string(substituted_id) + " absent");
    if (it->empty()) throw Error("scenario: substituted vehicle has no samples");
}

std::optional<ReplayState> replay_at(const Trajectory& traj, double t) {
    constexpr double eps = 1e-9;
    if (traj.empty() || t < traj.t_begin() - eps || t > traj.t_end() + eps) return std::nullopt;
    const auto& xs = traj.samples;
    auto it = std::upper_bound(xs.begin(), xs.end(), t + eps, [](double v, const Sample& s) { return v < s.t; });
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const Sample& a = xs[i];
    ReplayState r{a.s, a.lane, a.lat, a.v, a.a_lon, a.a_lat};
    if (i + 1 < xs.size() && t > a.t + eps) {
        const Sample& b = xs[i + 1];
        const double w = (t - a.t) / (b.t - a.t);
        r.s = a.s + w * (b.s - a.s);
        r.v = a.v + w * (b.v - a.v);
        r.a_lon = a.a_lon + w * (b.a_lon - a.a_lon);
        r.a_lat = a.a_lat + w * (b.a_lat - a.a_lat);
        if (a.lane == b.lane) r.lat = a.lat + w * (b.lat - a.lat);
    }
    return r;
}

Trajectory simulate(const ScenarioSpec& spec) {
    spec.validate();
    const Trajectory* sub = nullptr;
    std::vector<const Trajectory*> others;
    for (const Trajectory& t : spec.trajectories) {
        if (t.vehicle_id == spec.substituted_id) sub = &t;
        else others.push_back(&t);
    }
    const double t0 = sub->t_begin();
    const double span = spec.duration > 0.0 ? spec.duration : sub->t_end() - t0;
    const auto steps = static_cast<std::size_t>(std::llround(span / spec.dt));

    Trajectory out;
    out.vehicle_id = sub->vehicle_id;
    out.shape = sub->shape;
    out.recording = sub->recording;
    out.rate = 1.0 / spec.dt;
    out.samples.reserve(steps + 1);

    double s = sub->samples.front().s;
    double v = std::max(0.0, sub->samples.front().v);
    ReplayState held = *replay_at(*sub, t0);
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = t0 + static_cast<double>(k) * spec.dt;
        if (auto r = replay_at(*sub, t)) held = *r;

        std::optional<W99Leader> leader;
        for (const Trajectory* o : others) {
            const auto r = replay_at(*o, t);
            if (!r || r->lane != held.lane || !(r->s > s)) continue;
            if (!leader || r->s < leader->s) leader = W99Leader{r->s, r->v, r->a_lon, o->shape.length};
        }
        const double a = w99_accel({s, v, sub->shape.length}, leader, spec.model);

        Sample smp;
        smp.t = t;
        smp.s = s;
        smp.lane = held.lane;
        smp.lat = held.lat;
        smp.v = v;
        smp.a_lon = a;
        smp.a_lat = held.a_lat;
        out.samples.push_back(smp);

        s += v * spec.dt;
        v = std::max(0.0, v + a * spec.dt);
    }
    return out;
}

std::vector<ThwPoint> thw_traces(const Trajectory& ego, std::span<const Trajectory> others,
                                 const LaneLayout& layout) {
    std::vector<ThwPoint> out;
    const Footprint fe = footprint(ego.shape);
    for (const Sample& e : ego.samples) {
        const KinematicState es{e.s, layout.lane_center(e.lane) + e.lat, e.v, 0.0, e.a_lon, e.a_lat};
        for (const Trajectory& o : others) {
            if (o.vehicle_id == ego.vehicle_id) continue;
            const auto r = replay_at(o, e.t);
            if (!r) continue;
            const KinematicState os{r->s, layout.lane_center(r->lane) + r->lat, r->v, 0.0, r->a_lon, r->a_lat};
            if (const auto h = thw(es, fe, os, footprint(o.shape))) out.push_back({e.t, o.vehicle_id, *h});
        }
    }
    return out;
}

namespace {

SampledScenario run_sample(const ScenarioSpec& spec, double cc1, const LaneLayout& layout) {
    ScenarioSpec s = spec;
    s.model.cc1 = cc1;
    SampledScenario entry;
    entry.cc1 = cc1;
    entry.ego = simulate(s);
    entry.traces = thw_traces(entry.ego, spec.trajectories, layout);
    for (const ThwPoint& p : entry.traces) {
        auto [it, fresh] = entry.min_thw.emplace(p.opponent_id, p.thw);
        if (!fresh) it->second = std::min(it->second, p.thw);
    }
    return entry;
}

void check_cc1(std::span<const double> values) {
    if (values.empty()) throw Error("cc1 sample list is empty");
    for (double v : values)
        if (!(v > 0.0)) throw Error("cc1 samples must be positive");
}

}  // namespace

SampledScenarioSet sample_cc1(const ScenarioSpec& spec, std::span<const double> cc1_values,
                              const LaneLayout& layout) {
    check_cc1(cc1_values);
    spec.validate();
    SampledScenarioSet set;
    set.entries.resize(cc1_values.size());
    parallel_for(cc1_values.size(), [&](std::size_t i) { set.entries[i] = run_sample(spec, cc1_values[i], layout); });
    return set;
}

SampledScenarioSet sample_cc1_serial(const ScenarioSpec& spec, std::span<const double> cc1_values,
                                     const LaneLayout& layout) {
    check_cc1(cc1_values);
    spec.validate();
    SampledScenarioSet set;
    for (double c : cc1_values) set.entries.push_back(run_sample(spec, c, layout));
    return set;
}

namespace {

/// Constant-speed vehicle whose lateral position follows a sequence of
/// logistic lane changes given as (t_mid, duration, +1 left / -1 right).
Trajectory scripted(VehicleId id, double s0, double v, int lane0, double t_span, double rate, double lane_width,
                    std::vector<std::tuple<double, double, int>> changes) {
    Trajectory tr;
    tr.vehicle_id = id;
    tr.recording = "fixture";
    tr.rate = rate;
    const auto n = static_cast<std::size_t>(std::llround(t_span * rate));
    for (std::size_t k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) / rate;
        double y = lane0 * lane_width;
        double ddy = 0.0;
        for (const auto& [tm, d, dir] : changes) {
            const LateralProfile lp = logistic_lane_change(t, tm, d, dir * lane_width);
            y += lp.y;
            ddy += lp.ddy;
        }
        Sample s;
        s.t = t;
        s.s = s0 + v * t;
        s.lane = static_cast<int>(std::lround(y / lane_width));
        s.lat = snap_lateral(y - s.lane * lane_width);
        s.v = v;
        s.a_lat = ddy;
        tr.samples.push_back(s);
    }
    return tr;
}

}  // namespace

ScenarioSpec overtaking_fixture() {
    const double W = LaneLayout{}.lane_width;
    const double rate = 5.0;
    const double span = 60.0;
    ScenarioSpec spec;
    spec.trajectories.push_back(scripted(kFixtureEgo, 0.0, 30.0, 0, span, rate, W, {{45.0, 4.0, +1}}));
    spec.trajectories.push_back(
        scripted(kFixtureOpp2, -30.0, 36.0, 1, span, rate, W, {{9.0, 3.0, -1}, {16.0, 3.0, +1}}));
    spec.trajectories.push_back(scripted(kFixtureOpp1, 250.0, 22.0, 0, span, rate, W, {}));
    spec.substituted_id = kFixtureEgo;
    spec.model.v_desired = 30.0;
    return spec;
}

}  // namespace lanecrit
