#include "lanecrit/criticality.hpp"

#include "lanecrit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace lanecrit {

void Thresholds::validate() const {
    for (double v : {d_crit, v_factor, a_lon_crit, a_lat_crit, thw_crit, dce_crit, ttce_gate})
        if (!(v > 0.0)) throw Error("criticality thresholds must be positive");
}

double footprint_gap(double ds, double dy, const Footprint& a, const Footprint& b) {
    const double gs = std::max(0.0, std::abs(ds) - 0.5 * (a.length + b.length));
    const double gy = std::max(0.0, std::abs(dy) - 0.5 * (a.width + b.width));
    return std::hypot(gs, gy);
}

double euclidean_distance(const KinematicState& a, const Footprint& fa, const KinematicState& b,
                          const Footprint& fb) {
    return footprint_gap(b.s - a.s, b.y - a.y, fa, fb);
}

std::optional<double> thw(const KinematicState& ego, const Footprint& fe, const KinematicState& opp,
                          const Footprint& fo) {
    if (ego.v_lon < 0.1) return std::nullopt;
    if (!(opp.s > ego.s)) return std::nullopt;
    if (!(std::abs(opp.y - ego.y) < 0.5 * (fe.width + fo.width))) return std::nullopt;
    const double gap = std::max(0.0, opp.s - ego.s - 0.5 * (fe.length + fo.length));
    return gap / ego.v_lon;
}

Encounter ttce_dce(const KinematicState& ego, const Footprint& fe, const KinematicState& opp,
                   const Footprint& fo) {
    const double ps = opp.s - ego.s;
    const double py = opp.y - ego.y;
    const double vs = opp.v_lon - ego.v_lon;
    const double vy = opp.v_lat - ego.v_lat;
    const double vv = vs * vs + vy * vy;
    const double pv = ps * vs + py * vy;
    Encounter e;
    e.closing = vv > 0.0 && pv < 0.0;
    e.ttce = e.closing ? -pv / vv : 0.0;
    e.dce = footprint_gap(ps + e.ttce * vs, py + e.ttce * vy, fe, fo);
    return e;
}

MetricSample metric_sample(double t, VehicleId opponent_id, const KinematicState& ego, const Footprint& fe,
                           const KinematicState& opp, const Footprint& fo) {
    MetricSample m;
    m.t = t;
    m.opponent_id = opponent_id;
    m.d = euclidean_distance(ego, fe, opp, fo);
    m.thw = thw(ego, fe, opp, fo);
    const Encounter e = ttce_dce(ego, fe, opp, fo);
    if (e.closing) {
        m.ttce = e.ttce;
        m.dce = e.dce;
    }
    return m;
}

const char* to_string(Metric m) {
    switch (m) {
        case Metric::d: return "d";
        case Metric::v: return "v";
        case Metric::a_lon: return "a_lon";
        case Metric::a_lat: return "a_lat";
        case Metric::thw: return "thw";
        case Metric::ttce: return "ttce";
        case Metric::dce: return "dce";
    }
    return "?";
}

Metric metric_from_string(const std::string& s) {
    for (Metric m : kAllMetrics)
        if (s == to_string(m)) return m;
    throw Error("unknown metric '" + s + "'");
}

bool MetricFlags::get(Metric m) const {
    switch (m) {
        case Metric::d: return d;
        case Metric::v: return v;
        case Metric::a_lon: return a_lon;
        case Metric::a_lat: return a_lat;
        case Metric::thw: return thw;
        case Metric::ttce: return ttce;
        case Metric::dce: return dce;
    }
    return false;
}

std::optional<double> CriticalityRecord::value(Metric m) const {
    switch (m) {
        case Metric::d: return min_d;
        case Metric::v: return max_v;
        case Metric::a_lon: return max_a_lon;
        case Metric::a_lat: return max_a_lat;
        case Metric::thw: return min_thw;
        case Metric::ttce: return min_ttce;
        case Metric::dce: return min_dce;
    }
    return std::nullopt;
}

namespace {

void fold_min(std::optional<double>& acc, double v) {
    if (!acc || v < *acc) acc = v;
}

void fold_max(std::optional<double>& acc, double v) {
    if (!acc || v > *acc) acc = v;
}

bool below(const std::optional<double>& v, double limit) { return v && *v < limit; }
bool above(const std::optional<double>& v, double limit) { return v && *v > limit; }

}  // namespace

void aggregate(CriticalityRecord& rec, std::span<const MetricSample> samples, const Thresholds& th) {
    for (const MetricSample& m : samples) {
        fold_min(rec.min_d, m.d);
        if (m.thw) fold_min(rec.min_thw, *m.thw);
        if (m.ttce) {
            fold_min(rec.min_ttce, *m.ttce);
            if (*m.ttce < th.ttce_gate && m.dce) fold_min(rec.min_dce, *m.dce);
        }
    }
}

void classify(CriticalityRecord& rec, const Thresholds& th, double v_lim) {
    rec.flags.d = below(rec.min_d, th.d_crit);
    rec.flags.v = above(rec.max_v, th.v_factor * v_lim);
    rec.flags.a_lon = above(rec.max_a_lon, th.a_lon_crit);
    rec.flags.a_lat = above(rec.max_a_lat, th.a_lat_crit);
    rec.flags.thw = below(rec.min_thw, th.thw_crit);
    rec.flags.ttce = below(rec.min_ttce, th.ttce_gate);
    rec.flags.dce = below(rec.min_dce, th.dce_crit);
}

std::vector<KinematicState> kinematic_states(const Trajectory& traj, const LaneLayout& layout) {
    const ContinuousLateral cl = continuous_lateral(traj, layout);
    std::vector<double> vy(cl.size(), 0.0);
    if (cl.size() >= 2) {
        const double dt = traj.rate > 0.0 ? 1.0 / traj.rate : 1.0 / estimate_rate(traj.samples);
        vy = derivative(cl.y, dt);
    }
    std::vector<KinematicState> out(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const Sample& s = traj.samples[i];
        out[i] = {s.s, cl.y[i], s.v, vy[i], s.a_lon, s.a_lat};
    }
    return out;
}

namespace {

constexpr double kTimeMatch = 1e-6;

struct Prepared {
    const Trajectory* traj = nullptr;
    std::vector<KinematicState> states;
};

std::optional<std::size_t> index_at(const Trajectory& traj, double t) {
    auto it = std::lower_bound(traj.samples.begin(), traj.samples.end(), t - kTimeMatch,
                               [](const Sample& s, double v) { return s.t < v; });
    if (it == traj.samples.end() || it->t > t + kTimeMatch) return std::nullopt;
    return static_cast<std::size_t>(it - traj.samples.begin());
}

CriticalityRecord evaluate_one(const Prepared& ego, const std::vector<const Prepared*>& opponents,
                               const LaneChangeEvent& ev, const LaneLayout& layout, const Thresholds& th) {
    const Trajectory& tr = *ego.traj;
    CriticalityRecord rec;
    rec.vehicle_id = tr.vehicle_id;
    rec.recording = tr.recording;
    rec.cls = tr.shape.cls;
    rec.direction = ev.direction;
    rec.t_start = ev.t_start;
    rec.t_mid = ev.t_mid;
    rec.t_end = ev.t_end;
    rec.duration = ev.duration;
    rec.v_mid = ev.v_mid;

    const Footprint fe = footprint(tr.shape);
    std::vector<MetricSample> samples;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const Sample& s = tr.samples[k];
        if (s.t < ev.t_start - 1e-9 || s.t > ev.t_end + 1e-9) continue;
        fold_max(rec.max_v, s.v);
        fold_max(rec.max_a_lon, std::abs(s.a_lon));
        fold_max(rec.max_a_lat, std::abs(s.a_lat));
        for (const Prepared* opp : opponents) {
            const auto j = index_at(*opp->traj, s.t);
            if (!j) continue;
            samples.push_back(metric_sample(s.t, opp->traj->vehicle_id, ego.states[k], fe, opp->states[*j],
                                            footprint(opp->traj->shape)));
        }
    }
    aggregate(rec, samples, th);
    classify(rec, th, layout.v_lim);
    return rec;
}

struct EventPlan {
    std::vector<Prepared> prepared;
    std::vector<const LaneChangeEvent*> events;
    std::vector<std::size_t> ego_index;
    std::map<std::string, std::vector<std::size_t>> by_recording;
};

EventPlan plan_events(std::span<const Trajectory> corpus, std::span<const LaneChangeEvent> events,
                      const LaneLayout& layout, bool parallel) {
    EventPlan plan;
    plan.prepared.resize(corpus.size());
    auto prep = [&](std::size_t i) { plan.prepared[i] = {&corpus[i], kinematic_states(corpus[i], layout)}; };
    if (parallel) {
        parallel_for(corpus.size(), prep);
    } else {
        for (std::size_t i = 0; i < corpus.size(); ++i) prep(i);
    }
    std::unordered_map<VehicleId, std::size_t> by_id;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (!by_id.emplace(corpus[i].vehicle_id, i).second) throw Error("duplicate vehicle id in corpus");
        plan.by_recording[corpus[i].recording].push_back(i);
    }
    for (const LaneChangeEvent& e : events) {
        if (!counts_for_statistics(e)) continue;
        auto it = by_id.find(e.vehicle_id);
        if (it == by_id.end()) throw Error("event references unknown vehicle " + std::to_string(e.vehicle_id));
        plan.events.push_back(&e);
        plan.ego_index.push_back(it->second);
    }
    return plan;
}

CriticalityRecord evaluate_planned(const EventPlan& plan, std::size_t k, const LaneLayout& layout,
                                   const Thresholds& th) {
    const Prepared& ego = plan.prepared[plan.ego_index[k]];
    std::vector<const Prepared*> opps;
    for (std::size_t j : plan.by_recording.at(ego.traj->recording))
        if (j != plan.ego_index[k]) opps.push_back(&plan.prepared[j]);
    return evaluate_one(ego, opps, *plan.events[k], layout, th);
}

}  // namespace

CriticalityRecord most_critical(const Trajectory& ego, std::span<const Trajectory> opponents,
                                const LaneChangeEvent& event, const LaneLayout& layout, const Thresholds& th) {
    th.validate();
    Prepared pe{&ego, kinematic_states(ego, layout)};
    std::vector<Prepared> prepared;
    prepared.reserve(opponents.size());
    for (const Trajectory& o : opponents)
        if (o.vehicle_id != ego.vehicle_id) prepared.push_back({&o, kinematic_states(o, layout)});
    std::vector<const Prepared*> ptrs;
    for (const Prepared& p : prepared) ptrs.push_back(&p);
    return evaluate_one(pe, ptrs, event, layout, th);
}

std::vector<CriticalityRecord> evaluate_events(std::span<const Trajectory> corpus,
                                               std::span<const LaneChangeEvent> events, const LaneLayout& layout,
                                               const Thresholds& th) {
    th.validate();
    const EventPlan plan = plan_events(corpus, events, layout, true);
    std::vector<CriticalityRecord> out(plan.events.size());
    parallel_for(out.size(), [&](std::size_t k) { out[k] = evaluate_planned(plan, k, layout, th); });
    return out;
}

std::vector<CriticalityRecord> evaluate_events_serial(std::span<const Trajectory> corpus,
                                                      std::span<const LaneChangeEvent> events,
                                                      const LaneLayout& layout, const Thresholds& th) {
    th.validate();
    const EventPlan plan = plan_events(corpus, events, layout, false);
    std::vector<CriticalityRecord> out;
    out.reserve(plan.events.size());
    for (std::size_t k = 0; k < plan.events.size(); ++k) out.push_back(evaluate_planned(plan, k, layout, th));
    return out;
}

DirectionStats direction_stats(std::span<const CriticalityRecord> records) {
    DirectionStats out;
    std::map<std::string, std::array<std::vector<const CriticalityRecord*>, 2>> groups;
    for (const CriticalityRecord& r : records) groups[r.recording][r.direction == Direction::left ? 0 : 1].push_back(&r);

    for (const auto& [rec, dirs] : groups)
        for (int d = 0; d < 2; ++d)
            if (dirs[d].empty())
                out.warnings.push_back("recording " + rec + ": no " + (d == 0 ? "left" : "right") +
                                       " lane changes, group omitted");

    for (int d = 0; d < 2; ++d) {
        const Direction dir = d == 0 ? Direction::left : Direction::right;
        for (Metric m : kAllMetrics) {
            DirectionStat st;
            st.metric = m;
            st.direction = dir;
            std::vector<double> pct;
            for (const auto& [rec, dirs] : groups) {
                if (dirs[d].empty()) continue;
                RecordingShare share;
                share.recording = rec;
                share.events = dirs[d].size();
                for (const CriticalityRecord* r : dirs[d]) share.flagged += r->flags.get(m) ? 1 : 0;
                share.percent = 100.0 * static_cast<double>(share.flagged) / static_cast<double>(share.events);
                pct.push_back(share.percent);
                st.per_recording.push_back(share);
            }
            if (pct.empty()) continue;
            st.summary = box_stats(pct);
            out.stats.push_back(std::move(st));
        }
    }
    return out;
}

MetricHistogram metric_histogram(std::span<const CriticalityRecord> records, Metric m, std::size_t bins,
                                 const Thresholds& th, double v_lim) {
    MetricHistogram h;
    h.metric = m;
    std::vector<double> values;
    for (const CriticalityRecord& r : records)
        if (auto v = r.value(m)) values.push_back(*v);
    h.defined = values.size();
    h.hist = histogram(values, bins);
    switch (m) {
        case Metric::d: h.threshold = th.d_crit; break;
        case Metric::v: h.threshold = th.v_factor * v_lim; break;
        case Metric::a_lon: h.threshold = th.a_lon_crit; break;
        case Metric::a_lat: h.threshold = th.a_lat_crit; break;
        case Metric::thw: h.threshold = th.thw_crit; break;
        case Metric::ttce: h.threshold = th.ttce_gate; break;
        case Metric::dce: h.threshold = th.dce_crit; break;
    }
    h.critical_below = !(m == Metric::v || m == Metric::a_lon || m == Metric::a_lat);
    return h;
}

}  // namespace lanecrit
