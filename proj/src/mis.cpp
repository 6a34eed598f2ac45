#include "lanecrit/mis.hpp"

#include "lanecrit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lanecrit {

void MISConfig::validate() const {
    for (double v : {rear_detect_range, delta_v_min, thw_increase, comfort_decel_cap, thw_setpoint, engage_slack})
        if (!(v > 0.0)) throw Error("mis: configuration values must be positive");
    if (!(left_gap_min >= 0.0)) throw Error("mis: left_gap_min must be >= 0");
}

const char* to_string(MISMode m) {
    switch (m) {
        case MISMode::idle: return "idle";
        case MISMode::engaged: return "engaged";
        case MISMode::completed: return "completed";
    }
    return "?";
}

double rear_gap(const TrackedObject& ego, const TrackedObject& rear) {
    return ego.state.s - rear.state.s - 0.5 * (ego.fp.length + rear.fp.length);
}

namespace {

std::optional<double> front_thw(const TrackedObject& ego, const TrackedObject& front) {
    return thw(ego.state, ego.fp, front.state, front.fp);
}

}  // namespace

EngagementCheck engagement_check(const TrackedObject& ego, const std::optional<TrackedObject>& front,
                                 const std::optional<TrackedObject>& rear, std::span<const TrackedObject> left_lane,
                                 bool left_lane_exists, const MISConfig& cfg) {
    cfg.validate();
    EngagementCheck c;
    if (cfg.automated && front) {
        const auto h = front_thw(ego, *front);
        c.short_margin = h && *h < cfg.thw_setpoint + cfg.engage_slack;
    }
    if (!rear || rear->state.s >= ego.state.s) return c;

    const double gap = rear_gap(ego, *rear);
    const double dv = rear->state.v_lon - ego.state.v_lon;
    c.rear_in_range = gap <= cfg.rear_detect_range;
    c.rear_closing = dv >= cfg.delta_v_min;
    if (!left_lane_exists) return c;

    // Rear vehicle's path in the left lane from now until its rear has passed
    // the ego's front, at constant speeds.
    const double pass = dv > 0.0 ? (gap + ego.fp.length + 2.0 * rear->fp.length) / dv : 0.0;
    const double horizon = std::max(pass, 0.0);
    const int steps = static_cast<int>(std::ceil(horizon / 0.1));
    c.left_lane_free = true;
    for (const TrackedObject& o : left_lane) {
        for (int k = 0; k <= steps && c.left_lane_free; ++k) {
            const double tau = std::min(horizon, 0.1 * k);
            const double ds = (o.state.s + o.state.v_lon * tau) - (rear->state.s + rear->state.v_lon * tau);
            const double clearance = std::abs(ds) - 0.5 * (o.fp.length + rear->fp.length);
            if (clearance < cfg.left_gap_min) c.left_lane_free = false;
        }
    }
    return c;
}

double plan_decel(const TrackedObject& ego, const TrackedObject& front, const TrackedObject& rear, double target_thw,
                  const MISConfig& cfg) {
    cfg.validate();
    const auto h0 = front_thw(ego, front);
    const Encounter enc = ttce_dce(ego.state, ego.fp, rear.state, rear.fp);
    if (!h0 || !enc.closing || !(enc.ttce > 0.0)) throw Error("engagement precondition violated");
    const double delta = target_thw - *h0;
    if (delta <= 0.0) return 0.0;
    const double T = enc.ttce;
    const double v0 = ego.state.v_lon;
    const double vf = front.state.v_lon;
    const double a = (delta * v0 + (v0 - vf) * T) / (0.5 * T * T + target_thw * T);
    return std::clamp(a, 0.0, cfg.comfort_decel_cap);
}

double plan_decel(const TrackedObject& ego, const TrackedObject& front, const TrackedObject& rear,
                  const MISConfig& cfg) {
    const auto h0 = front_thw(ego, front);
    if (!h0) throw Error("engagement precondition violated");
    return plan_decel(ego, front, rear, *h0 + cfg.thw_increase, cfg);
}

void MISScenario::validate() const {
    layout.validate();
    rear_model.validate();
    if (!(dt > 0.0 && dt <= 0.1)) throw Error("mis scenario: dt must be in (0, 0.1] s");
    if (!(duration > 0.0)) throw Error("mis scenario: duration must be > 0");
    if (ego.empty() || front.empty() || rear.empty()) throw Error("mis scenario: missing ego, front or rear role");
    if (!(rear_lc_duration > 0.0 && rear_lc_trigger_gap > 0.0)) throw Error("mis scenario: invalid rear manoeuvre");
}

namespace {

double acc_command(const AccParams& p, double v, double thw_set, const std::optional<TrackedObject>& front,
                   double gap) {
    double a = p.k_speed * (p.v_set - v);
    if (front) a = std::min(a, p.k_gap * (gap - thw_set * v) + p.k_rel * (front->state.v_lon - v));
    return std::clamp(a, p.a_min, p.a_max);
}

/// Lateral fraction of a logistic lane change rescaled to run exactly from
/// 0 at `t0` to 1 at `t0 + duration`.
double normalized_logistic(double t, double t0, double duration) {
    if (t <= t0) return 0.0;
    if (t >= t0 + duration) return 1.0;
    const double tm = t0 + 0.5 * duration;
    const double lo = logistic_lane_change(t0, tm, duration, 1.0).y;
    const double hi = logistic_lane_change(t0 + duration, tm, duration, 1.0).y;
    return (logistic_lane_change(t, tm, duration, 1.0).y - lo) / (hi - lo);
}

}  // namespace

MISEvalReport run_closed_loop(const MISScenario& sc, const MISConfig& cfg, bool mis_enabled,
                              const std::optional<FrontBrake>& brake, double rear_gap_min) {
    sc.validate();
    cfg.validate();
    const double W = sc.layout.lane_width;
    const Footprint fe = footprint(sc.ego.shape);
    const Footprint ff = footprint(sc.front.shape);
    const Footprint fr = footprint(sc.rear.shape);
    const int ego_lane = sc.ego.samples.front().lane;
    const double ego_y = sc.layout.lane_center(ego_lane) + sc.ego.samples.front().lat;
    const bool left_exists = ego_lane + 1 < sc.layout.lane_count;

    double es = sc.ego.samples.front().s;
    double ev = sc.ego.samples.front().v;
    double rs = sc.rear.samples.front().s;
    double rv = sc.rear.samples.front().v;
    const double r_y0 = sc.layout.lane_center(sc.rear.samples.front().lane) + sc.rear.samples.front().lat;
    std::optional<double> lc_start;

    const double t0 = sc.ego.samples.front().t;
    double fs = 0.0, fv = 0.0;
    std::optional<double> brake_start;
    if (auto r = replay_at(sc.front, t0)) {
        fs = r->s;
        fv = r->v;
    } else {
        throw Error("mis scenario: front vehicle not present at start");
    }

    MISState st;
    MISEvalReport rep;
    rep.mis_enabled = mis_enabled;
    rep.min_distance = std::numeric_limits<double>::infinity();
    const auto steps = static_cast<std::size_t>(std::llround(sc.duration / sc.dt));

    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = t0 + static_cast<double>(k) * sc.dt;

        // Front vehicle: replay until the injected brake begins, then integrate.
        if (brake && !brake_start) {
            const bool armed = brake->relative_to_rear_lc ? lc_start && t >= *lc_start + brake->t : t >= brake->t;
            if (armed) {
                brake_start = t;
                rep.front_brake_time = t;
            }
        }
        double fa = 0.0;
        if (!brake_start) {
            if (auto r = replay_at(sc.front, t)) {
                fs = r->s;
                fv = r->v;
                fa = r->a_lon;
            }
        } else {
            fa = fv > 0.0 ? -brake->decel : 0.0;
        }

        const double r_frac = lc_start ? normalized_logistic(t, *lc_start, sc.rear_lc_duration) : 0.0;
        const double ry = r_y0 + r_frac * W;
        const TrackedObject ego{{es, ego_y, ev, 0.0, 0.0, 0.0}, fe};
        const TrackedObject front{{fs, ego_y, fv, 0.0, fa, 0.0}, ff};
        const TrackedObject rear{{rs, ry, rv, 0.0, 0.0, 0.0}, fr};
        const bool rear_in_lane = std::abs(ry - ego_y) < 0.5 * W;

        std::vector<TrackedObject> left;
        for (const Trajectory& o : sc.others) {
            const auto r = replay_at(o, t);
            if (r && r->lane == ego_lane + 1) left.push_back({{r->s, sc.layout.lane_center(r->lane) + r->lat, r->v}, footprint(o.shape)});
        }
        std::optional<TrackedObject> rear_seen;
        if (rear_in_lane && rs < es && rear_gap(ego, rear) <= cfg.rear_detect_range) rear_seen = rear;

        const double fgap = fs - es - 0.5 * (fe.length + ff.length);
        const std::optional<double> fthw = thw(ego.state, fe, front.state, ff);
        const double a_acc = acc_command(sc.acc, ev, cfg.thw_setpoint, front, fgap);

        if (mis_enabled && st.mode == MISMode::idle && rear_seen) {
            const EngagementCheck chk = engagement_check(ego, front, rear_seen, left, left_exists, cfg);
            if (chk.engaged()) {
                st.mode = MISMode::engaged;
                st.engagement_time = t;
                st.target_front_thw = *fthw + cfg.thw_increase;
                st.commanded_decel = plan_decel(ego, front, rear, st.target_front_thw, cfg);
                rep.engaged = true;
                rep.engagement_time = t;
                rep.engagement_rear_gap = rear_gap(ego, rear);
                rep.engagement_closing_speed = rv - ev;
                rep.planned_decel = st.commanded_decel;
                rep.initial_front_thw = *fthw;
                rep.target_front_thw = st.target_front_thw;
            }
        }
        if (st.mode == MISMode::engaged && !st.target_reached && fthw && *fthw >= st.target_front_thw) {
            st.target_reached = true;
            st.commanded_decel = 0.0;
            rep.target_reached_time = t;
        }
        if (st.mode == MISMode::engaged && lc_start && t >= *lc_start + sc.rear_lc_duration) {
            st.mode = MISMode::completed;
            st.commanded_decel = 0.0;
        }

        double ea = a_acc;
        if (st.mode == MISMode::engaged)
            ea = st.target_reached ? std::min(0.0, a_acc) : std::min(-st.commanded_decel, a_acc);

        // Rear vehicle: W99 on the ego until its overtake starts. During the
        // lane change it neither brakes for the ego nor accelerates until it is
        // laterally clear, then drives freely in the left lane.
        const double rgap = rear_gap(ego, rear);
        if (!lc_start && rear_in_lane && rs < es && rgap <= sc.rear_lc_trigger_gap) lc_start = t;
        const bool clear = std::abs(ry - ego_y) >= 0.5 * (fe.width + fr.width);
        double ra = 0.0;
        if (!lc_start) {
            std::optional<W99Leader> rl;
            if (rs < es) rl = W99Leader{es, ev, ea, fe.length};
            ra = w99_accel({rs, rv, fr.length}, rl, sc.rear_model);
        } else if (clear) {
            ra = w99_accel({rs, rv, fr.length}, std::nullopt, sc.rear_model);
        }

        const double d_er = euclidean_distance(ego.state, fe, rear.state, fr);
        rep.min_distance = std::min(rep.min_distance, d_er);
        if (d_er <= 0.0) rep.collision = true;
        if (!clear && rs < es) {
            rep.min_rear_gap = std::min(rep.min_rear_gap.value_or(rgap), rgap);
            if (rgap < rear_gap_min) rep.rear_gap_violation = true;
        }
        if (!rep.rear_within_5m_time && rs < es && rgap <= 5.0) rep.rear_within_5m_time = t;
        if (lc_start && t >= *lc_start && t <= *lc_start + sc.rear_lc_duration && ea < 0.0) {
            rep.braked_in_cutin_window = true;
            rep.max_brake_in_cutin_window = std::max(rep.max_brake_in_cutin_window, -ea);
        }

        MISTracePoint tp;
        tp.t = t;
        tp.mode = st.mode;
        tp.ego_v = ev;
        tp.ego_a = ea;
        tp.commanded_decel = st.commanded_decel;
        tp.front_thw = fthw;
        if (rs < es && rv > 0.1) tp.rear_thw = std::max(0.0, rgap) / rv;
        if (rs < es) tp.rear_gap = rgap;
        tp.rear_lateral = ry - ego_y;
        rep.trace.push_back(tp);

        es += ev * sc.dt;
        ev = std::max(0.0, ev + ea * sc.dt);
        rs += rv * sc.dt;
        rv = std::max(0.0, rv + ra * sc.dt);
        if (brake_start) {
            fs += fv * sc.dt;
            fv = std::max(0.0, fv + fa * sc.dt);
        }
    }
    if (lc_start) {
        rep.cutin_start = *lc_start;
        rep.cutin_end = *lc_start + sc.rear_lc_duration;
    }
    return rep;
}

MISScenario mis_fixture() {
    MISScenario sc;
    sc.duration = 40.0;
    auto single = [](VehicleId id, double s, double v, double span) {
        Trajectory tr;
        tr.vehicle_id = id;
        tr.recording = "fixture";
        tr.rate = 5.0;
        const auto n = static_cast<std::size_t>(std::llround(span * tr.rate));
        for (std::size_t k = 0; k <= n; ++k) {
            Sample smp;
            smp.t = static_cast<double>(k) / tr.rate;
            smp.s = s + v * smp.t;
            smp.v = v;
            tr.samples.push_back(smp);
        }
        return tr;
    };
    const double v = 25.0;
    const double thw0 = MISConfig{}.thw_setpoint;
    sc.ego = single(1, 0.0, v, 1.0);
    sc.front = single(2, thw0 * v + 4.5, v, sc.duration);
    sc.rear = single(3, -104.5, 39.0, 1.0);
    sc.acc.v_set = v;
    sc.rear_model.cc1 = 0.15;
    sc.rear_model.v_desired = 39.0;
    return sc;
}

}  // namespace lanecrit
