#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "lanecrit/criticality.hpp"

namespace lanecrit::testing {

struct EncounterInstance {
    KinematicState ego, opp;
    Footprint fe, fo;
};

/// Random closing pair whose centre closest approach falls on the 1 ms grid.
inline EncounterInstance lattice_instance(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> vel(-40.0, 40.0);
    std::uniform_real_distribution<double> off(-8.0, 8.0);
    std::uniform_real_distribution<double> len(0.0, 18.0);
    std::uniform_real_distribution<double> wid(0.0, 2.6);
    std::uniform_int_distribution<int> tick(100, 50000);
    EncounterInstance in;
    in.fe = {len(rng), wid(rng)};
    in.fo = {len(rng), wid(rng)};
    const double t_star = tick(rng) * 1e-3;
    double vs = 0.0, vy = 0.0;
    while (std::hypot(vs, vy) < 0.5) {
        vs = vel(rng);
        vy = 0.25 * vel(rng);
    }
    // closest-approach offset perpendicular to the relative velocity
    const double q = off(rng);
    const double n = std::hypot(vs, vy);
    const double qs = -vy / n * q, qy = vs / n * q;
    in.ego = {0.0, 0.0, 25.0 + 0.25 * vel(rng), 0.05 * vel(rng), 0.0, 0.0};
    in.opp = {qs - vs * t_star, qy - vy * t_star, in.ego.v_lon + vs, in.ego.v_lat + vy, 0.0, 0.0};
    return in;
}

/// Brute-force closest encounter on a time grid: minimises the centre
/// distance over [0, horizon] and reports the footprint gap at that instant.
inline Encounter grid_encounter(const EncounterInstance& in, double step = 1e-3, double horizon = 60.0) {
    const double ps = in.opp.s - in.ego.s, py = in.opp.y - in.ego.y;
    const double vs = in.opp.v_lon - in.ego.v_lon, vy = in.opp.v_lat - in.ego.v_lat;
    const auto n = static_cast<long>(std::llround(horizon / step));
    double best_t = 0.0, best_d2 = ps * ps + py * py;
    for (long k = 1; k <= n; ++k) {
        const double t = static_cast<double>(k) * step;
        const double ds = ps + vs * t, dy = py + vy * t;
        const double d2 = ds * ds + dy * dy;
        if (d2 < best_d2) {
            best_d2 = d2;
            best_t = t;
        }
    }
    Encounter e;
    e.ttce = best_t;
    e.dce = footprint_gap(ps + vs * best_t, py + vy * best_t, in.fe, in.fo);
    e.closing = best_t > 0.0;
    return e;
}

/// One row of the threshold boundary table: a record built from the given
/// worst-case inputs and the flag it must produce.
struct BoundaryCase {
    std::string name;
    Metric metric;
    bool critical;
    CriticalityRecord record;
};

inline CriticalityRecord with_samples(std::vector<MetricSample> samples, const Thresholds& th) {
    CriticalityRecord r;
    aggregate(r, samples, th);
    return r;
}

inline MetricSample sample(double d, std::optional<double> thw = {}, std::optional<double> ttce = {},
                           std::optional<double> dce = {}) {
    MetricSample m;
    m.d = d;
    m.thw = thw;
    m.ttce = ttce;
    m.dce = dce;
    return m;
}

inline std::vector<BoundaryCase> boundary_cases(const Thresholds& th, double v_lim) {
    std::vector<BoundaryCase> cases;
    auto add = [&](std::string name, Metric m, bool crit, CriticalityRecord r) {
        cases.push_back({std::move(name), m, crit, std::move(r)});
    };
    CriticalityRecord r;

    add("d at 1.0 m", Metric::d, false, with_samples({sample(1.0)}, th));
    add("d at 0.999 m", Metric::d, true, with_samples({sample(0.999)}, th));

    r = {};
    r.max_v = 1.3 * v_lim;
    add("v at 1.3 v_lim", Metric::v, false, r);
    r.max_v = 1.3 * v_lim + 0.01;
    add("v just above 1.3 v_lim", Metric::v, true, r);

    r = {};
    r.max_a_lon = 8.0;
    add("a_lon at 8.0", Metric::a_lon, false, r);
    r.max_a_lon = 8.001;
    add("a_lon at 8.001", Metric::a_lon, true, r);

    r = {};
    r.max_a_lat = 8.0;
    add("a_lat at 8.0", Metric::a_lat, false, r);
    r.max_a_lat = 8.001;
    add("a_lat at 8.001", Metric::a_lat, true, r);

    add("thw at 0.9 s", Metric::thw, false, with_samples({sample(20.0, 0.9)}, th));
    add("thw at 0.899 s", Metric::thw, true, with_samples({sample(20.0, 0.899)}, th));

    add("ttce at 2.6 s", Metric::ttce, false, with_samples({sample(20.0, {}, 2.6, 5.0)}, th));
    add("ttce at 2.599 s", Metric::ttce, true, with_samples({sample(20.0, {}, 2.599, 5.0)}, th));

    add("dce 0.5 m at ttce 3.0 s (gate fails)", Metric::dce, false, with_samples({sample(20.0, {}, 3.0, 0.5)}, th));
    add("dce 0.999 m at ttce 2.5 s", Metric::dce, true, with_samples({sample(20.0, {}, 2.5, 0.999)}, th));

    for (BoundaryCase& c : cases) classify(c.record, th, v_lim);
    return cases;
}

}  // namespace lanecrit::testing
