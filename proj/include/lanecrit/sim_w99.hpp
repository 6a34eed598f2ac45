#pragma once

#include <map>
#include <optional>
#include <span>
#include <vector>

#include "lanecrit/traj_core.hpp"

namespace lanecrit {

struct W99Params {
    double cc0 = 1.5;    // m, standstill gap
    double cc1 = 0.9;    // s, target time gap
    double cc2 = 4.0;    // m, following oscillation gap
    double cc3 = -8.0;   // s, perception threshold for closing in
    double cc4 = -0.35;  // m/s, negative following threshold
    double cc5 = 0.35;   // m/s, positive following threshold
    double cc6 = 11.44;  // 1e-4 rad/s, speed dependency of the oscillation
    double cc7 = 0.25;   // m/s^2, oscillation acceleration
    double cc8 = 3.5;    // m/s^2, acceleration from standstill
    double cc9 = 1.5;    // m/s^2, acceleration at 80 km/h
    double v_desired = 120.0 / 3.6;  // m/s

    void validate() const;
};

enum class W99Regime { free, closing, following, emergency };

[[nodiscard]] const char* to_string(W99Regime r);

struct W99Follower {
    double s = 0.0;  // m, centre
    double v = 0.0;  // m/s
    double length = 4.5;
};

struct W99Leader {
    double s = 0.0;
    double v = 0.0;
    double a = 0.0;
    double length = 4.5;
};

struct W99Decision {
    double accel = 0.0;
    W99Regime regime = W99Regime::free;
};

/// Net (bumper-to-bumper) following distance the model aims for at speed v.
[[nodiscard]] inline double w99_desired_gap(const W99Params& p, double v) { return p.cc0 + p.cc1 * v; }

/// One evaluation of the regime logic, clamped to [-8, cc8 + cc9] m/s^2.
[[nodiscard]] W99Decision w99_decide(const W99Follower& f, const std::optional<W99Leader>& leader,
                                     const W99Params& p);

[[nodiscard]] inline double w99_accel(const W99Follower& f, const std::optional<W99Leader>& leader,
                                      const W99Params& p) {
    return w99_decide(f, leader, p).accel;
}

/// Recorded trajectories replayed verbatim, except `substituted_id`, which is
/// driven longitudinally by the model from its first recorded sample.
struct ScenarioSpec {
    std::vector<Trajectory> trajectories;
    VehicleId substituted_id = 0;
    W99Params model;
    double dt = 0.05;        // s
    double duration = 0.0;   // s; 0 = recorded span of the substituted vehicle

    void validate() const;
};

/// Replayed state of a recorded vehicle at time t (linear interpolation of
/// s, lat, v, a; lane held from the latest sample at or before t).
struct ReplayState {
    double s = 0.0;
    int lane = 0;
    double lat = 0.0;
    double v = 0.0;
    double a_lon = 0.0;
    double a_lat = 0.0;
};

[[nodiscard]] std::optional<ReplayState> replay_at(const Trajectory& traj, double t);

/// Forward-Euler simulation of the substituted vehicle. The output is sampled
/// every dt and keeps the recorded lane and lateral offset.
[[nodiscard]] Trajectory simulate(const ScenarioSpec& spec);

struct ThwPoint {
    double t = 0.0;
    VehicleId opponent_id = 0;
    double thw = 0.0;

    friend bool operator==(const ThwPoint&, const ThwPoint&) = default;
};

/// THW of `ego` against every other scenario vehicle at each ego sample where it is defined.
[[nodiscard]] std::vector<ThwPoint> thw_traces(const Trajectory& ego, std::span<const Trajectory> others,
                                               const LaneLayout& layout);

struct SampledScenario {
    double cc1 = 0.0;
    Trajectory ego;
    std::vector<ThwPoint> traces;
    std::map<VehicleId, double> min_thw;  // per opponent with a defined THW
};

struct SampledScenarioSet {
    std::vector<SampledScenario> entries;
};

[[nodiscard]] SampledScenarioSet sample_cc1(const ScenarioSpec& spec, std::span<const double> cc1_values,
                                            const LaneLayout& layout);

/// Serial reference of sample_cc1().
[[nodiscard]] SampledScenarioSet sample_cc1_serial(const ScenarioSpec& spec, std::span<const double> cc1_values,
                                                   const LaneLayout& layout);

/// Ego (id 1) in the right lane is passed by a faster Opp2 (id 2) that cuts in
/// ahead and leaves again, then closes on a slower Opp1 (id 3) and overtakes it.
[[nodiscard]] ScenarioSpec overtaking_fixture();

inline constexpr VehicleId kFixtureEgo = 1;
inline constexpr VehicleId kFixtureOpp2 = 2;
inline constexpr VehicleId kFixtureOpp1 = 3;

}  // namespace lanecrit
