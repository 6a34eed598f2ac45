#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lanecrit/criticality.hpp"
#include "lanecrit/sim_w99.hpp"
#include "lanecrit/traj_core.hpp"

namespace lanecrit {

struct MISConfig {
    double rear_detect_range = 100.0;   // m
    double delta_v_min = 10.0 / 3.6;    // m/s
    double thw_increase = 2.0;          // s
    double comfort_decel_cap = 1.5;     // m/s^2
    double thw_setpoint = 0.9;          // s, regular cruise front THW
    double engage_slack = 0.5;          // s, "short margin" = front THW < setpoint + slack
    double left_gap_min = 10.0;         // m, clearance kept free around the rear vehicle's overtake path
    bool automated = true;

    void validate() const;
};

/// A sensed object: centre state plus footprint.
struct TrackedObject {
    KinematicState state;
    Footprint fp;
};

struct EngagementCheck {
    bool short_margin = false;   // automated and following the front vehicle below setpoint + slack
    bool rear_in_range = false;
    bool rear_closing = false;
    bool left_lane_free = false;

    [[nodiscard]] bool engaged() const { return short_margin && rear_in_range && rear_closing && left_lane_free; }
};

/// Longitudinal bumper gap from the rear object's front to the ego's rear.
[[nodiscard]] double rear_gap(const TrackedObject& ego, const TrackedObject& rear);

/// Evaluates the four engagement predicates. `left_lane` holds the objects in
/// the lane left of the ego; `left_lane_exists` is false on the leftmost lane.
[[nodiscard]] EngagementCheck engagement_check(const TrackedObject& ego, const std::optional<TrackedObject>& front,
                                               const std::optional<TrackedObject>& rear,
                                               std::span<const TrackedObject> left_lane, bool left_lane_exists,
                                               const MISConfig& cfg);

/// Constant deceleration that lifts the front THW to `target_thw` by the
/// ego-rear closest-encounter instant, clamped to [0, comfort_decel_cap].
/// Throws when the rear vehicle is not closing or no front THW exists.
[[nodiscard]] double plan_decel(const TrackedObject& ego, const TrackedObject& front, const TrackedObject& rear,
                                double target_thw, const MISConfig& cfg);

/// Same with target = current front THW + thw_increase.
[[nodiscard]] double plan_decel(const TrackedObject& ego, const TrackedObject& front, const TrackedObject& rear,
                                const MISConfig& cfg);

enum class MISMode { idle, engaged, completed };

[[nodiscard]] const char* to_string(MISMode m);

struct MISState {
    MISMode mode = MISMode::idle;
    double commanded_decel = 0.0;
    double engagement_time = 0.0;
    double target_front_thw = 0.0;
    bool target_reached = false;
};

/// Constant-time-headway cruise controller of the ego.
struct AccParams {
    double v_set = 25.0;     // m/s
    double k_gap = 0.2;      // 1/s^2
    double k_rel = 0.6;      // 1/s
    double k_speed = 0.4;    // 1/s
    double a_min = -8.0;     // m/s^2
    double a_max = 1.5;      // m/s^2
};

struct MISScenario {
    LaneLayout layout;
    double dt = 0.05;
    double duration = 40.0;
    Trajectory ego;    // first sample is the initial state; lane kept
    Trajectory front;  // replayed
    Trajectory rear;   // first sample is the initial state; W99-driven
    std::vector<Trajectory> others;  // replayed, e.g. left-lane traffic
    AccParams acc;
    W99Params rear_model;
    double rear_lc_trigger_gap = 6.0;  // m, rear starts its overtake at this gap
    double rear_lc_duration = 4.0;     // s

    void validate() const;
};

struct FrontBrake {
    double t = 0.0;          // s, absolute or after the rear lane-change start
    double decel = 4.0;      // m/s^2
    bool relative_to_rear_lc = false;
};

struct MISTracePoint {
    double t = 0.0;
    MISMode mode = MISMode::idle;
    double ego_v = 0.0;
    double ego_a = 0.0;
    double commanded_decel = 0.0;
    std::optional<double> front_thw;
    std::optional<double> rear_thw;
    std::optional<double> rear_gap;
    double rear_lateral = 0.0;  // m, rear lateral position relative to the ego lane centre
};

struct MISEvalReport {
    bool mis_enabled = false;
    bool engaged = false;
    std::optional<double> engagement_time;
    std::optional<double> engagement_rear_gap;
    std::optional<double> engagement_closing_speed;
    double planned_decel = 0.0;
    double initial_front_thw = 0.0;
    double target_front_thw = 0.0;
    std::optional<double> target_reached_time;
    std::optional<double> rear_within_5m_time;
    std::optional<double> cutin_start;
    std::optional<double> cutin_end;
    bool braked_in_cutin_window = false;
    double max_brake_in_cutin_window = 0.0;
    std::optional<double> front_brake_time;
    std::optional<double> min_rear_gap;  // m, longitudinal E-R gap while R overlaps the ego laterally
    double min_distance = 0.0;   // m, footprint distance E-R
    bool rear_gap_violation = false;
    bool collision = false;
    std::vector<MISTracePoint> trace;
};

[[nodiscard]] MISEvalReport run_closed_loop(const MISScenario& scenario, const MISConfig& cfg, bool mis_enabled,
                                            const std::optional<FrontBrake>& brake = std::nullopt,
                                            double rear_gap_min = 1.0);

/// Ego following its front vehicle at the cruise setpoint with a fast rear
/// vehicle (low cc1) approaching in the same lane and a free left lane.
[[nodiscard]] MISScenario mis_fixture();

}  // namespace lanecrit
