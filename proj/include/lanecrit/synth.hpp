#pragma once

#include <cstdint>
#include <vector>

#include "lanecrit/lc_detect.hpp"
#include "lanecrit/traj_core.hpp"

namespace lanecrit {

struct SynthParams {
    int n = 200;
    std::uint64_t seed = 7;
    double rate = 25.0;               // Hz of the emitted raw trajectories
    LaneLayout layout;
    int recordings = 4;               // vehicles are dealt round-robin into recordings
    double truck_share = 0.15;
    double duration_min = 3.0;        // s, reference lane-change duration
    double duration_max = 10.0;
    double speed_min = 22.0;          // m/s
    double speed_max = 42.0;
    double jitter_max = 0.15;         // m, peak lateral lane-keeping jitter
    double jitter_freq_max = 0.1;     // Hz
    double lane_keep_share = 0.25;    // vehicles without any lane change
    double two_change_share = 0.3;    // vehicles with two separated lane changes
};

/// Generator-side reference for one lane change.
struct GroundTruthEvent {
    VehicleId vehicle_id = 0;
    double t_mid = 0.0;
    Direction direction = Direction::left;
    double duration = 0.0;
    double v_mid = 0.0;

    friend bool operator==(const GroundTruthEvent&, const GroundTruthEvent&) = default;
};

struct SyntheticCorpus {
    std::vector<Trajectory> trajectories;
    std::vector<GroundTruthEvent> truth;
};

/// Logistic steepness such that the transition covers the central 5/6 of
/// its lateral extent (1/12 to 11/12) within `duration` seconds.
[[nodiscard]] double logistic_steepness(double duration);

/// Lateral offset of a logistic lane change of `extent` metres centred at
/// `t_mid`, with its first and second time derivatives.
struct LateralProfile {
    double y, dy, ddy;
};
[[nodiscard]] LateralProfile logistic_lane_change(double t, double t_mid, double duration, double extent);

[[nodiscard]] SyntheticCorpus synthesize(const SynthParams& params);

/// Lane-marking distances of a vehicle of `width` at lane-relative offset `lat`.
void set_marking_distances(Sample& s, double lane_width, double width);

}  // namespace lanecrit
