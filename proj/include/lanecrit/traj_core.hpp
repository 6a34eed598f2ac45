#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lanecrit/error.hpp"

namespace lanecrit {

using VehicleId = std::int64_t;

/// Lateral positions live on a 2^-20 m (~1 um) lattice. Sums and differences
/// of lattice values are exact in double precision, so a constant lateral
/// offset added to a trajectory cancels bit-exactly in every difference.
inline constexpr double kLateralQuantum = 1.0 / 1048576.0;

[[nodiscard]] inline double snap_lateral(double v) {
    return std::nearbyint(v / kLateralQuantum) * kLateralQuantum;
}

/// Straight multi-lane road; lane 0 is the rightmost lane.
struct LaneLayout {
    int lane_count = 3;
    double lane_width = 3.5;  // m
    double v_lim = 120.0 / 3.6;  // m/s

    void validate() const;
    /// Lateral coordinate of the centre of `lane`.
    [[nodiscard]] double lane_center(int lane) const { return lane * lane_width; }
};

enum class VehicleClass { car, truck };

[[nodiscard]] const char* to_string(VehicleClass c);
[[nodiscard]] VehicleClass vehicle_class_from_string(const std::string& s);

struct VehicleShape {
    double length = 4.5;  // m
    double width = 1.8;   // m
    VehicleClass cls = VehicleClass::car;

    void validate() const;
    friend bool operator==(const VehicleShape&, const VehicleShape&) = default;
};

/// One time step of a lane-referenced vehicle state. `lat` is measured from
/// the centre of `lane`, positive to the left.
struct Sample {
    double t = 0.0;
    double s = 0.0;
    int lane = 0;
    double lat = 0.0;
    double v = 0.0;
    double a_lon = 0.0;
    double a_lat = 0.0;
    std::optional<double> d_left;
    std::optional<double> d_right;

    friend bool operator==(const Sample&, const Sample&) = default;
};

struct Trajectory {
    VehicleId vehicle_id = 0;
    VehicleShape shape;
    std::string recording;  // recording session the vehicle belongs to
    std::vector<Sample> samples;
    double rate = 0.0;  // Hz; 0 when not uniformly sampled

    [[nodiscard]] std::size_t size() const noexcept { return samples.size(); }
    [[nodiscard]] bool empty() const noexcept { return samples.empty(); }
    [[nodiscard]] double t_begin() const { return samples.front().t; }
    [[nodiscard]] double t_end() const { return samples.back().t; }
    /// True when every sample carries both lane-marking distances.
    [[nodiscard]] bool has_marking_distances() const;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Global lateral position y = lane * lane_width + lat, continuous across
/// lane re-referencing.
struct ContinuousLateral {
    std::vector<double> t;
    std::vector<double> y;
    std::vector<int> lane;
    std::vector<double> lat;
    double lane_width = 0.0;
    double dt = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return y.size(); }
    /// y_i - y_0 assembled from lane steps and lateral differences. Identical
    /// bits for any trajectory shifted by a lattice-aligned constant.
    [[nodiscard]] std::vector<double> relative() const;
};

/// Sample rate estimated from the mean spacing; throws on non-increasing time.
[[nodiscard]] double estimate_rate(std::span<const Sample> samples);

/// Linear resampling onto t = k / target_rate. Channels with a lane switch
/// between the bracketing samples take the nearer sample instead.
[[nodiscard]] Trajectory resample(const Trajectory& traj, double target_rate);

/// Zero-phase second-order Butterworth low-pass on the lateral channel.
[[nodiscard]] Trajectory lowpass(const Trajectory& traj, double cutoff_hz, const LaneLayout& layout);

/// Forward-backward biquad filtering of a uniformly sampled signal.
[[nodiscard]] std::vector<double> filtfilt_butter2(std::span<const double> x, double cutoff_hz,
                                                   double rate_hz);

[[nodiscard]] ContinuousLateral continuous_lateral(const Trajectory& traj, const LaneLayout& layout);

/// Resamples every trajectory and, when `cutoff_hz` > 0, low-pass filters it.
/// Parallel over trajectories.
[[nodiscard]] std::vector<Trajectory> preprocess(std::span<const Trajectory> corpus, double rate_hz,
                                                 double cutoff_hz, const LaneLayout& layout);

/// Serial reference of preprocess().
[[nodiscard]] std::vector<Trajectory> preprocess_serial(std::span<const Trajectory> corpus, double rate_hz,
                                                        double cutoff_hz, const LaneLayout& layout);

/// Central differences inside, second-order one-sided differences at both ends.
[[nodiscard]] std::vector<double> derivative(std::span<const double> values, double dt);

}  // namespace lanecrit
