#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lanecrit/traj_core.hpp"

namespace lanecrit {

enum class Direction { left, right };
enum class EventKind { single, double_change };
enum class Criterion { gradient, distance, peak };

[[nodiscard]] const char* to_string(Direction d);
[[nodiscard]] const char* to_string(EventKind k);
[[nodiscard]] const char* to_string(Criterion c);
[[nodiscard]] Direction direction_from_string(const std::string& s);
[[nodiscard]] EventKind event_kind_from_string(const std::string& s);
[[nodiscard]] Criterion criterion_from_string(const std::string& s);

struct LaneChangeEvent {
    VehicleId vehicle_id = 0;
    Criterion criterion = Criterion::peak;
    double t_start = 0.0;
    double t_mid = 0.0;  // marking-crossing instant
    double t_end = 0.0;
    double duration = 0.0;
    Direction direction = Direction::left;
    double v_mid = 0.0;
    double lateral_extent = 0.0;
    EventKind kind = EventKind::single;
    bool truncated = false;  // window reaches the recording boundary

    friend bool operator==(const LaneChangeEvent&, const LaneChangeEvent&) = default;
};

struct PeakParams {
    double prominence_min = 0.15;       // m/s
    double min_peak_separation = 4.0;   // s
    double rel_height = 0.5;

    void validate() const;
};

/// Relative evaluation height of the peak width: 1 - (width_obj / width_lane) / 2.
[[nodiscard]] double rel_height_for(double width_obj, double width_lane);

struct Peak {
    std::size_t index = 0;
    double height = 0.0;
    double prominence = 0.0;
    std::size_t left_base = 0;
    std::size_t right_base = 0;
};

/// Topographic prominence of the sample at `index` (bases searched to the series bounds).
[[nodiscard]] Peak peak_prominence(std::span<const double> x, std::size_t index);

/// Local maxima with prominence >= prominence_min; among maxima closer than
/// min_separation_s the higher one survives.
[[nodiscard]] std::vector<Peak> find_peaks(std::span<const double> x, double dt,
                                           double prominence_min, double min_separation_s);
[[nodiscard]] std::vector<Peak> find_peaks(std::span<const double> x, double dt, const PeakParams& params);

struct PeakWidth {
    double left_ip = 0.0;   // fractional sample index
    double right_ip = 0.0;
    double eval_height = 0.0;
    double t_start = 0.0;
    double t_end = 0.0;
    double duration = 0.0;
    bool truncated = false;
};

/// Width of `peak` at height peak - rel_height * prominence, with linearly
/// interpolated crossings. `t0` is the time of sample 0.
[[nodiscard]] PeakWidth peak_width(std::span<const double> x, double t0, double dt, const Peak& peak,
                                   double rel_height);

struct DetectParams {
    double distance_threshold = 0.8;  // m
    double merge_gap = 0.6;           // s; distance-criterion runs closer than this merge
    double prominence_min = 0.15;     // m/s
    double min_peak_separation = 4.0; // s
    double min_extent = 2.5;          // m
    double double_extent_factor = 1.5;

    void validate(const LaneLayout& layout) const;
    [[nodiscard]] PeakParams peak_params(const VehicleShape& shape, const LaneLayout& layout) const;
};

[[nodiscard]] std::vector<LaneChangeEvent> detect_gradient(const Trajectory& traj, const LaneLayout& layout,
                                                           const DetectParams& params);

/// Per-sample exceedance |lat| > threshold of the lane-relative displacement.
[[nodiscard]] std::vector<char> distance_predicate(const ContinuousLateral& y, double threshold);

[[nodiscard]] std::vector<LaneChangeEvent> detect_distance(const Trajectory& traj, const LaneLayout& layout,
                                                           const DetectParams& params);

[[nodiscard]] std::vector<LaneChangeEvent> detect_peak(const Trajectory& traj, const LaneLayout& layout,
                                                       const DetectParams& params);

/// Marks events spanning two lanes, or same-direction overlapping pairs
/// (merged), as double lane changes. Input is one trajectory's events.
[[nodiscard]] std::vector<LaneChangeEvent> classify_double(std::vector<LaneChangeEvent> events,
                                                           const LaneLayout& layout,
                                                           double extent_factor = 1.5);

/// Runs one criterion followed by classify_double.
[[nodiscard]] std::vector<LaneChangeEvent> detect(Criterion criterion, const Trajectory& traj,
                                                  const LaneLayout& layout, const DetectParams& params);

/// detect() over a corpus, concatenated in corpus order. Parallel over trajectories.
[[nodiscard]] std::vector<LaneChangeEvent> detect_all(std::span<const Trajectory> corpus, Criterion criterion,
                                                      const LaneLayout& layout, const DetectParams& params);

/// Serial reference of detect_all().
[[nodiscard]] std::vector<LaneChangeEvent> detect_all_serial(std::span<const Trajectory> corpus,
                                                             Criterion criterion, const LaneLayout& layout,
                                                             const DetectParams& params);

/// True for events that enter duration/speed/criticality statistics.
[[nodiscard]] inline bool counts_for_statistics(const LaneChangeEvent& e) {
    return e.kind == EventKind::single && !e.truncated;
}

}  // namespace lanecrit
