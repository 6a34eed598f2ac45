#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lanecrit/lc_detect.hpp"
#include "lanecrit/stats.hpp"
#include "lanecrit/traj_core.hpp"

namespace lanecrit {

struct Thresholds {
    double d_crit = 1.0;       // m, critical below
    double v_factor = 1.3;     // critical above v_factor * v_lim
    double a_lon_crit = 8.0;   // m/s^2, critical above
    double a_lat_crit = 8.0;   // m/s^2, critical above
    double thw_crit = 0.9;     // s, critical below
    double dce_crit = 1.0;     // m, critical below
    double ttce_gate = 2.6;    // s, critical below; DCE only counts below it

    void validate() const;
};

/// Road-aligned rectangle extents; zero extents describe a point.
struct Footprint {
    double length = 0.0;
    double width = 0.0;
};

[[nodiscard]] inline Footprint footprint(const VehicleShape& s) { return {s.length, s.width}; }

/// Centre state in road coordinates (s along the road, y to the left).
struct KinematicState {
    double s = 0.0;
    double y = 0.0;
    double v_lon = 0.0;
    double v_lat = 0.0;
    double a_lon = 0.0;
    double a_lat = 0.0;
};

/// Gap between two footprints whose centres are offset by (ds, dy); 0 on overlap.
[[nodiscard]] double footprint_gap(double ds, double dy, const Footprint& a, const Footprint& b);

[[nodiscard]] double euclidean_distance(const KinematicState& a, const Footprint& fa,
                                        const KinematicState& b, const Footprint& fb);

/// Bumper-to-bumper gap over ego speed, for an opponent ahead whose lateral
/// extent intersects the ego's. Undefined below 0.1 m/s ego speed.
[[nodiscard]] std::optional<double> thw(const KinematicState& ego, const Footprint& fe,
                                        const KinematicState& opp, const Footprint& fo);

struct Encounter {
    double ttce = 0.0;
    double dce = 0.0;
    bool closing = false;  // centres approach at t = 0
};

/// Closest encounter of the centres under constant velocities; dce is the
/// footprint gap at that instant.
[[nodiscard]] Encounter ttce_dce(const KinematicState& ego, const Footprint& fe,
                                 const KinematicState& opp, const Footprint& fo);

struct MetricSample {
    double t = 0.0;
    VehicleId opponent_id = 0;
    double d = 0.0;
    std::optional<double> thw;
    std::optional<double> ttce;  // only for closing pairs
    std::optional<double> dce;
};

[[nodiscard]] MetricSample metric_sample(double t, VehicleId opponent_id, const KinematicState& ego,
                                         const Footprint& fe, const KinematicState& opp, const Footprint& fo);

enum class Metric { d, v, a_lon, a_lat, thw, ttce, dce };
inline constexpr std::array<Metric, 7> kAllMetrics{Metric::d,     Metric::v,    Metric::a_lon, Metric::a_lat,
                                                   Metric::thw,   Metric::ttce, Metric::dce};

[[nodiscard]] const char* to_string(Metric m);
[[nodiscard]] Metric metric_from_string(const std::string& s);

struct MetricFlags {
    bool d = false;
    bool v = false;
    bool a_lon = false;
    bool a_lat = false;
    bool thw = false;
    bool ttce = false;
    bool dce = false;

    [[nodiscard]] bool get(Metric m) const;
    [[nodiscard]] bool any() const { return d || v || a_lon || a_lat || thw || ttce || dce; }
    friend bool operator==(const MetricFlags&, const MetricFlags&) = default;
};

/// Worst-case values of one lane change over its window and all opponents.
struct CriticalityRecord {
    VehicleId vehicle_id = 0;
    std::string recording;
    VehicleClass cls = VehicleClass::car;
    Direction direction = Direction::left;
    double t_start = 0.0;
    double t_mid = 0.0;
    double t_end = 0.0;
    double duration = 0.0;
    double v_mid = 0.0;

    std::optional<double> min_d;
    std::optional<double> max_v;
    std::optional<double> max_a_lon;  // magnitudes
    std::optional<double> max_a_lat;
    std::optional<double> min_thw;
    std::optional<double> min_ttce;
    std::optional<double> min_dce;  // over samples with ttce < ttce_gate
    MetricFlags flags;

    [[nodiscard]] std::optional<double> value(Metric m) const;
    friend bool operator==(const CriticalityRecord&, const CriticalityRecord&) = default;
};

/// Folds pairwise samples into `rec` (min d, THW, TTCE; gated min DCE).
void aggregate(CriticalityRecord& rec, std::span<const MetricSample> samples, const Thresholds& th);

/// Sets every flag from the record values; undefined values never flag.
void classify(CriticalityRecord& rec, const Thresholds& th, double v_lim);

/// Per-sample kinematic states; v_lat and a_lat come from the continuous
/// lateral position.
[[nodiscard]] std::vector<KinematicState> kinematic_states(const Trajectory& traj, const LaneLayout& layout);

/// Worst case of one event window [t_start, t_end] of `ego` against `opponents`.
/// Opponent samples are matched to ego samples by time stamp.
[[nodiscard]] CriticalityRecord most_critical(const Trajectory& ego, std::span<const Trajectory> opponents,
                                              const LaneChangeEvent& event, const LaneLayout& layout,
                                              const Thresholds& th);

/// Criticality records for every statistics-eligible event. Opponents are the
/// other vehicles of the same recording.
[[nodiscard]] std::vector<CriticalityRecord> evaluate_events(std::span<const Trajectory> corpus,
                                                             std::span<const LaneChangeEvent> events,
                                                             const LaneLayout& layout, const Thresholds& th);

/// Serial reference of evaluate_events().
[[nodiscard]] std::vector<CriticalityRecord> evaluate_events_serial(std::span<const Trajectory> corpus,
                                                                    std::span<const LaneChangeEvent> events,
                                                                    const LaneLayout& layout,
                                                                    const Thresholds& th);

struct RecordingShare {
    std::string recording;
    std::size_t events = 0;
    std::size_t flagged = 0;
    double percent = 0.0;
};

struct DirectionStat {
    Metric metric = Metric::thw;
    Direction direction = Direction::left;
    std::vector<RecordingShare> per_recording;
    BoxStats summary;  // across recordings, in percent
};

struct DirectionStats {
    std::vector<DirectionStat> stats;
    std::vector<std::string> warnings;
};

/// Percentage of flagged lane changes per recording and direction, with a
/// box summary over recordings. Empty (recording, direction) groups are
/// skipped with a warning.
[[nodiscard]] DirectionStats direction_stats(std::span<const CriticalityRecord> records);

struct MetricHistogram {
    Metric metric = Metric::thw;
    Histogram hist;
    double threshold = 0.0;
    bool critical_below = true;
    std::size_t defined = 0;
};

[[nodiscard]] MetricHistogram metric_histogram(std::span<const CriticalityRecord> records, Metric m,
                                               std::size_t bins, const Thresholds& th, double v_lim);

}  // namespace lanecrit
