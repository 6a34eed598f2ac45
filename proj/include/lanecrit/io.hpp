#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lanecrit/criticality.hpp"
#include "lanecrit/lc_detect.hpp"
#include "lanecrit/robustness.hpp"
#include "lanecrit/sim_w99.hpp"
#include "lanecrit/synth.hpp"
#include "lanecrit/traj_core.hpp"

namespace lanecrit {

/// Decimal with 9 significant digits.
[[nodiscard]] std::string format_double(double v);

struct IngestDiagnostics {
    std::size_t rows = 0;
    std::size_t rejected_rows = 0;
    std::vector<VehicleId> rejected_trajectories;
    std::vector<std::string> messages;  // one line per rejected row or trajectory
    std::vector<std::string> warnings;
};

struct IngestResult {
    std::vector<Trajectory> trajectories;
    IngestDiagnostics diagnostics;
};

/// Reads the trajectory CSV. A malformed header throws; rows with missing or
/// non-finite values are dropped; trajectories with non-increasing time or
/// fewer than two samples are dropped. Lateral offsets are snapped to the
/// lateral lattice.
[[nodiscard]] IngestResult ingest_csv(std::istream& in, const std::string& source);
[[nodiscard]] IngestResult ingest_file(const std::string& path);

void write_trajectories_csv(std::ostream& out, std::span<const Trajectory> trajectories);

inline constexpr const char* kEventsHeader =
    "vehicle_id,criterion,t_start,t_mid,t_end,duration,direction,v_mid,lateral_extent,kind";

/// Writes the events header plus a trailing `truncated` column (0/1); the
/// reader accepts files with or without it.
void write_events_csv(std::ostream& out, std::span<const LaneChangeEvent> events);
[[nodiscard]] std::vector<LaneChangeEvent> read_events_csv(std::istream& in, const std::string& source);

void write_ground_truth_csv(std::ostream& out, std::span<const GroundTruthEvent> truth);

void write_robustness_csv(std::ostream& out, std::span<const RobustnessReport> reports);

void write_criticality_csv(std::ostream& out, std::span<const CriticalityRecord> records);

void write_thw_traces_csv(std::ostream& out, const SampledScenarioSet& set);

/// Splits one CSV line on commas (no quoting).
[[nodiscard]] std::vector<std::string> split_csv(const std::string& line);

}  // namespace lanecrit

#include "lanecrit/config.hpp"
#include "lanecrit/mis.hpp"

namespace lanecrit {

/// Substitution scenario file (`key = value`): `trajectories` (CSV path,
/// relative to the scenario file), `substituted_id`, optional `dt` and
/// `duration`. The W99 model comes from `cfg`; optional `model.*` keys
/// (cc0..cc9, v_desired) in the scenario file take precedence.
[[nodiscard]] ScenarioSpec load_scenario(const std::string& path, const RunConfig& cfg);

/// MIS scenario file: the substitution format with `role.<id> = ego|front|rear`
/// tags, plus optional `rear.*` (cc0..cc9, v_desired, lc_trigger_gap,
/// lc_duration) and `acc.*` (v_set, k_gap, k_rel, k_speed, a_min, a_max) keys.
[[nodiscard]] MISScenario load_mis_scenario(const std::string& path, const RunConfig& cfg);

/// Writes `<stem>.scenario` and `<stem>_trajectories.csv` into `dir`.
void write_scenario(const std::string& dir, const std::string& stem, const ScenarioSpec& spec);
void write_mis_scenario(const std::string& dir, const std::string& stem, const MISScenario& sc);

}  // namespace lanecrit
