#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <utility>
#include <vector>

#include "lanecrit/criticality.hpp"
#include "lanecrit/lc_detect.hpp"
#include "lanecrit/mis.hpp"
#include "lanecrit/sim_w99.hpp"
#include "lanecrit/synth.hpp"
#include "lanecrit/traj_core.hpp"

namespace lanecrit {

struct KeyValue {
    std::string key;
    std::string value;
    int line = 0;
};

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
/// Duplicate keys and lines without `=` are errors.
[[nodiscard]] std::vector<KeyValue> parse_key_values(std::istream& in, const std::string& source);

[[nodiscard]] double parse_double(const std::string& s, const std::string& what);
[[nodiscard]] long long parse_int(const std::string& s, const std::string& what);
[[nodiscard]] bool parse_bool(const std::string& s, const std::string& what);
[[nodiscard]] std::vector<double> parse_double_list(const std::string& s, const std::string& what);

struct RunConfig {
    LaneLayout layout;

    double resample_rate = 5.0;     // Hz
    double lowpass_cutoff = 1.3;    // Hz
    bool lowpass = true;

    std::vector<Criterion> criteria{Criterion::gradient, Criterion::distance, Criterion::peak};
    DetectParams detect;

    Thresholds thresholds;

    std::vector<double> bias_grid{0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5};
    std::vector<double> brownian_grid{0.0, 0.005, 0.01, 0.02, 0.05};
    std::vector<Criterion> robustness_criteria{Criterion::distance, Criterion::peak};
    bool robustness_refilter = true;
    double robustness_min_extent = 0.5;

    W99Params w99;
    double w99_dt = 0.05;
    std::vector<double> cc1_values{0.9, 0.7, 0.5, 0.3, 0.1};

    MISConfig mis;
    double mis_rear_gap_min = 1.0;
    double mis_brake_decel = 4.0;
    double mis_brake_time = 0.0;
    bool mis_brake_relative = true;

    SynthParams synth;

    double whisker_factor = 1.5;
    int histogram_bins = 20;

    std::uint64_t seed = 7;

    /// Applies one setting; throws on unknown keys or malformed values.
    void set(const std::string& key, const std::string& value);
    void validate() const;

    [[nodiscard]] static const std::vector<std::string>& keys();
};

[[nodiscard]] RunConfig load_config(const std::string& path);

[[nodiscard]] std::vector<Criterion> parse_criteria(const std::string& s);

}  // namespace lanecrit
