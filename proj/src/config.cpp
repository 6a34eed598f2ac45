#include "lanecrit/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>

namespace lanecrit {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<KeyValue> parse_key_values(std::istream& in, const std::string& source) {
    std::vector<KeyValue> out;
    std::set<std::string> seen;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(source + ":" + std::to_string(n) + ": expected 'key = value'");
        KeyValue kv{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), n};
        if (kv.key.empty()) throw Error(source + ":" + std::to_string(n) + ": empty key");
        if (!seen.insert(kv.key).second)
            throw Error(source + ":" + std::to_string(n) + ": duplicate key '" + kv.key + "'");
        out.push_back(std::move(kv));
    }
    return out;
}

double parse_double(const std::string& s, const std::string& what) {
    const std::string t = trim(s);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty())
        throw Error(what + ": invalid number '" + s + "'");
    return v;
}

long long parse_int(const std::string& s, const std::string& what) {
    const std::string t = trim(s);
    long long v = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty())
        throw Error(what + ": invalid integer '" + s + "'");
    return v;
}

bool parse_bool(const std::string& s, const std::string& what) {
    const std::string t = trim(s);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw Error(what + ": invalid boolean '" + s + "'");
}

std::vector<double> parse_double_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::size_t pos = 0;
    const std::string t = trim(s);
    if (t.empty()) return out;
    while (true) {
        const auto c = t.find(',', pos);
        out.push_back(parse_double(t.substr(pos, c - pos), what));
        if (c == std::string::npos) break;
        pos = c + 1;
    }
    return out;
}

std::vector<Criterion> parse_criteria(const std::string& s) {
    std::vector<Criterion> out;
    std::size_t pos = 0;
    const std::string t = trim(s);
    while (!t.empty()) {
        const auto c = t.find(',', pos);
        out.push_back(criterion_from_string(trim(t.substr(pos, c - pos))));
        if (c == std::string::npos) break;
        pos = c + 1;
    }
    if (out.empty()) throw Error("criteria list is empty");
    return out;
}

namespace {

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

Setter dbl(double RunConfig::*m) {
    return [m](RunConfig& c, const std::string& v, const std::string& k) { c.*m = parse_double(v, k); };
}

template <class S>
Setter sub_dbl(S RunConfig::*s, double S::*m) {
    return [s, m](RunConfig& c, const std::string& v, const std::string& k) { (c.*s).*m = parse_double(v, k); };
}

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        t["layout.lane_count"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.layout.lane_count = static_cast<int>(parse_int(v, k));
        };
        t["layout.lane_width"] = sub_dbl(&RunConfig::layout, &LaneLayout::lane_width);
        t["layout.v_lim"] = sub_dbl(&RunConfig::layout, &LaneLayout::v_lim);

        t["preprocess.rate"] = dbl(&RunConfig::resample_rate);
        t["preprocess.cutoff"] = dbl(&RunConfig::lowpass_cutoff);
        t["preprocess.lowpass"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.lowpass = parse_bool(v, k);
        };

        t["detect.criteria"] = [](RunConfig& c, const std::string& v, const std::string&) {
            c.criteria = parse_criteria(v);
        };
        t["detect.distance_threshold"] = sub_dbl(&RunConfig::detect, &DetectParams::distance_threshold);
        t["detect.merge_gap"] = sub_dbl(&RunConfig::detect, &DetectParams::merge_gap);
        t["detect.prominence_min"] = sub_dbl(&RunConfig::detect, &DetectParams::prominence_min);
        t["detect.min_peak_separation"] = sub_dbl(&RunConfig::detect, &DetectParams::min_peak_separation);
        t["detect.min_extent"] = sub_dbl(&RunConfig::detect, &DetectParams::min_extent);
        t["detect.double_extent_factor"] = sub_dbl(&RunConfig::detect, &DetectParams::double_extent_factor);

        t["thresholds.d_crit"] = sub_dbl(&RunConfig::thresholds, &Thresholds::d_crit);
        t["thresholds.v_factor"] = sub_dbl(&RunConfig::thresholds, &Thresholds::v_factor);
        t["thresholds.a_lon_crit"] = sub_dbl(&RunConfig::thresholds, &Thresholds::a_lon_crit);
        t["thresholds.a_lat_crit"] = sub_dbl(&RunConfig::thresholds, &Thresholds::a_lat_crit);
        t["thresholds.thw_crit"] = sub_dbl(&RunConfig::thresholds, &Thresholds::thw_crit);
        t["thresholds.dce_crit"] = sub_dbl(&RunConfig::thresholds, &Thresholds::dce_crit);
        t["thresholds.ttce_gate"] = sub_dbl(&RunConfig::thresholds, &Thresholds::ttce_gate);

        t["robustness.bias_grid"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.bias_grid = parse_double_list(v, k);
        };
        t["robustness.brownian_grid"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.brownian_grid = parse_double_list(v, k);
        };
        t["robustness.criteria"] = [](RunConfig& c, const std::string& v, const std::string&) {
            c.robustness_criteria = parse_criteria(v);
        };
        t["robustness.refilter"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.robustness_refilter = parse_bool(v, k);
        };
        t["robustness.min_extent"] = dbl(&RunConfig::robustness_min_extent);

        for (const char* name : {"cc0", "cc1", "cc2", "cc3", "cc4", "cc5", "cc6", "cc7", "cc8", "cc9", "v_desired"}) {
            static const std::map<std::string, double W99Params::*> fields{
                {"cc0", &W99Params::cc0}, {"cc1", &W99Params::cc1}, {"cc2", &W99Params::cc2},
                {"cc3", &W99Params::cc3}, {"cc4", &W99Params::cc4}, {"cc5", &W99Params::cc5},
                {"cc6", &W99Params::cc6}, {"cc7", &W99Params::cc7}, {"cc8", &W99Params::cc8},
                {"cc9", &W99Params::cc9}, {"v_desired", &W99Params::v_desired}};
            t[std::string("w99.") + name] = sub_dbl(&RunConfig::w99, fields.at(name));
        }
        t["w99.dt"] = dbl(&RunConfig::w99_dt);
        t["sample.cc1_values"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.cc1_values = parse_double_list(v, k);
        };

        t["mis.rear_detect_range"] = sub_dbl(&RunConfig::mis, &MISConfig::rear_detect_range);
        t["mis.delta_v_min"] = sub_dbl(&RunConfig::mis, &MISConfig::delta_v_min);
        t["mis.thw_increase"] = sub_dbl(&RunConfig::mis, &MISConfig::thw_increase);
        t["mis.comfort_decel_cap"] = sub_dbl(&RunConfig::mis, &MISConfig::comfort_decel_cap);
        t["mis.thw_setpoint"] = sub_dbl(&RunConfig::mis, &MISConfig::thw_setpoint);
        t["mis.engage_slack"] = sub_dbl(&RunConfig::mis, &MISConfig::engage_slack);
        t["mis.left_gap_min"] = sub_dbl(&RunConfig::mis, &MISConfig::left_gap_min);
        t["mis.automated"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.mis.automated = parse_bool(v, k);
        };
        t["mis.rear_gap_min"] = dbl(&RunConfig::mis_rear_gap_min);
        t["mis.brake_decel"] = dbl(&RunConfig::mis_brake_decel);
        t["mis.brake_time"] = dbl(&RunConfig::mis_brake_time);
        t["mis.brake_relative"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.mis_brake_relative = parse_bool(v, k);
        };

        t["synth.n"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.synth.n = static_cast<int>(parse_int(v, k));
        };
        t["synth.rate"] = sub_dbl(&RunConfig::synth, &SynthParams::rate);
        t["synth.recordings"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.synth.recordings = static_cast<int>(parse_int(v, k));
        };
        t["synth.truck_share"] = sub_dbl(&RunConfig::synth, &SynthParams::truck_share);
        t["synth.duration_min"] = sub_dbl(&RunConfig::synth, &SynthParams::duration_min);
        t["synth.duration_max"] = sub_dbl(&RunConfig::synth, &SynthParams::duration_max);
        t["synth.speed_min"] = sub_dbl(&RunConfig::synth, &SynthParams::speed_min);
        t["synth.speed_max"] = sub_dbl(&RunConfig::synth, &SynthParams::speed_max);
        t["synth.jitter_max"] = sub_dbl(&RunConfig::synth, &SynthParams::jitter_max);
        t["synth.jitter_freq_max"] = sub_dbl(&RunConfig::synth, &SynthParams::jitter_freq_max);
        t["synth.lane_keep_share"] = sub_dbl(&RunConfig::synth, &SynthParams::lane_keep_share);
        t["synth.two_change_share"] = sub_dbl(&RunConfig::synth, &SynthParams::two_change_share);

        t["stats.whisker_factor"] = dbl(&RunConfig::whisker_factor);
        t["stats.histogram_bins"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            c.histogram_bins = static_cast<int>(parse_int(v, k));
        };

        t["seed"] = [](RunConfig& c, const std::string& v, const std::string& k) {
            const long long s = parse_int(v, k);
            if (s < 0) throw Error(k + ": seed must be >= 0");
            c.seed = static_cast<std::uint64_t>(s);
        };
        return t;
    }();
    return table;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
    const auto& t = setters();
    const auto it = t.find(key);
    if (it == t.end()) throw Error("unknown configuration key '" + key + "'");
    it->second(*this, value, key);
}

const std::vector<std::string>& RunConfig::keys() {
    static const std::vector<std::string> k = [] {
        std::vector<std::string> out;
        for (const auto& [name, fn] : setters()) out.push_back(name);
        return out;
    }();
    return k;
}

void RunConfig::validate() const {
    layout.validate();
    if (!(resample_rate > 0.0)) throw Error("preprocess.rate must be > 0");
    if (lowpass && !(lowpass_cutoff > 0.0 && lowpass_cutoff < resample_rate / 2.0))
        throw Error("preprocess.cutoff must lie in (0, rate / 2)");
    detect.validate(layout);
    thresholds.validate();
    for (double b : bias_grid)
        if (!(b >= 0.0)) throw Error("robustness.bias_grid values must be >= 0");
    for (double b : brownian_grid)
        if (!(b >= 0.0)) throw Error("robustness.brownian_grid values must be >= 0");
    if (!(robustness_min_extent >= 0.0)) throw Error("robustness.min_extent must be >= 0");
    w99.validate();
    if (!(w99_dt > 0.0 && w99_dt <= 0.1)) throw Error("w99.dt must be in (0, 0.1]");
    if (cc1_values.empty()) throw Error("sample.cc1_values is empty");
    for (double c : cc1_values)
        if (!(c > 0.0)) throw Error("sample.cc1_values must be positive");
    mis.validate();
    if (!(mis_rear_gap_min > 0.0 && mis_brake_decel >= 0.0)) throw Error("mis brake/gap settings invalid");
    if (!(whisker_factor > 0.0)) throw Error("stats.whisker_factor must be > 0");
    if (histogram_bins < 1) throw Error("stats.histogram_bins must be >= 1");
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open configuration '" + path + "'");
    RunConfig cfg;
    for (const KeyValue& kv : parse_key_values(in, path)) {
        try {
            cfg.set(kv.key, kv.value);
        } catch (const Error& e) {
            throw Error(path + ":" + std::to_string(kv.line) + ": " + e.what());
        }
    }
    return cfg;
}

}  // namespace lanecrit
