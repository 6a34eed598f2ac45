#include "lanecrit/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>

#include "lanecrit/config.hpp"

namespace lanecrit {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const auto c = line.find(',', pos);
        out.push_back(line.substr(pos, c == std::string::npos ? std::string::npos : c - pos));
        if (c == std::string::npos) break;
        pos = c + 1;
    }
    if (!out.empty() && !out.back().empty() && out.back().back() == '\r') out.back().pop_back();
    return out;
}

namespace {

constexpr const char* kTrajHeader = "vehicle_id,t,s,lane,lat,v,a_lon,a_lat,d_left,d_right";
constexpr const char* kTrajExtension = ",length,width,class,recording";
constexpr const char* kDefaultRecording = "default";

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

double finite(const std::string& s, const char* column) {
    const double v = parse_double(s, column);
    if (!std::isfinite(v)) throw Error(std::string("non-finite value in column ") + column);
    return v;
}

std::optional<double> optional_finite(const std::string& s, const char* column) {
    if (s.empty()) return std::nullopt;
    return finite(s, column);
}

bool uniform_spacing(const std::vector<Sample>& xs) {
    const double mean = (xs.back().t - xs.front().t) / static_cast<double>(xs.size() - 1);
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (std::abs(xs[i].t - xs[i - 1].t - mean) > 1e-6) return false;
    return true;
}

void check_field(const std::string& s, const char* what) {
    if (s.find_first_of(",\n\r") != std::string::npos)
        throw Error(std::string(what) + " must not contain separators: '" + s + "'");
}

}  // namespace

IngestResult ingest_csv(std::istream& in, const std::string& source) {
    IngestResult res;
    auto& diag = res.diagnostics;
    std::string line;
    if (!std::getline(in, line)) throw Error(source + ": malformed header (empty file)");
    line = strip_cr(line);
    bool extended = false;
    if (line == std::string(kTrajHeader) + kTrajExtension) {
        extended = true;
    } else if (line != kTrajHeader) {
        throw Error(source + ": malformed header '" + line + "'");
    }
    const std::size_t columns = extended ? 14 : 10;

    std::map<VehicleId, std::size_t> index;
    std::vector<Trajectory> trajs;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        ++diag.rows;
        const auto f = split_csv(line);
        try {
            if (f.size() != columns)
                throw Error("expected " + std::to_string(columns) + " fields, got " + std::to_string(f.size()));
            const VehicleId id = parse_int(f[0], "vehicle_id");
            Sample s;
            s.t = finite(f[1], "t");
            s.s = finite(f[2], "s");
            s.lane = static_cast<int>(parse_int(f[3], "lane"));
            s.lat = snap_lateral(finite(f[4], "lat"));
            s.v = finite(f[5], "v");
            s.a_lon = finite(f[6], "a_lon");
            s.a_lat = finite(f[7], "a_lat");
            s.d_left = optional_finite(f[8], "d_left");
            s.d_right = optional_finite(f[9], "d_right");
            VehicleShape shape;
            std::string recording = kDefaultRecording;
            if (extended) {
                shape.length = finite(f[10], "length");
                shape.width = finite(f[11], "width");
                shape.cls = vehicle_class_from_string(f[12]);
                if (!f[13].empty()) recording = f[13];
            }
            auto [it, fresh] = index.emplace(id, trajs.size());
            if (fresh) {
                Trajectory t;
                t.vehicle_id = id;
                t.shape = shape;
                t.recording = recording;
                trajs.push_back(std::move(t));
            }
            trajs[it->second].samples.push_back(s);
        } catch (const Error& e) {
            ++diag.rejected_rows;
            diag.messages.push_back(source + ":" + std::to_string(lineno) + ": row rejected: " + e.what());
        }
    }
    if (diag.rows == 0) diag.warnings.push_back(source + ": no data rows, empty corpus");

    for (Trajectory& t : trajs) {
        try {
            t.shape.validate();
            (void)estimate_rate(t.samples);
        } catch (const Error& e) {
            diag.rejected_trajectories.push_back(t.vehicle_id);
            diag.messages.push_back(source + ": vehicle " + std::to_string(t.vehicle_id) +
                                    " rejected: " + e.what());
            continue;
        }
        t.rate = uniform_spacing(t.samples) ? estimate_rate(t.samples) : 0.0;
        res.trajectories.push_back(std::move(t));
    }
    return res;
}

IngestResult ingest_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    return ingest_csv(in, path);
}

void write_trajectories_csv(std::ostream& out, std::span<const Trajectory> trajectories) {
    out << kTrajHeader << kTrajExtension << '\n';
    for (const Trajectory& t : trajectories) {
        check_field(t.recording, "recording");
        const std::string tail = "," + format_double(t.shape.length) + "," + format_double(t.shape.width) + "," +
                                 to_string(t.shape.cls) + "," + t.recording;
        for (const Sample& s : t.samples) {
            out << t.vehicle_id << ',' << format_double(s.t) << ',' << format_double(s.s) << ',' << s.lane << ','
                << format_double(s.lat) << ',' << format_double(s.v) << ',' << format_double(s.a_lon) << ','
                << format_double(s.a_lat) << ',' << (s.d_left ? format_double(*s.d_left) : "") << ','
                << (s.d_right ? format_double(*s.d_right) : "") << tail << '\n';
        }
    }
}

void write_events_csv(std::ostream& out, std::span<const LaneChangeEvent> events) {
    out << kEventsHeader << ",truncated\n";
    for (const LaneChangeEvent& e : events) {
        out << e.vehicle_id << ',' << to_string(e.criterion) << ',' << format_double(e.t_start) << ','
            << format_double(e.t_mid) << ',' << format_double(e.t_end) << ',' << format_double(e.duration) << ','
            << to_string(e.direction) << ',' << format_double(e.v_mid) << ',' << format_double(e.lateral_extent)
            << ',' << to_string(e.kind) << ',' << (e.truncated ? 1 : 0) << '\n';
    }
}

std::vector<LaneChangeEvent> read_events_csv(std::istream& in, const std::string& source) {
    std::string line;
    if (!std::getline(in, line)) throw Error(source + ": malformed header (empty file)");
    line = strip_cr(line);
    bool with_truncated = false;
    if (line == std::string(kEventsHeader) + ",truncated") {
        with_truncated = true;
    } else if (line != kEventsHeader) {
        throw Error(source + ": malformed header '" + line + "'");
    }
    std::vector<LaneChangeEvent> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        const auto f = split_csv(line);
        try {
            if (f.size() != (with_truncated ? 11u : 10u)) throw Error("wrong field count");
            LaneChangeEvent e;
            e.vehicle_id = parse_int(f[0], "vehicle_id");
            e.criterion = criterion_from_string(f[1]);
            e.t_start = finite(f[2], "t_start");
            e.t_mid = finite(f[3], "t_mid");
            e.t_end = finite(f[4], "t_end");
            e.duration = finite(f[5], "duration");
            e.direction = direction_from_string(f[6]);
            e.v_mid = finite(f[7], "v_mid");
            e.lateral_extent = finite(f[8], "lateral_extent");
            e.kind = event_kind_from_string(f[9]);
            if (with_truncated) e.truncated = parse_bool(f[10], "truncated");
            out.push_back(e);
        } catch (const Error& e) {
            throw Error(source + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

void write_ground_truth_csv(std::ostream& out, std::span<const GroundTruthEvent> truth) {
    out << "vehicle_id,t_mid,direction,duration,v_mid\n";
    for (const GroundTruthEvent& g : truth)
        out << g.vehicle_id << ',' << format_double(g.t_mid) << ',' << to_string(g.direction) << ','
            << format_double(g.duration) << ',' << format_double(g.v_mid) << '\n';
}

void write_robustness_csv(std::ostream& out, std::span<const RobustnessReport> reports) {
    out << "criterion,kind,magnitude,detected,truth,ratio\n";
    for (const RobustnessReport& r : reports)
        for (const RobustnessRow& row : r.rows)
            out << to_string(row.criterion) << ',' << to_string(row.perturbation.kind) << ','
                << format_double(row.perturbation.magnitude) << ',' << row.detected << ',' << row.ground_truth << ','
                << format_double(row.ratio) << '\n';
}

void write_criticality_csv(std::ostream& out, std::span<const CriticalityRecord> records) {
    out << "vehicle_id,recording,class,direction,t_start,t_mid,t_end,duration,v_mid";
    for (Metric m : kAllMetrics) {
        const bool is_min = !(m == Metric::v || m == Metric::a_lon || m == Metric::a_lat);
        out << ',' << (is_min ? "min_" : "max_") << to_string(m);
    }
    for (Metric m : kAllMetrics) out << ",critical_" << to_string(m);
    out << '\n';
    for (const CriticalityRecord& r : records) {
        check_field(r.recording, "recording");
        out << r.vehicle_id << ',' << r.recording << ',' << to_string(r.cls) << ',' << to_string(r.direction) << ','
            << format_double(r.t_start) << ',' << format_double(r.t_mid) << ',' << format_double(r.t_end) << ','
            << format_double(r.duration) << ',' << format_double(r.v_mid);
        for (Metric m : kAllMetrics) {
            const auto v = r.value(m);
            out << ',' << (v ? format_double(*v) : "");
        }
        for (Metric m : kAllMetrics) out << ',' << (r.flags.get(m) ? 1 : 0);
        out << '\n';
    }
}

void write_thw_traces_csv(std::ostream& out, const SampledScenarioSet& set) {
    out << "t,opponent_id,thw,cc1\n";
    for (const SampledScenario& e : set.entries)
        for (const ThwPoint& p : e.traces)
            out << format_double(p.t) << ',' << p.opponent_id << ',' << format_double(p.thw) << ','
                << format_double(e.cc1) << '\n';
}

}  // namespace lanecrit

#include <filesystem>
#include <sstream>

namespace lanecrit {

namespace {

namespace fs = std::filesystem;

struct ScenarioKeys {
    std::map<std::string, KeyValue> kv;
    std::string path;

    std::optional<std::string> take(const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        std::string v = it->second.value;
        kv.erase(it);
        return v;
    }
    void finish() const {
        if (!kv.empty()) {
            const KeyValue& k = kv.begin()->second;
            throw Error(path + ":" + std::to_string(k.line) + ": unknown scenario key '" + k.key + "'");
        }
    }
};

ScenarioKeys read_keys(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open scenario '" + path + "'");
    ScenarioKeys keys;
    keys.path = path;
    for (KeyValue& kv : parse_key_values(in, path)) keys.kv.emplace(kv.key, kv);
    return keys;
}

std::vector<Trajectory> scenario_trajectories(ScenarioKeys& keys) {
    const auto rel = keys.take("trajectories");
    if (!rel) throw Error(keys.path + ": missing 'trajectories'");
    const fs::path p = fs::path(keys.path).parent_path() / *rel;
    IngestResult r = ingest_file(p.string());
    if (!r.diagnostics.messages.empty()) throw Error(r.diagnostics.messages.front());
    return std::move(r.trajectories);
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write '" + p.string() + "'");
    out << text;
}

const std::map<std::string, double W99Params::*>& w99_fields() {
    static const std::map<std::string, double W99Params::*> f{
        {"cc0", &W99Params::cc0}, {"cc1", &W99Params::cc1}, {"cc2", &W99Params::cc2}, {"cc3", &W99Params::cc3},
        {"cc4", &W99Params::cc4}, {"cc5", &W99Params::cc5}, {"cc6", &W99Params::cc6}, {"cc7", &W99Params::cc7},
        {"cc8", &W99Params::cc8}, {"cc9", &W99Params::cc9}, {"v_desired", &W99Params::v_desired}};
    return f;
}

const std::map<std::string, double AccParams::*>& acc_fields() {
    static const std::map<std::string, double AccParams::*> f{
        {"v_set", &AccParams::v_set}, {"k_gap", &AccParams::k_gap},   {"k_rel", &AccParams::k_rel},
        {"k_speed", &AccParams::k_speed}, {"a_min", &AccParams::a_min}, {"a_max", &AccParams::a_max}};
    return f;
}

}  // namespace

ScenarioSpec load_scenario(const std::string& path, const RunConfig& cfg) {
    ScenarioKeys keys = read_keys(path);
    ScenarioSpec spec;
    spec.trajectories = scenario_trajectories(keys);
    spec.model = cfg.w99;
    spec.dt = cfg.w99_dt;
    const auto id = keys.take("substituted_id");
    if (!id) throw Error(path + ": missing 'substituted_id'");
    spec.substituted_id = parse_int(*id, "substituted_id");
    if (auto v = keys.take("dt")) spec.dt = parse_double(*v, "dt");
    if (auto v = keys.take("duration")) spec.duration = parse_double(*v, "duration");
    for (const auto& [name, field] : w99_fields())
        if (auto v = keys.take("model." + name)) spec.model.*field = parse_double(*v, "model." + name);
    keys.finish();
    spec.validate();
    return spec;
}

MISScenario load_mis_scenario(const std::string& path, const RunConfig& cfg) {
    ScenarioKeys keys = read_keys(path);
    MISScenario sc;
    sc.layout = cfg.layout;
    std::vector<Trajectory> trajs = scenario_trajectories(keys);
    std::map<VehicleId, std::string> roles;
    for (auto it = keys.kv.begin(); it != keys.kv.end();) {
        if (it->first.rfind("role.", 0) == 0) {
            roles[parse_int(it->first.substr(5), it->first)] = it->second.value;
            it = keys.kv.erase(it);
        } else {
            ++it;
        }
    }
    for (Trajectory& t : trajs) {
        const auto r = roles.find(t.vehicle_id);
        if (r == roles.end()) {
            sc.others.push_back(std::move(t));
            continue;
        }
        const std::string role = r->second;
        roles.erase(r);
        Trajectory* slot = role == "ego" ? &sc.ego : role == "front" ? &sc.front : role == "rear" ? &sc.rear : nullptr;
        if (!slot) throw Error(path + ": unknown role '" + role + "'");
        if (!slot->empty()) throw Error(path + ": role '" + role + "' assigned twice");
        *slot = std::move(t);
    }
    if (!roles.empty())
        throw Error(path + ": role given for vehicle " + std::to_string(roles.begin()->first) +
                    " without trajectory");
    if (sc.ego.empty() || sc.front.empty() || sc.rear.empty())
        throw Error(path + ": scenario missing roles (need ego, front and rear)");
    if (auto v = keys.take("dt")) sc.dt = parse_double(*v, "dt");
    if (auto v = keys.take("duration")) sc.duration = parse_double(*v, "duration");
    for (const auto& [name, field] : w99_fields())
        if (auto v = keys.take("rear." + name)) sc.rear_model.*field = parse_double(*v, "rear." + name);
    if (auto v = keys.take("rear.lc_trigger_gap")) sc.rear_lc_trigger_gap = parse_double(*v, "rear.lc_trigger_gap");
    if (auto v = keys.take("rear.lc_duration")) sc.rear_lc_duration = parse_double(*v, "rear.lc_duration");
    for (const auto& [name, field] : acc_fields())
        if (auto v = keys.take("acc." + name)) sc.acc.*field = parse_double(*v, "acc." + name);
    keys.finish();
    sc.validate();
    return sc;
}

void write_scenario(const std::string& dir, const std::string& stem, const ScenarioSpec& spec) {
    const fs::path d(dir);
    std::ostringstream csv;
    write_trajectories_csv(csv, spec.trajectories);
    write_text(d / (stem + "_trajectories.csv"), csv.str());
    std::ostringstream s;
    s << "trajectories = " << stem << "_trajectories.csv\n"
      << "substituted_id = " << spec.substituted_id << '\n'
      << "dt = " << format_double(spec.dt) << '\n'
      << "duration = " << format_double(spec.duration) << '\n';
    for (const auto& [name, field] : w99_fields()) s << "model." << name << " = " << format_double(spec.model.*field) << '\n';
    write_text(d / (stem + ".scenario"), s.str());
}

void write_mis_scenario(const std::string& dir, const std::string& stem, const MISScenario& sc) {
    const fs::path d(dir);
    std::vector<Trajectory> all{sc.ego, sc.front, sc.rear};
    all.insert(all.end(), sc.others.begin(), sc.others.end());
    std::ostringstream csv;
    write_trajectories_csv(csv, all);
    write_text(d / (stem + "_trajectories.csv"), csv.str());
    std::ostringstream s;
    s << "trajectories = " << stem << "_trajectories.csv\n"
      << "role." << sc.ego.vehicle_id << " = ego\n"
      << "role." << sc.front.vehicle_id << " = front\n"
      << "role." << sc.rear.vehicle_id << " = rear\n"
      << "dt = " << format_double(sc.dt) << '\n'
      << "duration = " << format_double(sc.duration) << '\n';
    for (const auto& [name, field] : w99_fields()) s << "rear." << name << " = " << format_double(sc.rear_model.*field) << '\n';
    s << "rear.lc_trigger_gap = " << format_double(sc.rear_lc_trigger_gap) << '\n'
      << "rear.lc_duration = " << format_double(sc.rear_lc_duration) << '\n';
    for (const auto& [name, field] : acc_fields()) s << "acc." << name << " = " << format_double(sc.acc.*field) << '\n';
    write_text(d / (stem + ".scenario"), s.str());
}

}  // namespace lanecrit
