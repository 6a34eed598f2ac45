#include "lanecrit/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "lanecrit/config.hpp"
#include "lanecrit/criticality.hpp"
#include "lanecrit/io.hpp"
#include "lanecrit/lc_detect.hpp"
#include "lanecrit/mis.hpp"
#include "lanecrit/robustness.hpp"
#include "lanecrit/sim_w99.hpp"
#include "lanecrit/stats.hpp"
#include "lanecrit/synth.hpp"

namespace lanecrit {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Globals {
    std::string config;
    std::string out = ".";
    std::optional<long long> seed;
    std::vector<std::string> overrides;
};

RunConfig resolve_config(const Globals& g) {
    RunConfig cfg = g.config.empty() ? RunConfig{} : load_config(g.config);
    for (const std::string& kv : g.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (g.seed) {
        if (*g.seed < 0) throw Error("--seed must be >= 0");
        cfg.seed = static_cast<std::uint64_t>(*g.seed);
    }
    cfg.synth.seed = cfg.seed;
    cfg.synth.layout = cfg.layout;
    cfg.validate();
    return cfg;
}

fs::path out_dir(const Globals& g) {
    fs::path d(g.out);
    fs::create_directories(d);
    return d;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write '" + p.string() + "'");
    out << text;
    if (!out) throw Error("write failed for '" + p.string() + "'");
}

void write_json(const fs::path& p, json j) {
    json doc;
    doc["schema"] = 1;
    for (auto& [k, v] : j.items()) doc[k] = v;
    write_file(p, doc.dump(2) + "\n");
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json box_json(const BoxStats& b) {
    return json{{"n", b.n},           {"mean", b.mean},
                {"median", b.median}, {"q25", b.q25},
                {"q75", b.q75},       {"whisker_low", b.whisker_low},
                {"whisker_high", b.whisker_high}, {"min", b.min},
                {"max", b.max},       {"outliers", b.outliers}};
}

std::vector<Trajectory> load_corpus(const std::string& path) {
    IngestResult r = ingest_file(path);
    for (const std::string& m : r.diagnostics.messages) std::cerr << "warning: " << m << '\n';
    for (const std::string& w : r.diagnostics.warnings) std::cerr << "warning: " << w << '\n';
    return std::move(r.trajectories);
}

std::vector<Trajectory> prepared_corpus(const std::string& path, const RunConfig& cfg) {
    const auto raw = load_corpus(path);
    return preprocess(raw, cfg.resample_rate, cfg.lowpass ? cfg.lowpass_cutoff : 0.0, cfg.layout);
}

bool all_have_markings(const std::vector<Trajectory>& corpus) {
    return std::all_of(corpus.begin(), corpus.end(), [](const Trajectory& t) { return t.has_marking_distances(); });
}

std::vector<LaneChangeEvent> events_for(const std::vector<Trajectory>& corpus, const std::string& events_path,
                                        Criterion criterion, const RunConfig& cfg) {
    if (events_path.empty()) return detect_all(corpus, criterion, cfg.layout, cfg.detect);
    std::ifstream in(events_path);
    if (!in) throw Error("cannot open '" + events_path + "'");
    std::vector<LaneChangeEvent> out;
    for (const LaneChangeEvent& e : read_events_csv(in, events_path))
        if (e.criterion == criterion) out.push_back(e);
    return out;
}

// ---- subcommands -----------------------------------------------------------

void cmd_synth(const Globals& g, std::optional<int> n, const std::string& fixture) {
    RunConfig cfg = resolve_config(g);
    const fs::path dir = out_dir(g);
    if (fixture == "corpus") {
        if (n) cfg.synth.n = *n;
        const SyntheticCorpus c = synthesize(cfg.synth);
        std::ostringstream t, gt;
        write_trajectories_csv(t, c.trajectories);
        write_ground_truth_csv(gt, c.truth);
        write_file(dir / "trajectories.csv", t.str());
        write_file(dir / "ground_truth.csv", gt.str());
    } else if (fixture == "overtaking") {
        write_scenario(dir.string(), "overtaking", overtaking_fixture());
    } else if (fixture == "mis") {
        write_mis_scenario(dir.string(), "mis", mis_fixture());
    } else {
        throw Error("unknown fixture '" + fixture + "' (corpus, overtaking, mis)");
    }
}

void cmd_detect(const Globals& g, const std::string& input) {
    const RunConfig cfg = resolve_config(g);
    const auto corpus = prepared_corpus(input, cfg);
    const bool markings = all_have_markings(corpus);
    std::vector<LaneChangeEvent> all;
    json counts = json::object();
    for (Criterion c : cfg.criteria) {
        if (c == Criterion::gradient && !markings) {
            std::cerr << "warning: gradient criterion unavailable (corpus without lane-marking distances), skipped\n";
            continue;
        }
        const auto ev = detect_all(corpus, c, cfg.layout, cfg.detect);
        std::size_t single = 0, dbl = 0, trunc = 0;
        for (const auto& e : ev) {
            (e.kind == EventKind::single ? single : dbl) += 1;
            trunc += e.truncated ? 1 : 0;
        }
        counts[to_string(c)] = {{"events", ev.size()}, {"single", single}, {"double", dbl}, {"truncated", trunc}};
        all.insert(all.end(), ev.begin(), ev.end());
    }
    const fs::path dir = out_dir(g);
    std::ostringstream csv;
    write_events_csv(csv, all);
    write_file(dir / "events.csv", csv.str());
    write_json(dir / "detect_summary.json", {{"trajectories", corpus.size()}, {"criteria", counts}});
}

void cmd_robustness(const Globals& g, const std::string& input) {
    const RunConfig cfg = resolve_config(g);
    SweepConfig sc;
    sc.layout = cfg.layout;
    sc.detect = cfg.detect;
    sc.rate = cfg.resample_rate;
    sc.cutoff = cfg.lowpass_cutoff;
    sc.refilter = cfg.robustness_refilter;
    sc.min_extent = cfg.robustness_min_extent;
    const auto raw = load_corpus(input);
    const auto prepared = prepare_corpus(raw, sc);
    const std::size_t truth = gradient_ground_truth(prepared, sc);

    std::vector<Perturbation> bias, brown;
    for (double b : cfg.bias_grid) bias.push_back({PerturbationKind::bias, b, 0});
    for (double s : cfg.brownian_grid) brown.push_back({PerturbationKind::brownian, s, cfg.seed});

    std::vector<RobustnessReport> reports;
    json series = json::array();
    for (Criterion c : cfg.robustness_criteria) {
        for (const auto* grid : {&bias, &brown}) {
            RobustnessReport r = sweep(prepared, c, *grid, sc, truth);
            json xs = json::array(), ys = json::array();
            for (const auto& row : r.rows) {
                xs.push_back(row.perturbation.magnitude);
                ys.push_back(row.detected);
            }
            series.push_back({{"criterion", to_string(c)},
                              {"kind", to_string(grid->front().kind)},
                              {"x", xs},
                              {"y", ys}});
            reports.push_back(std::move(r));
        }
    }
    const fs::path dir = out_dir(g);
    std::ostringstream csv;
    write_robustness_csv(csv, reports);
    write_file(dir / "robustness.csv", csv.str());
    write_json(dir / "robustness_plot.json", {{"ground_truth", truth},
                                              {"refilter", sc.refilter},
                                              {"seed", cfg.seed},
                                              {"series", series}});
}

void cmd_criticality(const Globals& g, const std::string& input, const std::string& events_path,
                     const std::string& criterion) {
    const RunConfig cfg = resolve_config(g);
    const auto corpus = prepared_corpus(input, cfg);
    const auto events = events_for(corpus, events_path, criterion_from_string(criterion), cfg);
    const auto records = evaluate_events(corpus, events, cfg.layout, cfg.thresholds);

    json hist = json::array();
    for (Metric m : kAllMetrics) {
        const MetricHistogram h =
            metric_histogram(records, m, static_cast<std::size_t>(cfg.histogram_bins), cfg.thresholds, cfg.layout.v_lim);
        hist.push_back({{"metric", to_string(m)},
                        {"aggregate", h.critical_below ? "min" : "max"},
                        {"defined", h.defined},
                        {"threshold", h.threshold},
                        {"critical_below", h.critical_below},
                        {"edges", h.hist.edges},
                        {"counts", h.hist.counts}});
    }
    const DirectionStats ds = direction_stats(records);
    for (const std::string& w : ds.warnings) std::cerr << "warning: " << w << '\n';
    json boxes = json::array();
    for (const DirectionStat& st : ds.stats) {
        json per = json::array();
        for (const RecordingShare& r : st.per_recording)
            per.push_back({{"recording", r.recording}, {"events", r.events}, {"flagged", r.flagged}, {"percent", r.percent}});
        boxes.push_back({{"metric", to_string(st.metric)},
                         {"direction", to_string(st.direction)},
                         {"per_recording", per},
                         {"summary", box_json(st.summary)}});
    }
    const fs::path dir = out_dir(g);
    std::ostringstream csv;
    write_criticality_csv(csv, records);
    write_file(dir / "criticality.csv", csv.str());
    write_json(dir / "criticality_histograms.json", {{"events", records.size()}, {"histograms", hist}});
    write_json(dir / "criticality_direction.json", {{"warnings", ds.warnings}, {"boxes", boxes}});
}

void cmd_sample(const Globals& g, const std::string& scenario) {
    const RunConfig cfg = resolve_config(g);
    const ScenarioSpec spec = load_scenario(scenario, cfg);
    const SampledScenarioSet set = sample_cc1(spec, cfg.cc1_values, cfg.layout);
    const fs::path dir = out_dir(g);
    std::ostringstream traces;
    write_thw_traces_csv(traces, set);
    write_file(dir / "thw_traces.csv", traces.str());
    json entries = json::array();
    for (std::size_t i = 0; i < set.entries.size(); ++i) {
        const SampledScenario& e = set.entries[i];
        const std::string name = "sampled_" + std::to_string(i) + ".csv";
        std::ostringstream csv;
        write_trajectories_csv(csv, std::span<const Trajectory>(&e.ego, 1));
        write_file(dir / name, csv.str());
        json mins = json::object();
        for (const auto& [id, v] : e.min_thw) mins[std::to_string(id)] = v;
        entries.push_back({{"cc1", e.cc1}, {"trajectory", name}, {"min_thw", mins}});
    }
    write_json(dir / "sample_summary.json", {{"substituted_id", spec.substituted_id}, {"entries", entries}});
}

json report_json(const MISEvalReport& r) {
    json trace = json::array();
    for (const MISTracePoint& p : r.trace)
        trace.push_back({{"t", p.t},
                         {"mode", to_string(p.mode)},
                         {"ego_v", p.ego_v},
                         {"ego_a", p.ego_a},
                         {"commanded_decel", p.commanded_decel},
                         {"front_thw", opt(p.front_thw)},
                         {"rear_thw", opt(p.rear_thw)},
                         {"rear_gap", opt(p.rear_gap)},
                         {"rear_lateral", p.rear_lateral}});
    return {{"mis_enabled", r.mis_enabled},
            {"engaged", r.engaged},
            {"engagement_time", opt(r.engagement_time)},
            {"engagement_rear_gap", opt(r.engagement_rear_gap)},
            {"engagement_closing_speed", opt(r.engagement_closing_speed)},
            {"planned_decel", r.planned_decel},
            {"initial_front_thw", r.initial_front_thw},
            {"target_front_thw", r.target_front_thw},
            {"target_reached_time", opt(r.target_reached_time)},
            {"rear_within_5m_time", opt(r.rear_within_5m_time)},
            {"cutin_start", opt(r.cutin_start)},
            {"cutin_end", opt(r.cutin_end)},
            {"braked_in_cutin_window", r.braked_in_cutin_window},
            {"max_brake_in_cutin_window", r.max_brake_in_cutin_window},
            {"front_brake_time", opt(r.front_brake_time)},
            {"min_rear_gap", opt(r.min_rear_gap)},
            {"min_distance", r.min_distance},
            {"rear_gap_violation", r.rear_gap_violation},
            {"collision", r.collision},
            {"trace", trace}};
}

void cmd_mis_eval(const Globals& g, const std::string& scenario) {
    const RunConfig cfg = resolve_config(g);
    const MISScenario sc = load_mis_scenario(scenario, cfg);
    const FrontBrake brake{cfg.mis_brake_time, cfg.mis_brake_decel, cfg.mis_brake_relative};
    json runs = json::object();
    runs["mis_on"] = report_json(run_closed_loop(sc, cfg.mis, true, std::nullopt, cfg.mis_rear_gap_min));
    runs["mis_off"] = report_json(run_closed_loop(sc, cfg.mis, false, std::nullopt, cfg.mis_rear_gap_min));
    runs["mis_on_front_brake"] = report_json(run_closed_loop(sc, cfg.mis, true, brake, cfg.mis_rear_gap_min));
    runs["mis_off_front_brake"] = report_json(run_closed_loop(sc, cfg.mis, false, brake, cfg.mis_rear_gap_min));
    write_json(out_dir(g) / "mis_report.json",
               {{"front_brake", {{"t", brake.t}, {"decel", brake.decel}, {"relative_to_rear_lc", brake.relative_to_rear_lc}}},
                {"runs", runs}});
}

void cmd_stats(const Globals& g, const std::string& input, const std::string& events_path,
               const std::string& criterion) {
    const RunConfig cfg = resolve_config(g);
    const auto corpus = prepared_corpus(input, cfg);
    const auto events = events_for(corpus, events_path, criterion_from_string(criterion), cfg);
    std::map<VehicleId, VehicleClass> cls;
    for (const Trajectory& t : corpus) cls[t.vehicle_id] = t.shape.cls;

    json groups = json::array();
    std::ostringstream csv;
    csv << "class,direction,quantity,n,mean,median,q25,q75,whisker_low,whisker_high,outliers\n";
    std::size_t excluded = 0;
    for (const LaneChangeEvent& e : events) excluded += counts_for_statistics(e) ? 0 : 1;
    for (const char* c : {"all", "car", "truck"}) {
        for (const char* d : {"all", "left", "right"}) {
            std::vector<double> dur, speed;
            for (const LaneChangeEvent& e : events) {
                if (!counts_for_statistics(e)) continue;
                const auto it = cls.find(e.vehicle_id);
                if (it == cls.end()) throw Error("event references unknown vehicle " + std::to_string(e.vehicle_id));
                if (std::string(c) != "all" && to_string(it->second) != std::string(c)) continue;
                if (std::string(d) != "all" && to_string(e.direction) != std::string(d)) continue;
                dur.push_back(e.duration);
                speed.push_back(e.v_mid);
            }
            if (dur.empty()) {
                std::cerr << "warning: no lane changes for class " << c << ", direction " << d << '\n';
                continue;
            }
            const BoxStats bd = box_stats(dur, cfg.whisker_factor);
            const BoxStats bs = box_stats(speed, cfg.whisker_factor);
            groups.push_back({{"class", c}, {"direction", d}, {"duration", box_json(bd)}, {"speed", box_json(bs)}});
            for (const auto& [name, b] : {std::pair{"duration", bd}, std::pair{"speed", bs}}) {
                csv << c << ',' << d << ',' << name << ',' << b.n << ',' << format_double(b.mean) << ','
                    << format_double(b.median) << ',' << format_double(b.q25) << ',' << format_double(b.q75) << ','
                    << format_double(b.whisker_low) << ',' << format_double(b.whisker_high) << ','
                    << b.outliers.size() << '\n';
            }
        }
    }
    const fs::path dir = out_dir(g);
    write_file(dir / "stats.csv", csv.str());
    write_json(dir / "stats.json", {{"criterion", criterion},
                                    {"events", events.size()},
                                    {"excluded_double_or_truncated", excluded},
                                    {"groups", groups}});
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Lane-change extraction, criticality metrics and scenario sampling for highway trajectories"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--out", g.out, "output directory")->capture_default_str();
    app.add_option("--seed", g.seed, "random seed (overrides the 'seed' key)");
    app.add_option("--set", g.overrides, "override a configuration key, key=value (repeatable)");

    std::optional<int> synth_n;
    std::string fixture = "corpus";
    auto* synth = app.add_subcommand("synth", "generate the synthetic lane-change corpus or a scenario fixture");
    synth->add_option("--n", synth_n, "number of vehicles");
    synth->add_option("--fixture", fixture, "corpus | overtaking | mis")->capture_default_str();

    std::string input, events, scenario, criterion = "peak";
    auto* detect = app.add_subcommand("detect", "detect lane changes with the configured criteria");
    detect->add_option("--input", input, "trajectory CSV")->required()->check(CLI::ExistingFile);

    auto* robust = app.add_subcommand("robustness", "bias / Brownian-noise sweep against gradient ground truth");
    robust->add_option("--input", input, "trajectory CSV with lane-marking distances")->required()->check(CLI::ExistingFile);

    auto* crit = app.add_subcommand("criticality", "worst-case criticality metrics per lane change");
    crit->add_option("--input", input, "trajectory CSV")->required()->check(CLI::ExistingFile);
    crit->add_option("--events", events, "events CSV (default: detect internally)")->check(CLI::ExistingFile);
    crit->add_option("--criterion", criterion, "criterion whose events are evaluated")->capture_default_str();

    auto* sample = app.add_subcommand("sample", "cc1 sampling of a Wiedemann99 substitution scenario");
    sample->add_option("--scenario", scenario, "scenario file")->required()->check(CLI::ExistingFile);

    auto* mis = app.add_subcommand("mis-eval", "closed-loop margin increase system evaluation");
    mis->add_option("--scenario", scenario, "scenario file with role tags")->required()->check(CLI::ExistingFile);

    auto* stats = app.add_subcommand("stats", "duration and speed summaries per class and direction");
    stats->add_option("--input", input, "trajectory CSV")->required()->check(CLI::ExistingFile);
    stats->add_option("--events", events, "events CSV (default: detect internally)")->check(CLI::ExistingFile);
    stats->add_option("--criterion", criterion, "criterion whose events are summarised")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*synth) cmd_synth(g, synth_n, fixture);
        else if (*detect) cmd_detect(g, input);
        else if (*robust) cmd_robustness(g, input);
        else if (*crit) cmd_criticality(g, input, events, criterion);
        else if (*sample) cmd_sample(g, scenario);
        else if (*mis) cmd_mis_eval(g, scenario);
        else if (*stats) cmd_stats(g, input, events, criterion);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

int run_cli(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace lanecrit
