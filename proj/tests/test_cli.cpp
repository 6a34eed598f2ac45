#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lanecrit/cli.hpp"
#include "lanecrit/io.hpp"

using namespace lanecrit;
namespace fs = std::filesystem;

namespace {

std::string read_all(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> lines(const fs::path& p) {
    std::istringstream in(read_all(p));
    std::vector<std::string> out;
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "lanecrit");
    return run_cli(args);
}

class Cli : public ::testing::Test {
protected:
    static fs::path root;

    static void SetUpTestSuite() {
        root = fs::temp_directory_path() / "lanecrit_test_cli";
        fs::remove_all(root);
        fs::create_directories(root);
        ASSERT_EQ(run({"--out", (root / "corpus").string(), "--seed", "7", "synth", "--n", "30"}), 0);
        ASSERT_EQ(run({"--out", (root / "ovt").string(), "synth", "--fixture", "overtaking"}), 0);
        ASSERT_EQ(run({"--out", (root / "mis").string(), "synth", "--fixture", "mis"}), 0);
    }

    static std::string corpus() { return (root / "corpus" / "trajectories.csv").string(); }
    static std::string out(const std::string& name) { return (root / name).string(); }
};

fs::path Cli::root;

}  // namespace

TEST_F(Cli, SynthWritesCorpusAndTruth) {
    EXPECT_TRUE(fs::exists(root / "corpus" / "trajectories.csv"));
    const auto truth = lines(root / "corpus" / "ground_truth.csv");
    ASSERT_FALSE(truth.empty());
    EXPECT_EQ(truth[0], "vehicle_id,t_mid,direction,duration,v_mid");
    EXPECT_GT(truth.size(), 1u);
    EXPECT_TRUE(fs::exists(root / "ovt" / "overtaking.scenario"));
    EXPECT_TRUE(fs::exists(root / "mis" / "mis.scenario"));
}

TEST_F(Cli, SynthIsDeterministic) {
    ASSERT_EQ(run({"--out", out("det_a"), "--seed", "7", "synth", "--n", "200"}), 0);
    ASSERT_EQ(run({"--out", out("det_b"), "--seed", "7", "synth", "--n", "200"}), 0);
    for (const char* f : {"trajectories.csv", "ground_truth.csv"})
        EXPECT_EQ(read_all(root / "det_a" / f), read_all(root / "det_b" / f)) << f;
    ASSERT_EQ(run({"--out", out("det_c"), "--seed", "8", "synth", "--n", "200"}), 0);
    EXPECT_NE(read_all(root / "det_a" / "trajectories.csv"), read_all(root / "det_c" / "trajectories.csv"));
}

TEST_F(Cli, DetectWritesPerCriterionRows) {
    ASSERT_EQ(run({"--out", out("detect"), "detect", "--input", corpus()}), 0);
    const auto rows = lines(root / "detect" / "events.csv");
    ASSERT_GT(rows.size(), 1u);
    EXPECT_EQ(rows[0], std::string(kEventsHeader) + ",truncated");
    std::set<std::string> criteria;
    for (std::size_t i = 1; i < rows.size(); ++i) criteria.insert(split_csv(rows[i])[1]);
    EXPECT_EQ(criteria, (std::set<std::string>{"gradient", "distance", "peak"}));
    EXPECT_TRUE(fs::exists(root / "detect" / "detect_summary.json"));
    std::istringstream in(read_all(root / "detect" / "events.csv"));
    EXPECT_NO_THROW((void)read_events_csv(in, "events.csv"));
}

TEST_F(Cli, DetectHonoursCriteriaOverride) {
    ASSERT_EQ(run({"--out", out("detect_peak"), "--set", "detect.criteria=peak", "detect", "--input", corpus()}), 0);
    const auto rows = lines(root / "detect_peak" / "events.csv");
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(split_csv(rows[i])[1], "peak");
}

TEST_F(Cli, StatsHasSummaryShape) {
    ASSERT_EQ(run({"--out", out("stats"), "stats", "--input", corpus()}), 0);
    const auto rows = lines(root / "stats" / "stats.csv");
    ASSERT_GT(rows.size(), 2u);
    EXPECT_EQ(rows[0], "class,direction,quantity,n,mean,median,q25,q75,whisker_low,whisker_high,outliers");
    bool saw_all_duration = false;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto f = split_csv(rows[i]);
        ASSERT_EQ(f.size(), 11u);
        const double q25 = std::stod(f[6]), med = std::stod(f[5]), q75 = std::stod(f[7]);
        const double wl = std::stod(f[8]), wh = std::stod(f[9]);
        EXPECT_LE(wl, q25);
        EXPECT_LE(q25, med);
        EXPECT_LE(med, q75);
        EXPECT_LE(q75, wh);
        if (f[0] == "all" && f[1] == "all" && f[2] == "duration") saw_all_duration = true;
    }
    EXPECT_TRUE(saw_all_duration);
    EXPECT_NE(read_all(root / "stats" / "stats.json").find("\"schema\": 1"), std::string::npos);
}

TEST_F(Cli, StatsAcceptsEventsFile) {
    ASSERT_EQ(run({"--out", out("stats_ev_detect"), "detect", "--input", corpus()}), 0);
    ASSERT_EQ(run({"--out", out("stats_ev"), "stats", "--input", corpus(), "--events",
                   out("stats_ev_detect") + "/events.csv"}),
              0);
    ASSERT_EQ(run({"--out", out("stats_internal"), "stats", "--input", corpus()}), 0);
    // durations pass through the 9-digit events CSV, so compare numerically
    const auto a = lines(root / "stats_ev" / "stats.csv");
    const auto b = lines(root / "stats_internal" / "stats.csv");
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 1; i < a.size(); ++i) {
        const auto fa = split_csv(a[i]), fb = split_csv(b[i]);
        ASSERT_EQ(fa.size(), fb.size());
        for (std::size_t k = 0; k < 4; ++k) EXPECT_EQ(fa[k], fb[k]);
        for (std::size_t k = 4; k < 10; ++k) EXPECT_NEAR(std::stod(fa[k]), std::stod(fb[k]), 1e-6 * std::abs(std::stod(fb[k])));
        EXPECT_EQ(fa[10], fb[10]);
    }
}

TEST_F(Cli, RobustnessWritesReport) {
    ASSERT_EQ(run({"--out", out("robust"), "--set", "robustness.brownian_grid=0,0.05", "robustness", "--input",
                   corpus()}),
              0);
    const auto rows = lines(root / "robust" / "robustness.csv");
    ASSERT_GT(rows.size(), 1u);
    EXPECT_EQ(rows[0], "criterion,kind,magnitude,detected,truth,ratio");
    EXPECT_TRUE(fs::exists(root / "robust" / "robustness_plot.json"));
}

TEST_F(Cli, CriticalityWritesRecords) {
    ASSERT_EQ(run({"--out", out("crit"), "criticality", "--input", corpus()}), 0);
    const auto rows = lines(root / "crit" / "criticality.csv");
    ASSERT_GT(rows.size(), 1u);
    EXPECT_EQ(rows[0].rfind("vehicle_id,recording,class,direction", 0), 0u);
    EXPECT_TRUE(fs::exists(root / "crit" / "criticality_histograms.json"));
    EXPECT_TRUE(fs::exists(root / "crit" / "criticality_direction.json"));
}

TEST_F(Cli, SampleWritesTracesPerCc1) {
    ASSERT_EQ(run({"--out", out("sample"), "sample", "--scenario", (root / "ovt" / "overtaking.scenario").string()}),
              0);
    const auto rows = lines(root / "sample" / "thw_traces.csv");
    ASSERT_GT(rows.size(), 1u);
    EXPECT_EQ(rows[0], "t,opponent_id,thw,cc1");
    for (int i = 0; i < 5; ++i) EXPECT_TRUE(fs::exists(root / "sample" / ("sampled_" + std::to_string(i) + ".csv")));
    EXPECT_TRUE(fs::exists(root / "sample" / "sample_summary.json"));
}

TEST_F(Cli, MisEvalWritesFourRuns) {
    ASSERT_EQ(run({"--out", out("mis_eval"), "mis-eval", "--scenario", (root / "mis" / "mis.scenario").string()}), 0);
    const std::string rep = read_all(root / "mis_eval" / "mis_report.json");
    for (const char* k : {"\"mis_on\"", "\"mis_off\"", "\"mis_on_front_brake\"", "\"mis_off_front_brake\""})
        EXPECT_NE(rep.find(k), std::string::npos) << k;
    EXPECT_NE(rep.find("\"schema\": 1"), std::string::npos);
}

TEST_F(Cli, ConfigFileAndSeedOverride) {
    const fs::path cfg = root / "run.cfg";
    std::ofstream(cfg) << "seed = 99\nsynth.n = 5\n";
    ASSERT_EQ(run({"--config", cfg.string(), "--out", out("cfg_a"), "synth"}), 0);
    ASSERT_EQ(run({"--config", cfg.string(), "--out", out("cfg_b"), "--seed", "99", "synth"}), 0);
    EXPECT_EQ(read_all(root / "cfg_a" / "trajectories.csv"), read_all(root / "cfg_b" / "trajectories.csv"));
    std::set<std::string> ids;
    const auto rows = lines(root / "cfg_a" / "trajectories.csv");
    for (std::size_t i = 1; i < rows.size(); ++i) ids.insert(split_csv(rows[i])[0]);
    EXPECT_EQ(ids.size(), 5u);
}

TEST_F(Cli, ErrorsExitNonzero) {
    EXPECT_NE(run({}), 0);
    EXPECT_NE(run({"nonsense"}), 0);
    EXPECT_NE(run({"--out", out("err"), "detect", "--input", (root / "missing.csv").string()}), 0);
    EXPECT_NE(run({"--out", out("err"), "--set", "no.such=1", "synth"}), 0);
    EXPECT_NE(run({"--out", out("err"), "--set", "seed", "synth"}), 0);
    EXPECT_NE(run({"--out", out("err"), "synth", "--fixture", "bogus"}), 0);
    const fs::path bad = root / "bad.csv";
    std::ofstream(bad) << "not,a,header\n";
    EXPECT_NE(run({"--out", out("err"), "detect", "--input", bad.string()}), 0);
    EXPECT_NE(run({"--out", out("err"), "criticality", "--input", corpus(), "--criterion", "sideways"}), 0);
}
