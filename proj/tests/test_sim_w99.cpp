#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "lanecrit/criticality.hpp"
#include "lanecrit/sim_w99.hpp"

using namespace lanecrit;

namespace {

Trajectory constant_speed(VehicleId id, double s0, double v, double span, double rate = 10.0, int lane = 0) {
    Trajectory tr;
    tr.vehicle_id = id;
    tr.recording = "w99";
    tr.rate = rate;
    const auto n = static_cast<std::size_t>(std::llround(span * rate));
    for (std::size_t k = 0; k <= n; ++k) {
        Sample s;
        s.t = static_cast<double>(k) / rate;
        s.s = s0 + v * s.t;
        s.v = v;
        s.lane = lane;
        tr.samples.push_back(s);
    }
    return tr;
}

ScenarioSpec follow_spec(double v_leader, double gap0, double v0, double span, double cc1 = 0.9) {
    ScenarioSpec spec;
    const double len = VehicleShape{}.length;
    spec.trajectories.push_back(constant_speed(1, 0.0, v0, span));
    spec.trajectories.push_back(constant_speed(2, gap0 + len, v_leader, span));
    spec.substituted_id = 1;
    spec.model.cc1 = cc1;
    spec.model.v_desired = std::max(v_leader, v0) + 5.0;
    return spec;
}

/// Mean bumper gap to the constant-speed leader over the final `window` seconds.
double mean_tail_gap(const Trajectory& ego, const Trajectory& leader, double window) {
    double sum = 0.0;
    int n = 0;
    for (const Sample& e : ego.samples) {
        if (e.t < ego.t_end() - window) continue;
        const auto r = replay_at(leader, e.t);
        sum += r->s - e.s - 0.5 * (leader.shape.length + ego.shape.length);
        ++n;
    }
    return sum / n;
}

const std::vector<double> kCc1Sweep{0.9, 0.7, 0.5, 0.3, 0.1};

}  // namespace

TEST(W99Params, DefaultsAreValid) { EXPECT_NO_THROW(W99Params{}.validate()); }

TEST(W99Params, InvariantsRejected) {
    W99Params p;
    p.cc0 = 0.0;
    EXPECT_THROW(p.validate(), Error);
    p = {};
    p.cc1 = -0.1;
    EXPECT_THROW(p.validate(), Error);
    p = {};
    p.cc8 = 0.0;
    EXPECT_THROW(p.validate(), Error);
    p = {};
    p.cc4 = 0.1;
    EXPECT_THROW(p.validate(), Error);
    p = {};
    p.cc5 = -0.1;
    EXPECT_THROW(p.validate(), Error);
}

TEST(W99Decide, FarLeaderGivesFreeAcceleration) {
    const W99Params p;
    const W99Decision d = w99_decide({0.0, 20.0}, W99Leader{260.0, 20.0}, p);
    EXPECT_EQ(d.regime, W99Regime::free);
    EXPECT_GT(d.accel, 0.0);
}

TEST(W99Decide, NoLeaderAcceleratesTowardDesiredSpeed) {
    const W99Params p;
    EXPECT_GT(w99_accel({0.0, 10.0}, std::nullopt, p), 0.0);
    EXPECT_LT(w99_accel({0.0, p.v_desired + 3.0}, std::nullopt, p), 0.0);
    EXPECT_DOUBLE_EQ(w99_accel({0.0, p.v_desired}, std::nullopt, p), 0.0);
}

TEST(W99Decide, EmergencyBelowStandstillGap) {
    const W99Params p;
    // net gap 1.0 m < cc0 while closing at 5 m/s
    const W99Decision d = w99_decide({0.0, 20.0}, W99Leader{5.5, 15.0}, p);
    EXPECT_EQ(d.regime, W99Regime::emergency);
    EXPECT_LE(d.accel, -2.0);
    EXPECT_NEAR(d.accel, -2.67557, 1e-5);
}

TEST(W99Decide, AccelerationClamped) {
    W99Params p;
    p.cc8 = 20.0;
    p.cc9 = 20.0;
    p.v_desired = 200.0;
    EXPECT_LE(w99_accel({0.0, 0.0}, std::nullopt, p), p.cc8 + p.cc9);
    const W99Params q;
    for (double dv : {1.0, 10.0, 30.0, 60.0}) {
        for (double gap : {0.1, 0.5, 1.4, 5.0, 20.0}) {
            const double a = w99_accel({0.0, 60.0}, W99Leader{gap + 4.5, 60.0 - dv}, q);
            EXPECT_GE(a, -8.0);
            EXPECT_LE(a, q.cc8 + q.cc9);
        }
    }
}

TEST(W99Simulate, AloneAtDesiredSpeedKeepsSpeed) {
    ScenarioSpec spec;
    spec.trajectories.push_back(constant_speed(1, 0.0, 27.0, 60.0));
    spec.substituted_id = 1;
    spec.model.v_desired = 27.0;
    const Trajectory out = simulate(spec);
    ASSERT_FALSE(out.empty());
    for (const Sample& s : out.samples) EXPECT_NEAR(s.v, 27.0, 1e-6);
}

TEST(W99Simulate, SubstitutedVehicleMustExist) {
    ScenarioSpec spec;
    spec.trajectories.push_back(constant_speed(1, 0.0, 27.0, 10.0));
    spec.substituted_id = 9;
    EXPECT_THROW((void)simulate(spec), Error);
}

TEST(W99Simulate, SteadyStateGapNearDesiredAtThirty) {
    const ScenarioSpec spec = follow_spec(30.0, 60.0, 30.0, 300.0);
    const Trajectory ego = simulate(spec);
    const double target = w99_desired_gap(spec.model, 30.0);
    EXPECT_NEAR(mean_tail_gap(ego, spec.trajectories[1], 100.0), target, 0.15 * target);
}

class W99SteadyState : public ::testing::TestWithParam<double> {};

TEST_P(W99SteadyState, GapWithinFifteenPercent) {
    const double v = GetParam();
    const ScenarioSpec spec = follow_spec(v, 80.0, v, 300.0);
    const Trajectory ego = simulate(spec);
    const double target = w99_desired_gap(spec.model, v);
    EXPECT_NEAR(mean_tail_gap(ego, spec.trajectories[1], 50.0), target, 0.15 * target) << "v = " << v;
}

INSTANTIATE_TEST_SUITE_P(LeaderSpeeds, W99SteadyState, ::testing::Values(15.0, 25.0, 35.0));

TEST(W99Simulate, FastFollowerConvergesBehindSlowerLeader) {
    const ScenarioSpec spec = follow_spec(25.0, 100.0, 35.0, 300.0);
    const Trajectory ego = simulate(spec);
    EXPECT_NEAR(ego.samples.back().v, 25.0, 1.0);
    const double target = w99_desired_gap(spec.model, 25.0);
    EXPECT_NEAR(mean_tail_gap(ego, spec.trajectories[1], 50.0), target, 0.15 * target);
    for (const Sample& s : ego.samples) {
        const auto r = replay_at(spec.trajectories[1], s.t);
        EXPECT_GT(r->s - s.s - 4.5, 0.0) << "collision at t = " << s.t;
    }
}

TEST(W99Simulate, StepHalvingIsStable) {
    ScenarioSpec spec = follow_spec(25.0, 100.0, 35.0, 60.0);
    spec.dt = 0.05;
    const Trajectory a = simulate(spec);
    spec.dt = 0.025;
    const Trajectory b = simulate(spec);
    ASSERT_EQ(b.size(), 2 * a.size() - 1);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.samples[i].s - b.samples[2 * i].s));
    EXPECT_LT(worst, 0.5);
}

TEST(W99Simulate, Deterministic) {
    const ScenarioSpec spec = follow_spec(25.0, 100.0, 35.0, 120.0);
    EXPECT_EQ(simulate(spec), simulate(spec));
    const ScenarioSpec fx = overtaking_fixture();
    EXPECT_EQ(simulate(fx), simulate(fx));
}

TEST(W99Simulate, SpeedNonNegativeAndClamped) {
    // leader stopped ahead: follower must brake to standstill
    ScenarioSpec spec = follow_spec(0.0, 80.0, 25.0, 60.0);
    const Trajectory ego = simulate(spec);
    for (const Sample& s : ego.samples) {
        EXPECT_GE(s.v, 0.0);
        EXPECT_GE(s.a_lon, -8.0);
        EXPECT_LE(s.a_lon, spec.model.cc8 + spec.model.cc9);
    }
    EXPECT_NEAR(ego.samples.back().v, 0.0, 1e-9);
    const double gap = spec.trajectories[1].samples.front().s - ego.samples.back().s - 4.5;
    EXPECT_GT(gap, 0.0);
}

TEST(W99Simulate, LowerCc1DoesNotWidenConvergedGap) {
    for (double v : {15.0, 25.0, 35.0}) {
        double prev = 1e300;
        for (double cc1 : kCc1Sweep) {
            const ScenarioSpec spec = follow_spec(v, 80.0, v, 300.0, cc1);
            const double gap = mean_tail_gap(simulate(spec), spec.trajectories[1], 50.0);
            EXPECT_LE(gap, prev + 1e-9) << "v = " << v << " cc1 = " << cc1;
            prev = gap;
        }
    }
}

TEST(W99Replay, InterpolatesBetweenSamples) {
    const Trajectory tr = constant_speed(5, 10.0, 20.0, 10.0, 2.0);
    const auto r = replay_at(tr, 1.25);
    ASSERT_TRUE(r);
    EXPECT_NEAR(r->s, 35.0, 1e-12);
    EXPECT_FALSE(replay_at(tr, -0.5));
    EXPECT_FALSE(replay_at(tr, 10.5));
}

TEST(SampleCc1, MinThwToOpp1NonIncreasing) {
    const ScenarioSpec spec = overtaking_fixture();
    const SampledScenarioSet set = sample_cc1(spec, kCc1Sweep, LaneLayout{});
    ASSERT_EQ(set.entries.size(), kCc1Sweep.size());
    double prev = 1e300;
    for (const SampledScenario& e : set.entries) {
        ASSERT_TRUE(e.min_thw.count(kFixtureOpp1)) << "cc1 = " << e.cc1;
        const double m = e.min_thw.at(kFixtureOpp1);
        EXPECT_LE(m, prev) << "cc1 = " << e.cc1;
        prev = m;
    }
    EXPECT_LT(set.entries.back().min_thw.at(kFixtureOpp1), set.entries.front().min_thw.at(kFixtureOpp1) - 0.3);
}

TEST(SampleCc1, Opp2ThwLargelyUnaffected) {
    const ScenarioSpec spec = overtaking_fixture();
    const SampledScenarioSet set = sample_cc1(spec, kCc1Sweep, LaneLayout{});
    const double ref = set.entries.front().min_thw.at(kFixtureOpp2);
    for (const SampledScenario& e : set.entries) {
        ASSERT_TRUE(e.min_thw.count(kFixtureOpp2));
        EXPECT_LT(std::abs(e.min_thw.at(kFixtureOpp2) - ref), 0.05 * ref) << "cc1 = " << e.cc1;
    }
}

TEST(SampleCc1, DefaultValueEqualsPlainSimulate) {
    const ScenarioSpec spec = overtaking_fixture();
    const std::vector<double> one{spec.model.cc1};
    const SampledScenarioSet set = sample_cc1(spec, one, LaneLayout{});
    ASSERT_EQ(set.entries.size(), 1u);
    EXPECT_EQ(set.entries[0].ego, simulate(spec));
    const Trajectory ego = simulate(spec);
    EXPECT_EQ(set.entries[0].traces, thw_traces(ego, spec.trajectories, LaneLayout{}));
}

TEST(SampleCc1, ParallelMatchesSerial) {
    const ScenarioSpec spec = overtaking_fixture();
    const SampledScenarioSet a = sample_cc1(spec, kCc1Sweep, LaneLayout{});
    const SampledScenarioSet b = sample_cc1_serial(spec, kCc1Sweep, LaneLayout{});
    ASSERT_EQ(a.entries.size(), b.entries.size());
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        EXPECT_EQ(a.entries[i].cc1, b.entries[i].cc1);
        EXPECT_EQ(a.entries[i].ego, b.entries[i].ego);
        EXPECT_EQ(a.entries[i].traces, b.entries[i].traces);
        EXPECT_EQ(a.entries[i].min_thw, b.entries[i].min_thw);
    }
}

TEST(SampleCc1, RejectsBadValues) {
    const ScenarioSpec spec = overtaking_fixture();
    const std::vector<double> empty;
    const std::vector<double> bad{0.5, 0.0};
    EXPECT_THROW((void)sample_cc1(spec, empty, LaneLayout{}), Error);
    EXPECT_THROW((void)sample_cc1(spec, bad, LaneLayout{}), Error);
}

TEST(ThwTraces, MatchesCriticalityThw) {
    const ScenarioSpec spec = overtaking_fixture();
    const Trajectory ego = simulate(spec);
    const LaneLayout layout;
    const auto traces = thw_traces(ego, spec.trajectories, layout);
    ASSERT_FALSE(traces.empty());
    const Trajectory& opp1 = spec.trajectories[2];
    ASSERT_EQ(opp1.vehicle_id, kFixtureOpp1);
    for (const ThwPoint& p : traces) {
        if (p.opponent_id != kFixtureOpp1) continue;
        const auto e = replay_at(ego, p.t);
        const auto o = replay_at(opp1, p.t);
        const double gap = o->s - e->s - 4.5;
        EXPECT_NEAR(p.thw, gap / e->v, 1e-9);
    }
}
