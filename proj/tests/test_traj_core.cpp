#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "lanecrit/traj_core.hpp"

using namespace lanecrit;
using lanecrit::testing::from_lateral;

namespace {

constexpr double kPi = std::numbers::pi;

// Amplitude of a sinusoid over the middle half of a filtered record.
double mid_amplitude(const std::vector<double>& x) {
    double m = 0.0;
    for (std::size_t i = x.size() / 4; i < 3 * x.size() / 4; ++i) m = std::max(m, std::abs(x[i]));
    return m;
}

std::vector<double> sine(double f, double rate, double seconds) {
    std::vector<double> x;
    for (std::size_t k = 0; k < static_cast<std::size_t>(seconds * rate); ++k)
        x.push_back(std::sin(2.0 * kPi * f * static_cast<double>(k) / rate));
    return x;
}

// Zero-phase magnitude of a forward-backward second-order Butterworth with
// bilinear pre-warping: |H|^2 = 1 / (1 + (tan(pi f/fs) / tan(pi fc/fs))^4).
double butter2_zero_phase_gain(double f, double fc, double fs) {
    const double r = std::tan(kPi * f / fs) / std::tan(kPi * fc / fs);
    return 1.0 / (1.0 + std::pow(r, 4));
}

Trajectory ramp_lat(double rate) {
    return from_lateral(1, rate, 10.0, 20.0, [](double t) { return 3.5 + 0.1 * t; });
}

}  // namespace

TEST(SnapLateral, LatticeDifferencesAreExact) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = snap_lateral(u(rng));
        const double b = snap_lateral(u(rng));
        const double c = snap_lateral(u(rng));
        EXPECT_EQ((a + c) - (b + c), a - b);
    }
}

TEST(Resample, OutputOnTargetGrid) {
    const Trajectory tr = from_lateral(1, 25.0, 30.0, 30.0, [](double t) { return 3.5 + 0.3 * std::sin(t); });
    const Trajectory r = resample(tr, 5.0);
    EXPECT_EQ(r.rate, 5.0);
    ASSERT_EQ(r.size(), 151u);
    for (std::size_t k = 0; k < r.size(); ++k) EXPECT_DOUBLE_EQ(r.samples[k].t, static_cast<double>(k) * 0.2);
}

TEST(Resample, IdentityAtMatchingRate) {
    const Trajectory tr = from_lateral(1, 5.0, 30.0, 30.0, [](double t) { return 3.5 + 0.3 * std::sin(t); });
    const Trajectory r = resample(tr, 5.0);
    ASSERT_EQ(r.size(), tr.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
        EXPECT_DOUBLE_EQ(r.samples[k].t, tr.samples[k].t);
        EXPECT_EQ(r.samples[k].lat, tr.samples[k].lat);
        EXPECT_EQ(r.samples[k].s, tr.samples[k].s);
    }
    EXPECT_EQ(resample(r, 5.0), r);
}

TEST(Resample, LinearSignalIsInterpolationExact) {
    const Trajectory r = resample(ramp_lat(100.0), 5.0);
    EXPECT_NEAR(r.samples[5].t, 1.0, 1e-12);
    EXPECT_NEAR(r.samples[5].lat, 0.1, 1e-6);  // lattice rounding only
}

TEST(Resample, RejectsBadInput) {
    Trajectory tr = ramp_lat(5.0);
    tr.samples[3].t = tr.samples[2].t;
    EXPECT_THROW((void)resample(tr, 5.0), Error);
    Trajectory one = ramp_lat(5.0);
    one.samples.resize(1);
    EXPECT_THROW((void)resample(one, 5.0), Error);
    EXPECT_THROW((void)resample(ramp_lat(5.0), 0.0), Error);
}

TEST(Resample, LaneSwitchTakesNearerSample) {
    // y crosses the lane boundary between samples; lat must never be a blend across lanes
    const Trajectory tr = from_lateral(1, 3.0, 10.0, 20.0, [](double t) { return 3.5 + 0.35 * t; });
    const Trajectory r = resample(tr, 5.0);
    for (const Sample& s : r.samples) EXPECT_LE(std::abs(s.lat), 1.75 + 0.35 / 3.0);
}

TEST(Lowpass, DcPasses) {
    const Trajectory tr = from_lateral(1, 5.0, 30.0, 30.0, [](double) { return 3.5 + 0.4; });
    const Trajectory f = lowpass(tr, 1.3, {});
    for (const Sample& s : f.samples) EXPECT_NEAR(s.lat, 0.4, 1e-6);
}

TEST(Lowpass, ThreeHertzAttenuated) {
    const Trajectory tr = from_lateral(1, 25.0, 40.0, 30.0, [](double t) { return 3.5 + 0.4 * std::sin(2 * kPi * 3.0 * t); });
    const Trajectory f = lowpass(tr, 1.3, {});
    std::vector<double> lat;
    for (const Sample& s : f.samples) lat.push_back(s.lat);
    EXPECT_LT(mid_amplitude(lat), 0.1 * 0.4);
}

TEST(Lowpass, SlowSignalPreserved) {
    const Trajectory tr = from_lateral(1, 5.0, 60.0, 30.0, [](double t) { return 3.5 + 0.4 * std::sin(2 * kPi * 0.2 * t); });
    const Trajectory f = lowpass(tr, 1.3, {});
    std::vector<double> lat;
    for (const Sample& s : f.samples) lat.push_back(s.lat);
    EXPECT_NEAR(mid_amplitude(lat), 0.4, 0.05 * 0.4);
}

TEST(Lowpass, NyquistCutoffRejected) {
    const Trajectory tr = from_lateral(1, 5.0, 10.0, 30.0, [](double) { return 3.5; });
    EXPECT_THROW((void)lowpass(tr, 2.5, {}), Error);
}

TEST(FiltfiltButter2, MatchesAnalyticZeroPhaseGain) {
    const double fs = 25.0, fc = 1.3;
    for (double f : {0.1, 0.5, 1.0, 1.3, 2.0, 3.0, 5.0}) {
        const auto x = sine(f, fs, 200.0);
        const auto y = filtfilt_butter2(x, fc, fs);
        EXPECT_NEAR(mid_amplitude(y), butter2_zero_phase_gain(f, fc, fs), 0.01) << "f=" << f;
    }
}

TEST(FiltfiltButter2, ZeroPhase) {
    const double fs = 25.0;
    const auto x = sine(0.5, fs, 40.0);
    const auto y = filtfilt_butter2(x, 1.3, fs);
    // zero crossings stay where they were
    for (std::size_t k = 200; k < 800; k += 25) EXPECT_NEAR(y[k], x[k] * butter2_zero_phase_gain(0.5, 1.3, fs), 1e-3);
}

TEST(FiltfiltButter2, SecondPassNeverAmplifies) {
    const double fs = 25.0;
    for (double f : {0.2, 0.8, 1.3, 2.5, 4.0}) {
        const auto once = filtfilt_butter2(sine(f, fs, 100.0), 1.3, fs);
        const auto twice = filtfilt_butter2(once, 1.3, fs);
        EXPECT_LE(mid_amplitude(twice), mid_amplitude(once) + 1e-9) << "f=" << f;
    }
}

TEST(ContinuousLateral, Definition) {
    Trajectory tr;
    tr.rate = 5.0;
    tr.samples = {Sample{.t = 0.0, .lane = 1, .lat = 0.0}, Sample{.t = 0.2, .lane = 2, .lat = -1.0}};
    const ContinuousLateral cl = continuous_lateral(tr, {});
    EXPECT_DOUBLE_EQ(cl.y[0], 3.5);
    EXPECT_DOUBLE_EQ(cl.y[1], 6.0);
    EXPECT_DOUBLE_EQ(cl.dt, 0.2);
}

TEST(ContinuousLateral, ContinuousAcrossReReferencing) {
    Trajectory tr;
    tr.rate = 5.0;
    tr.samples = {Sample{.t = 0.0, .lane = 0, .lat = 1.7}, Sample{.t = 0.2, .lane = 0, .lat = 1.75},
                  Sample{.t = 0.4, .lane = 1, .lat = -1.75}, Sample{.t = 0.6, .lane = 1, .lat = -1.7}};
    const ContinuousLateral cl = continuous_lateral(tr, {});
    EXPECT_DOUBLE_EQ(cl.y[1], cl.y[2]);
    EXPECT_NEAR(cl.y[3] - cl.y[0], 0.1, 1e-12);
}

TEST(ContinuousLateral, LaneOutsideLayoutRejected) {
    Trajectory tr;
    tr.samples = {Sample{.t = 0.0, .lane = 3}, Sample{.t = 0.2, .lane = 3}};
    EXPECT_THROW((void)continuous_lateral(tr, {}), Error);
}

TEST(ContinuousLateral, BiasShiftIsExact) {
    const Trajectory tr = from_lateral(1, 5.0, 30.0, 30.0, [](double t) { return 3.5 + 0.3 * std::sin(t); });
    Trajectory shifted = tr;
    const double b = snap_lateral(0.731);
    for (Sample& s : shifted.samples) s.lat += b;
    const ContinuousLateral a = continuous_lateral(tr, {});
    const ContinuousLateral c = continuous_lateral(shifted, {});
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(c.y[i], a.y[i] + b);
    EXPECT_EQ(a.relative(), c.relative());
}

TEST(Derivative, LinearAndConstant) {
    std::vector<double> lin, cst(50, 4.2);
    for (int k = 0; k < 50; ++k) lin.push_back(2.0 * k * 0.2);
    for (double d : derivative(lin, 0.2)) EXPECT_NEAR(d, 2.0, 1e-12);
    for (double d : derivative(cst, 0.2)) EXPECT_NEAR(d, 0.0, 1e-12);
}

TEST(Derivative, SineAgainstAnalytic) {
    std::vector<double> y;
    const double dt = 0.01;
    for (int k = 0; k <= 1000; ++k) y.push_back(std::sin(k * dt));
    const auto d = derivative(y, dt);
    for (std::size_t k = 0; k < d.size(); ++k) EXPECT_LT(std::abs(d[k] - std::cos(k * dt)), 1e-3);
}

TEST(Derivative, ConstantOffsetInvariant) {
    std::vector<double> y, yc;
    for (int k = 0; k < 100; ++k) {
        const double v = snap_lateral(std::sin(0.1 * k));
        y.push_back(v);
        yc.push_back(v + snap_lateral(1.25));
    }
    EXPECT_EQ(derivative(y, 0.2), derivative(yc, 0.2));
}

TEST(Derivative, Preconditions) {
    EXPECT_THROW((void)derivative(std::vector<double>{1.0}, 0.2), Error);
    EXPECT_THROW((void)derivative(std::vector<double>{1.0, 2.0}, 0.0), Error);
}

TEST(EstimateRate, UniformAndNonMonotone) {
    std::vector<Sample> s{{.t = 0.0}, {.t = 0.04}, {.t = 0.08}};
    EXPECT_NEAR(estimate_rate(s), 25.0, 1e-9);
    s[2].t = 0.04;
    EXPECT_THROW((void)estimate_rate(s), Error);
}

TEST(Preprocess, ParallelMatchesSerial) {
    std::vector<Trajectory> corpus;
    for (int i = 0; i < 24; ++i)
        corpus.push_back(lanecrit::testing::single_change(i + 1, 10.0 + i * 0.37, 4.0 + 0.2 * i));
    EXPECT_EQ(preprocess(corpus, 5.0, 1.3, {}), preprocess_serial(corpus, 5.0, 1.3, {}));
    const auto no_filter = preprocess(corpus, 5.0, 0.0, {});
    EXPECT_EQ(no_filter[3], resample(corpus[3], 5.0));
}

TEST(LaneLayout, Validation) {
    EXPECT_NO_THROW(LaneLayout{}.validate());
    EXPECT_THROW((LaneLayout{.lane_count = 0}.validate()), Error);
    EXPECT_THROW((LaneLayout{.lane_width = 0.0}.validate()), Error);
    EXPECT_THROW((VehicleShape{.length = 1.0, .width = 2.0}.validate()), Error);
}
