#include "lanecrit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace lanecrit {

double logistic_steepness(double duration) { return 2.0 * std::log(11.0) / duration; }

LateralProfile logistic_lane_change(double t, double t_mid, double duration, double extent) {
    const double k = logistic_steepness(duration);
    const double sig = 1.0 / (1.0 + std::exp(-k * (t - t_mid)));
    const double ds = sig * (1.0 - sig);
    return {extent * sig, extent * k * ds, extent * k * k * ds * (1.0 - 2.0 * sig)};
}

void set_marking_distances(Sample& s, double lane_width, double width) {
    s.d_left = lane_width / 2.0 - s.lat - width / 2.0;
    s.d_right = lane_width / 2.0 + s.lat - width / 2.0;
}

namespace {

struct Manoeuvre {
    double t_mid;
    double duration;
    int step;  // +1 left, -1 right
};

struct Jitter {
    double amp, freq, phase;
};

}  // namespace

SyntheticCorpus synthesize(const SynthParams& p) {
    p.layout.validate();
    if (p.n < 0) throw Error("synth: n must be >= 0");
    if (p.recordings < 1) throw Error("synth: recordings must be >= 1");
    if (p.layout.lane_count < 2 && (p.lane_keep_share < 1.0))
        throw Error("synth: lane changes need at least two lanes");

    SyntheticCorpus corpus;
    const double W = p.layout.lane_width;
    const double two_pi = 2.0 * std::numbers::pi;

    for (int i = 0; i < p.n; ++i) {
        std::seed_seq seq{static_cast<std::uint64_t>(p.seed), static_cast<std::uint64_t>(i)};
        std::mt19937_64 rng(seq);
        auto uni = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };

        Trajectory traj;
        traj.vehicle_id = i + 1;
        traj.recording = "rec" + std::to_string(i % p.recordings + 1);
        const bool truck = uni(0.0, 1.0) < p.truck_share;
        if (truck)
            traj.shape = {uni(12.0, 18.0), uni(2.4, 2.55), VehicleClass::truck};
        else
            traj.shape = {uni(4.2, 5.0), uni(1.7, 2.0), VehicleClass::car};

        const double v0 = truck ? uni(p.speed_min, std::min(p.speed_max, 30.0)) : uni(p.speed_min, p.speed_max);
        const double u = uni(0.0, 1.0);
        const int n_changes = u < p.lane_keep_share ? 0 : (u < p.lane_keep_share + p.two_change_share ? 2 : 1);

        // start lane and directions
        int lane0 = static_cast<int>(uni(0.0, static_cast<double>(p.layout.lane_count)));
        lane0 = std::min(lane0, p.layout.lane_count - 1);
        std::vector<int> steps;
        if (n_changes >= 1) {
            int step = uni(0.0, 1.0) < 0.5 ? 1 : -1;
            if (lane0 == 0) step = 1;
            if (lane0 == p.layout.lane_count - 1) step = -1;
            steps.push_back(step);
            if (n_changes == 2) steps.push_back(-step);  // out and back
        }

        std::vector<Manoeuvre> mans;
        double t_cursor = uni(8.0, 15.0);
        for (std::size_t j = 0; j < steps.size(); ++j) {
            const double d = uni(p.duration_min, p.duration_max);
            if (j == 0)
                t_cursor += d;
            else
                t_cursor += 1.2 * std::max(d, mans.back().duration) + uni(6.0, 15.0);
            mans.push_back({t_cursor, d, steps[j]});
        }
        const double t_total = (mans.empty() ? t_cursor + uni(30.0, 50.0) : t_cursor + mans.back().duration)
                               + uni(8.0, 15.0);

        std::vector<Jitter> jit(3);
        for (Jitter& j : jit)
            j = {p.jitter_max / 3.0 * uni(0.3, 1.0), uni(0.03, p.jitter_freq_max), uni(0.0, two_pi)};
        const double av = uni(0.0, 0.8);
        const double fv = uni(0.01, 0.05);
        const double phv = uni(0.0, two_pi);
        const double s0 = static_cast<double>(i / p.recordings) * 400.0 + uni(0.0, 100.0);

        const auto n_samples = static_cast<std::int64_t>(std::floor(t_total * p.rate)) + 1;
        traj.samples.reserve(static_cast<std::size_t>(n_samples));
        for (std::int64_t k = 0; k < n_samples; ++k) {
            const double t = static_cast<double>(k) / p.rate;
            double y = lane0 * W;
            double ddy = 0.0;
            for (const Manoeuvre& m : mans) {
                const LateralProfile lp = logistic_lane_change(t, m.t_mid, m.duration, m.step * W);
                y += lp.y;
                ddy += lp.ddy;
            }
            for (const Jitter& j : jit) {
                y += j.amp * std::sin(two_pi * j.freq * t + j.phase);
                ddy -= j.amp * (two_pi * j.freq) * (two_pi * j.freq) * std::sin(two_pi * j.freq * t + j.phase);
            }
            Sample s;
            s.t = t;
            const double wv = two_pi * fv;
            s.v = v0 + av * std::sin(wv * t + phv);
            s.a_lon = av * wv * std::cos(wv * t + phv);
            s.s = s0 + v0 * t - av / wv * (std::cos(wv * t + phv) - std::cos(phv));
            s.lane = std::clamp(static_cast<int>(std::floor(y / W + 0.5)), 0, p.layout.lane_count - 1);
            s.lat = snap_lateral(y - s.lane * W);
            s.a_lat = ddy;
            set_marking_distances(s, W, traj.shape.width);
            traj.samples.push_back(s);
        }
        traj.rate = p.rate;

        for (const Manoeuvre& m : mans) {
            const double wv = two_pi * fv;
            corpus.truth.push_back({traj.vehicle_id, m.t_mid, m.step > 0 ? Direction::left : Direction::right,
                                    m.duration, v0 + av * std::sin(wv * m.t_mid + phv)});
        }
        corpus.trajectories.push_back(std::move(traj));
    }
    return corpus;
}

}  // namespace lanecrit
