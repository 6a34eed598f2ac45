#include "lanecrit/traj_core.hpp"

#include "lanecrit/parallel.hpp"

#include <algorithm>
#include <numbers>

namespace lanecrit {

void LaneLayout::validate() const {
    if (lane_count < 1) throw Error("lane layout: lane_count must be >= 1");
    if (!(lane_width > 0.0)) throw Error("lane layout: lane_width must be > 0");
    if (!(v_lim > 0.0)) throw Error("lane layout: v_lim must be > 0");
}

const char* to_string(VehicleClass c) {
    return c == VehicleClass::truck ? "truck" : "car";
}

VehicleClass vehicle_class_from_string(const std::string& s) {
    if (s == "car") return VehicleClass::car;
    if (s == "truck") return VehicleClass::truck;
    throw Error("unknown vehicle class '" + s + "'");
}

void VehicleShape::validate() const {
    if (!(width > 0.0) || !(length > width))
        throw Error("vehicle shape: expected 0 < width < length");
}

bool Trajectory::has_marking_distances() const {
    return !samples.empty() && std::all_of(samples.begin(), samples.end(), [](const Sample& s) {
        return s.d_left.has_value() && s.d_right.has_value();
    });
}

std::vector<double> ContinuousLateral::relative() const {
    std::vector<double> r(y.size());
    if (y.empty()) return r;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double dlat = lat[i] - lat[0];
        const double dlane = static_cast<double>(lane[i] - lane[0]) * lane_width;
        r[i] = dlat + dlane;
    }
    return r;
}

double estimate_rate(std::span<const Sample> samples) {
    if (samples.size() < 2) throw Error("insufficient samples");
    for (std::size_t i = 1; i < samples.size(); ++i)
        if (!(samples[i].t > samples[i - 1].t)) throw Error("time stamps not strictly increasing");
    return static_cast<double>(samples.size() - 1) / (samples.back().t - samples.front().t);
}

namespace {

double lerp(double a, double b, double f) { return a + (b - a) * f; }

std::optional<double> lerp_opt(const std::optional<double>& a, const std::optional<double>& b,
                               double f, bool nearest_only) {
    if (!a || !b) return std::nullopt;
    if (nearest_only) return f < 0.5 ? a : b;
    return lerp(*a, *b, f);
}

}  // namespace

Trajectory resample(const Trajectory& traj, double target_rate) {
    if (traj.samples.size() < 2) throw Error("insufficient samples");
    if (!(target_rate > 0.0)) throw Error("resample: target_rate must be > 0");
    (void)estimate_rate(traj.samples);  // monotonicity check

    const auto& in = traj.samples;
    const double eps = 1e-9;
    const auto k_first = static_cast<std::int64_t>(std::ceil(in.front().t * target_rate - eps));
    const auto k_last = static_cast<std::int64_t>(std::floor(in.back().t * target_rate + eps));
    if (k_last - k_first + 1 < 2) throw Error("insufficient samples");

    Trajectory out;
    out.vehicle_id = traj.vehicle_id;
    out.shape = traj.shape;
    out.recording = traj.recording;
    out.rate = target_rate;
    out.samples.reserve(static_cast<std::size_t>(k_last - k_first + 1));

    std::size_t i = 0;
    for (std::int64_t k = k_first; k <= k_last; ++k) {
        double t = static_cast<double>(k) / target_rate;
        while (i + 2 < in.size() && in[i + 1].t <= t) ++i;
        const Sample& a = in[i];
        const Sample& b = in[i + 1];

        // coinciding time stamps are copied verbatim
        if (std::abs(t - a.t) <= eps) { out.samples.push_back(a); continue; }
        if (std::abs(t - b.t) <= eps) { out.samples.push_back(b); continue; }

        t = std::clamp(t, a.t, b.t);
        const double f = (t - a.t) / (b.t - a.t);
        const bool lane_switch = a.lane != b.lane;

        Sample s;
        s.t = t;
        s.s = lerp(a.s, b.s, f);
        s.v = lerp(a.v, b.v, f);
        s.a_lon = lerp(a.a_lon, b.a_lon, f);
        s.a_lat = lerp(a.a_lat, b.a_lat, f);
        if (lane_switch) {
            const Sample& near = f < 0.5 ? a : b;
            s.lane = near.lane;
            s.lat = near.lat;
        } else {
            s.lane = a.lane;
            s.lat = snap_lateral(lerp(a.lat, b.lat, f));
        }
        s.d_left = lerp_opt(a.d_left, b.d_left, f, lane_switch);
        s.d_right = lerp_opt(a.d_right, b.d_right, f, lane_switch);
        out.samples.push_back(s);
    }
    return out;
}

std::vector<double> filtfilt_butter2(std::span<const double> x, double cutoff_hz, double rate_hz) {
    if (!(cutoff_hz > 0.0) || !(cutoff_hz < rate_hz / 2.0))
        throw Error("lowpass: cutoff must lie in (0, rate/2)");
    const std::size_t n = x.size();
    if (n < 2) return {x.begin(), x.end()};

    // bilinear transform with pre-warping
    const double k = std::tan(std::numbers::pi * cutoff_hz / rate_hz);
    const double norm = 1.0 / (1.0 + std::numbers::sqrt2 * k + k * k);
    const double b0 = k * k * norm;
    const double b1 = 2.0 * b0;
    const double b2 = b0;
    const double a1 = 2.0 * (k * k - 1.0) * norm;
    const double a2 = (1.0 - std::numbers::sqrt2 * k + k * k) * norm;

    // steady-state initial conditions of the transposed direct form II
    const double zi2 = b2 - a2;
    const double zi1 = b1 - a1 + zi2;

    auto run = [&](std::vector<double>& v) {
        double z1 = zi1 * v.front();
        double z2 = zi2 * v.front();
        for (double& xv : v) {
            const double yv = b0 * xv + z1;
            z1 = b1 * xv - a1 * yv + z2;
            z2 = b2 * xv - a2 * yv;
            xv = yv;
        }
    };

    // odd extension at both ends
    const std::size_t pad = std::min<std::size_t>(9, n - 1);
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t j = pad; j >= 1; --j) ext.push_back(2.0 * x[0] - x[j]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t j = 1; j <= pad; ++j) ext.push_back(2.0 * x[n - 1] - x[n - 1 - j]);

    run(ext);
    std::reverse(ext.begin(), ext.end());
    run(ext);
    std::reverse(ext.begin(), ext.end());
    return {ext.begin() + static_cast<std::ptrdiff_t>(pad),
            ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

Trajectory lowpass(const Trajectory& traj, double cutoff_hz, const LaneLayout& layout) {
    const double rate = traj.rate > 0.0 ? traj.rate : estimate_rate(traj.samples);
    if (!(cutoff_hz < rate / 2.0)) throw Error("lowpass: cutoff at or above Nyquist");
    const ContinuousLateral cl = continuous_lateral(traj, layout);
    const std::vector<double> filtered = filtfilt_butter2(cl.relative(), cutoff_hz, rate);

    // rebuild lat around the first sample so the offset stays exact
    Trajectory out = traj;
    const Sample& first = traj.samples.front();
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        Sample& s = out.samples[i];
        const double lane_step = static_cast<double>(s.lane - first.lane) * layout.lane_width;
        s.lat = first.lat + snap_lateral(filtered[i] - lane_step);
    }
    return out;
}

ContinuousLateral continuous_lateral(const Trajectory& traj, const LaneLayout& layout) {
    ContinuousLateral cl;
    cl.lane_width = layout.lane_width;
    const std::size_t n = traj.samples.size();
    cl.t.reserve(n);
    cl.y.reserve(n);
    cl.lane.reserve(n);
    cl.lat.reserve(n);
    for (const Sample& s : traj.samples) {
        if (s.lane < 0 || s.lane >= layout.lane_count)
            throw Error("lane index " + std::to_string(s.lane) + " outside layout");
        cl.t.push_back(s.t);
        cl.y.push_back(layout.lane_center(s.lane) + s.lat);
        cl.lane.push_back(s.lane);
        cl.lat.push_back(s.lat);
    }
    if (traj.rate > 0.0)
        cl.dt = 1.0 / traj.rate;
    else if (n >= 2)
        cl.dt = 1.0 / estimate_rate(traj.samples);
    return cl;
}

std::vector<double> derivative(std::span<const double> y, double dt) {
    const std::size_t n = y.size();
    if (n < 2) throw Error("derivative: at least 2 samples required");
    if (!(dt > 0.0)) throw Error("derivative: dt must be > 0");
    std::vector<double> d(n);
    if (n == 2) {
        d[0] = d[1] = (y[1] - y[0]) / dt;
        return d;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i - 1]) / (2.0 * dt);
    d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * dt);
    d[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * dt);
    return d;
}

namespace {

Trajectory preprocess_one(const Trajectory& t, double rate_hz, double cutoff_hz, const LaneLayout& layout) {
    Trajectory r = resample(t, rate_hz);
    return cutoff_hz > 0.0 ? lowpass(r, cutoff_hz, layout) : r;
}

}  // namespace

std::vector<Trajectory> preprocess(std::span<const Trajectory> corpus, double rate_hz, double cutoff_hz,
                                   const LaneLayout& layout) {
    std::vector<Trajectory> out(corpus.size());
    parallel_for(corpus.size(), [&](std::size_t i) { out[i] = preprocess_one(corpus[i], rate_hz, cutoff_hz, layout); });
    return out;
}

std::vector<Trajectory> preprocess_serial(std::span<const Trajectory> corpus, double rate_hz, double cutoff_hz,
                                          const LaneLayout& layout) {
    std::vector<Trajectory> out;
    out.reserve(corpus.size());
    for (const Trajectory& t : corpus) out.push_back(preprocess_one(t, rate_hz, cutoff_hz, layout));
    return out;
}

}  // namespace lanecrit
