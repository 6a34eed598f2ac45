#pragma once

#include <cmath>
#include <functional>

#include "lanecrit/synth.hpp"
#include "lanecrit/traj_core.hpp"

namespace lanecrit::testing {

/// Logistic lane change of `extent` metres written out independently of the
/// generator: 1/12 to 11/12 of the extent is covered within `duration`.
inline double sigmoid(double t, double t_mid, double duration, double extent) {
    const double k = 2.0 * std::log(11.0) / duration;
    return extent / (1.0 + std::exp(-k * (t - t_mid)));
}

/// Trajectory at constant speed whose global lateral position follows y(t).
/// Lanes are assigned by the nearest centre; marking distances are filled in.
inline Trajectory from_lateral(VehicleId id, double rate, double t_end, double v,
                               const std::function<double(double)>& y, const LaneLayout& layout = {},
                               VehicleShape shape = {}) {
    Trajectory tr;
    tr.vehicle_id = id;
    tr.shape = shape;
    tr.recording = "r";
    tr.rate = rate;
    const auto n = static_cast<std::size_t>(std::llround(t_end * rate)) + 1;
    for (std::size_t k = 0; k < n; ++k) {
        Sample s;
        s.t = static_cast<double>(k) / rate;
        s.s = v * s.t;
        s.v = v;
        const double yy = y(s.t);
        s.lane = static_cast<int>(std::lround(yy / layout.lane_width));
        s.lat = snap_lateral(yy - s.lane * layout.lane_width);
        set_marking_distances(s, layout.lane_width, shape.width);
        tr.samples.push_back(s);
    }
    return tr;
}

/// One left lane change (lane 1 to 2) of 3.5 m over `duration` seconds.
inline Trajectory single_change(VehicleId id, double t_mid = 20.0, double duration = 6.0, double v = 30.0,
                                double extent = 3.5, double rate = 25.0, double t_end = 40.0) {
    return from_lateral(id, rate, t_end, v, [=](double t) { return 3.5 + sigmoid(t, t_mid, duration, extent); });
}

}  // namespace lanecrit::testing
