#include "lanecrit/lc_detect.hpp"

#include "lanecrit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lanecrit {

const char* to_string(Direction d) { return d == Direction::left ? "left" : "right"; }
const char* to_string(EventKind k) { return k == EventKind::single ? "single" : "double"; }
const char* to_string(Criterion c) {
    switch (c) {
        case Criterion::gradient: return "gradient";
        case Criterion::distance: return "distance";
        case Criterion::peak: return "peak";
    }
    return "?";
}

Direction direction_from_string(const std::string& s) {
    if (s == "left") return Direction::left;
    if (s == "right") return Direction::right;
    throw Error("unknown direction '" + s + "'");
}

EventKind event_kind_from_string(const std::string& s) {
    if (s == "single") return EventKind::single;
    if (s == "double") return EventKind::double_change;
    throw Error("unknown event kind '" + s + "'");
}

Criterion criterion_from_string(const std::string& s) {
    if (s == "gradient") return Criterion::gradient;
    if (s == "distance") return Criterion::distance;
    if (s == "peak") return Criterion::peak;
    throw Error("unknown criterion '" + s + "'");
}

void PeakParams::validate() const {
    if (!(prominence_min > 0.0)) throw Error("peak params: prominence_min must be > 0");
    if (!(rel_height > 0.0 && rel_height < 1.0)) throw Error("peak params: rel_height must lie in (0,1)");
    if (!(min_peak_separation >= 0.0)) throw Error("peak params: min_peak_separation must be >= 0");
}

double rel_height_for(double width_obj, double width_lane) {
    return 1.0 - (width_obj / width_lane) / 2.0;
}

Peak peak_prominence(std::span<const double> x, std::size_t index) {
    Peak p;
    p.index = index;
    p.height = x[index];

    double left_min = x[index];
    p.left_base = index;
    for (std::ptrdiff_t i = static_cast<std::ptrdiff_t>(index); i >= 0 && x[i] <= p.height; --i) {
        if (x[i] < left_min) {
            left_min = x[i];
            p.left_base = static_cast<std::size_t>(i);
        }
    }
    double right_min = x[index];
    p.right_base = index;
    for (std::size_t i = index; i < x.size() && x[i] <= p.height; ++i) {
        if (x[i] < right_min) {
            right_min = x[i];
            p.right_base = i;
        }
    }
    p.prominence = p.height - std::max(left_min, right_min);
    return p;
}

namespace {

std::vector<std::size_t> local_maxima(std::span<const double> x) {
    std::vector<std::size_t> out;
    const std::size_t n = x.size();
    if (n < 3) return out;
    std::size_t i = 1;
    const std::size_t i_max = n - 1;
    while (i < i_max) {
        if (x[i - 1] < x[i]) {
            std::size_t ahead = i + 1;
            while (ahead < i_max && x[ahead] == x[i]) ++ahead;
            if (x[ahead] < x[i]) {
                out.push_back((i + ahead - 1) / 2);  // plateau midpoint
                i = ahead;
            }
        }
        ++i;
    }
    return out;
}

}  // namespace

std::vector<Peak> find_peaks(std::span<const double> x, double dt, double prominence_min,
                             double min_separation_s) {
    std::vector<Peak> peaks;
    for (std::size_t idx : local_maxima(x)) {
        Peak p = peak_prominence(x, idx);
        if (p.prominence >= prominence_min) peaks.push_back(p);
    }
    if (peaks.size() < 2 || !(min_separation_s > 0.0)) return peaks;

    const auto distance = static_cast<std::size_t>(std::ceil(min_separation_s / dt - 1e-9));
    std::vector<std::size_t> order(peaks.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return peaks[a].height < peaks[b].height; });
    std::vector<char> keep(peaks.size(), 1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const std::size_t j = *it;
        if (!keep[j]) continue;
        for (std::size_t k = j; k-- > 0 && peaks[j].index - peaks[k].index < distance;) keep[k] = 0;
        for (std::size_t k = j + 1; k < peaks.size() && peaks[k].index - peaks[j].index < distance; ++k)
            keep[k] = 0;
    }
    std::vector<Peak> kept;
    for (std::size_t i = 0; i < peaks.size(); ++i)
        if (keep[i]) kept.push_back(peaks[i]);
    return kept;
}

std::vector<Peak> find_peaks(std::span<const double> x, double dt, const PeakParams& params) {
    return find_peaks(x, dt, params.prominence_min, params.min_peak_separation);
}

PeakWidth peak_width(std::span<const double> x, double t0, double dt, const Peak& peak, double rel_height) {
    PeakWidth w;
    const std::size_t n = x.size();
    w.eval_height = peak.height - peak.prominence * rel_height;
    const double h = w.eval_height;

    std::size_t i = peak.index;
    while (i > peak.left_base && h < x[i]) --i;
    w.left_ip = static_cast<double>(i);
    if (x[i] < h)
        w.left_ip += (h - x[i]) / (x[i + 1] - x[i]);
    else if (h < x[i])
        w.truncated = true;  // never crossed: clamped

    i = peak.index;
    while (i < peak.right_base && h < x[i]) ++i;
    w.right_ip = static_cast<double>(i);
    if (x[i] < h)
        w.right_ip -= (h - x[i]) / (x[i - 1] - x[i]);
    else if (h < x[i])
        w.truncated = true;

    if (w.left_ip <= 0.0 || w.right_ip >= static_cast<double>(n - 1)) w.truncated = true;
    w.t_start = t0 + w.left_ip * dt;
    w.t_end = t0 + w.right_ip * dt;
    w.duration = w.t_end - w.t_start;
    return w;
}

void DetectParams::validate(const LaneLayout& layout) const {
    if (!(distance_threshold > 0.0 && distance_threshold < layout.lane_width / 2.0))
        throw Error("detect: distance threshold must lie in (0, lane_width/2)");
    if (!(prominence_min > 0.0)) throw Error("detect: prominence_min must be > 0");
    if (!(min_peak_separation >= 0.0)) throw Error("detect: min_peak_separation must be >= 0");
    if (!(merge_gap >= 0.0)) throw Error("detect: merge_gap must be >= 0");
}

PeakParams DetectParams::peak_params(const VehicleShape& shape, const LaneLayout& layout) const {
    PeakParams p;
    p.prominence_min = prominence_min;
    p.min_peak_separation = min_peak_separation;
    p.rel_height = rel_height_for(shape.width, layout.lane_width);
    p.validate();
    return p;
}

namespace {

double interp_at(std::span<const double> v, double ip) {
    const double clamped = std::clamp(ip, 0.0, static_cast<double>(v.size() - 1));
    const auto i = static_cast<std::size_t>(std::floor(clamped));
    if (i + 1 >= v.size()) return v.back();
    const double f = clamped - static_cast<double>(i);
    return v[i] + (v[i + 1] - v[i]) * f;
}

double sign_of(Direction d) { return d == Direction::left ? 1.0 : -1.0; }

/// Lane switch index k (lane[k] != lane[k-1]) in direction `dir` strictly
/// inside (lo, hi), nearest to `centre`; npos when none.
std::size_t nearest_switch(const ContinuousLateral& cl, Direction dir, double lo, double hi, double centre) {
    std::size_t best = static_cast<std::size_t>(-1);
    double best_dist = 0.0;
    for (std::size_t k = 1; k < cl.size(); ++k) {
        const int step = cl.lane[k] - cl.lane[k - 1];
        if (step == 0 || (step > 0) != (dir == Direction::left)) continue;
        const auto kd = static_cast<double>(k);
        if (!(kd > lo && kd < hi)) continue;
        const double dist = std::abs(kd - centre);
        if (best == static_cast<std::size_t>(-1) || dist < best_dist) {
            best = k;
            best_dist = dist;
        }
    }
    return best;
}

struct Candidate {
    LaneChangeEvent event;
    double prominence = 0.0;
};

/// Builds an event from a derivative peak; t_mid at the nearest matching lane switch.
Candidate event_from_peak(const Trajectory& traj, const ContinuousLateral& cl, std::span<const double> rel,
                          std::span<const double> signed_rate, const Peak& peak, Direction dir,
                          double rel_height, Criterion criterion) {
    const PeakWidth w = peak_width(signed_rate, cl.t.front(), cl.dt, peak, rel_height);
    LaneChangeEvent e;
    e.vehicle_id = traj.vehicle_id;
    e.criterion = criterion;
    e.direction = dir;
    e.t_start = w.t_start;
    e.t_end = w.t_end;
    e.duration = w.duration;
    e.truncated = w.truncated;
    const std::size_t k = nearest_switch(cl, dir, w.left_ip, w.right_ip, static_cast<double>(peak.index));
    e.t_mid = k != static_cast<std::size_t>(-1) ? cl.t[k] : cl.t[peak.index];
    e.v_mid = traj.samples[peak.index].v;
    e.lateral_extent = std::abs(interp_at(rel, w.right_ip) - interp_at(rel, w.left_ip));
    return {e, peak.prominence};
}

bool windows_overlap(const LaneChangeEvent& a, const LaneChangeEvent& b) {
    return a.t_start < b.t_end && b.t_start < a.t_end;
}

}  // namespace

std::vector<LaneChangeEvent> detect_gradient(const Trajectory& traj, const LaneLayout& layout,
                                             const DetectParams& params) {
    if (!traj.has_marking_distances()) throw Error("gradient criterion unavailable");
    const ContinuousLateral cl = continuous_lateral(traj, layout);
    const std::vector<double> rel = cl.relative();
    const std::vector<double> rate = derivative(rel, cl.dt);
    const PeakParams pp = params.peak_params(traj.shape, layout);
    const double jump = 0.5 * layout.lane_width;
    const auto search = static_cast<std::ptrdiff_t>(std::ceil(pp.min_peak_separation / cl.dt));

    std::vector<LaneChangeEvent> events;
    const auto& s = traj.samples;
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double dl = *s[i].d_left - *s[i - 1].d_left;
        const double dr = *s[i].d_right - *s[i - 1].d_right;
        const double left_score = std::max(dl, -dr);
        const double right_score = std::max(dr, -dl);
        if (left_score <= jump && right_score <= jump) continue;
        const Direction dir = left_score >= right_score ? Direction::left : Direction::right;

        // refine the window with the nearest local maximum of the signed lateral rate
        std::vector<double> signed_rate(rate.size());
        const double sg = sign_of(dir);
        for (std::size_t j = 0; j < rate.size(); ++j) signed_rate[j] = sg * rate[j];

        std::ptrdiff_t best = -1;
        const auto ii = static_cast<std::ptrdiff_t>(i);
        for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(1, ii - search);
             j <= std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(s.size()) - 2, ii + search); ++j) {
            if (!(signed_rate[j] > 0.0 && signed_rate[j] >= signed_rate[j - 1] && signed_rate[j] > signed_rate[j + 1]))
                continue;
            if (best < 0 || std::abs(j - ii) < std::abs(best - ii) ||
                (std::abs(j - ii) == std::abs(best - ii) && signed_rate[j] > signed_rate[best]))
                best = j;
        }

        LaneChangeEvent e;
        e.vehicle_id = traj.vehicle_id;
        e.criterion = Criterion::gradient;
        e.direction = dir;
        e.t_mid = s[i].t;
        e.v_mid = s[i].v;
        bool refined = false;
        if (best >= 0) {
            const Peak pk = peak_prominence(signed_rate, static_cast<std::size_t>(best));
            const PeakWidth w = peak_width(signed_rate, cl.t.front(), cl.dt, pk, pp.rel_height);
            if (w.t_start < e.t_mid && e.t_mid < w.t_end) {
                e.t_start = w.t_start;
                e.t_end = w.t_end;
                e.truncated = w.truncated;
                e.lateral_extent = std::abs(interp_at(rel, w.right_ip) - interp_at(rel, w.left_ip));
                refined = true;
            }
        }
        if (!refined) {
            e.t_start = s[i - 1].t;
            e.t_end = i + 1 < s.size() ? s[i + 1].t : s[i].t + cl.dt;
            e.truncated = true;
            e.lateral_extent = std::abs(rel[std::min(i + 1, s.size() - 1)] - rel[i - 1]);
        }
        e.duration = e.t_end - e.t_start;
        events.push_back(e);
    }
    return events;
}

std::vector<char> distance_predicate(const ContinuousLateral& y, double threshold) {
    std::vector<char> p(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) p[i] = std::abs(y.lat[i]) > threshold ? 1 : 0;
    return p;
}

std::vector<LaneChangeEvent> detect_distance(const Trajectory& traj, const LaneLayout& layout,
                                             const DetectParams& params) {
    params.validate(layout);
    const ContinuousLateral cl = continuous_lateral(traj, layout);
    const std::vector<char> p = distance_predicate(cl, params.distance_threshold);
    const std::size_t n = p.size();

    struct Run {
        std::size_t first, last;
    };
    std::vector<Run> runs;
    for (std::size_t i = 0; i < n;) {
        if (!p[i]) { ++i; continue; }
        std::size_t j = i;
        while (j + 1 < n && p[j + 1]) ++j;
        if (!runs.empty() && cl.t[i] - cl.t[runs.back().last] < params.merge_gap)
            runs.back().last = j;
        else
            runs.push_back({i, j});
        i = j + 1;
    }

    std::vector<LaneChangeEvent> events;
    for (const Run& r : runs) {
        const int lane_before = cl.lane[r.first];
        const int lane_after = cl.lane[r.last];
        if (lane_before == lane_after) continue;  // no settlement in a different lane
        const Direction dir = lane_after > lane_before ? Direction::left : Direction::right;
        std::size_t k = r.first + 1;
        while (k <= r.last && cl.lane[k] == cl.lane[k - 1]) ++k;

        LaneChangeEvent e;
        e.vehicle_id = traj.vehicle_id;
        e.criterion = Criterion::distance;
        e.direction = dir;
        e.t_start = cl.t[r.first];
        const std::size_t end_idx = r.last + 1 < n ? r.last + 1 : r.last;
        e.t_end = r.last + 1 < n ? cl.t[r.last + 1] : cl.t[r.last] + cl.dt;
        e.t_mid = cl.t[k];
        e.duration = e.t_end - e.t_start;
        e.v_mid = traj.samples[k].v;
        e.lateral_extent = std::abs(cl.y[end_idx] - cl.y[r.first]);
        e.truncated = r.first == 0 || r.last + 1 >= n;
        events.push_back(e);
    }
    return events;
}

std::vector<LaneChangeEvent> detect_peak(const Trajectory& traj, const LaneLayout& layout,
                                         const DetectParams& params) {
    const PeakParams pp = params.peak_params(traj.shape, layout);
    const ContinuousLateral cl = continuous_lateral(traj, layout);
    if (cl.size() < 3) return {};
    const std::vector<double> rel = cl.relative();
    const std::vector<double> rate = derivative(rel, cl.dt);

    std::vector<Candidate> cands;
    for (Direction dir : {Direction::left, Direction::right}) {
        std::vector<double> signed_rate(rate.size());
        const double sg = sign_of(dir);
        for (std::size_t j = 0; j < rate.size(); ++j) signed_rate[j] = sg * rate[j];
        for (const Peak& pk : find_peaks(signed_rate, cl.dt, pp)) {
            Candidate c = event_from_peak(traj, cl, rel, signed_rate, pk, dir, pp.rel_height, Criterion::peak);
            if (c.event.lateral_extent > params.min_extent) cands.push_back(c);
        }
    }
    std::sort(cands.begin(), cands.end(),
              [](const Candidate& a, const Candidate& b) { return a.event.t_start < b.event.t_start; });

    // opposite-sign peaks inside one manoeuvre: the dominant one wins
    std::vector<char> keep(cands.size(), 1);
    for (std::size_t i = 0; i < cands.size(); ++i) {
        for (std::size_t j = i + 1; j < cands.size() && cands[j].event.t_start < cands[i].event.t_end; ++j) {
            if (!keep[i] || !keep[j]) continue;
            if (cands[i].event.direction == cands[j].event.direction) continue;
            if (!windows_overlap(cands[i].event, cands[j].event)) continue;
            if (cands[i].prominence >= cands[j].prominence)
                keep[j] = 0;
            else
                keep[i] = 0;
        }
    }
    std::vector<LaneChangeEvent> events;
    for (std::size_t i = 0; i < cands.size(); ++i)
        if (keep[i]) events.push_back(cands[i].event);
    return events;
}

std::vector<LaneChangeEvent> classify_double(std::vector<LaneChangeEvent> events, const LaneLayout& layout,
                                             double extent_factor) {
    std::stable_sort(events.begin(), events.end(),
                     [](const LaneChangeEvent& a, const LaneChangeEvent& b) { return a.t_start < b.t_start; });
    std::vector<LaneChangeEvent> out;
    for (LaneChangeEvent e : events) {
        if (e.lateral_extent >= extent_factor * layout.lane_width) e.kind = EventKind::double_change;
        if (!out.empty()) {
            LaneChangeEvent& prev = out.back();
            if (prev.vehicle_id == e.vehicle_id && prev.direction == e.direction && windows_overlap(prev, e)) {
                prev.t_start = std::min(prev.t_start, e.t_start);
                prev.t_end = std::max(prev.t_end, e.t_end);
                prev.duration = prev.t_end - prev.t_start;
                prev.lateral_extent += e.lateral_extent;
                prev.truncated = prev.truncated || e.truncated;
                prev.kind = EventKind::double_change;
                continue;
            }
        }
        out.push_back(e);
    }
    return out;
}

std::vector<LaneChangeEvent> detect(Criterion criterion, const Trajectory& traj, const LaneLayout& layout,
                                    const DetectParams& params) {
    std::vector<LaneChangeEvent> ev;
    switch (criterion) {
        case Criterion::gradient: ev = detect_gradient(traj, layout, params); break;
        case Criterion::distance: ev = detect_distance(traj, layout, params); break;
        case Criterion::peak: ev = detect_peak(traj, layout, params); break;
    }
    return classify_double(std::move(ev), layout, params.double_extent_factor);
}

std::vector<LaneChangeEvent> detect_all(std::span<const Trajectory> corpus, Criterion criterion,
                                        const LaneLayout& layout, const DetectParams& params) {
    std::vector<std::vector<LaneChangeEvent>> parts(corpus.size());
    parallel_for(corpus.size(), [&](std::size_t i) { parts[i] = detect(criterion, corpus[i], layout, params); });
    std::vector<LaneChangeEvent> out;
    for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
    return out;
}

std::vector<LaneChangeEvent> detect_all_serial(std::span<const Trajectory> corpus, Criterion criterion,
                                               const LaneLayout& layout, const DetectParams& params) {
    std::vector<LaneChangeEvent> out;
    for (const Trajectory& t : corpus) {
        auto p = detect(criterion, t, layout, params);
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

}  // namespace lanecrit
