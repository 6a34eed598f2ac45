#include "lanecrit/stats.hpp"

#include "lanecrit/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lanecrit {

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw Error("quantile of empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw Error("quantile level outside [0, 1]");
    const double h = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BoxStats box_stats(std::vector<double> values, double whisker_factor) {
    if (values.empty()) throw Error("box statistics of empty sample");
    std::sort(values.begin(), values.end());
    BoxStats b;
    b.n = values.size();
    b.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(b.n);
    b.median = quantile_sorted(values, 0.5);
    b.q25 = quantile_sorted(values, 0.25);
    b.q75 = quantile_sorted(values, 0.75);
    b.min = values.front();
    b.max = values.back();
    const double iqr = b.q75 - b.q25;
    const double lo_fence = b.q25 - whisker_factor * iqr;
    const double hi_fence = b.q75 + whisker_factor * iqr;
    b.whisker_low = b.max;
    b.whisker_high = b.min;
    for (double v : values) {
        if (v < lo_fence || v > hi_fence) {
            b.outliers.push_back(v);
        } else {
            b.whisker_low = std::min(b.whisker_low, v);
            b.whisker_high = std::max(b.whisker_high, v);
        }
    }
    b.whisker_low = std::min(b.whisker_low, b.q25);
    b.whisker_high = std::max(b.whisker_high, b.q75);
    return b;
}

Histogram histogram(std::span<const double> values, std::size_t bins) {
    if (bins == 0) throw Error("histogram needs at least one bin");
    Histogram h;
    h.counts.assign(bins, 0);
    if (values.empty()) {
        for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(static_cast<double>(i) / static_cast<double>(bins));
        return h;
    }
    auto [mn, mx] = std::minmax_element(values.begin(), values.end());
    double lo = *mn;
    double hi = *mx;
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double w = (hi - lo) / static_cast<double>(bins);
    for (std::size_t i = 0; i <= bins; ++i) h.edges.push_back(lo + w * static_cast<double>(i));
    h.edges.back() = hi;
    for (double v : values) {
        auto k = static_cast<std::size_t>((v - lo) / w);
        h.counts[std::min(k, bins - 1)] += 1;
    }
    return h;
}

}  // namespace lanecrit
