#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace lanecrit {

/// Linear-interpolation quantile (Hyndman-Fan type 7) of an ascending sample.
[[nodiscard]] double quantile_sorted(std::span<const double> sorted, double q);

/// Box-plot summary. Outliers lie more than `whisker_factor` IQR outside the
/// quartiles; whiskers end at the most extreme remaining points, but never
/// inside the box.
struct BoxStats {
    std::size_t n = 0;
    double mean = 0.0;
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    double whisker_low = 0.0;
    double whisker_high = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::vector<double> outliers;
};

/// Throws on an empty sample.
[[nodiscard]] BoxStats box_stats(std::vector<double> values, double whisker_factor = 1.5);

struct Histogram {
    std::vector<double> edges;  // bins + 1 ascending edges
    std::vector<std::size_t> counts;
};

/// Equal-width bins over [min, max] of the values; the last bin is closed.
/// A degenerate range is widened by 0.5 on both sides.
[[nodiscard]] Histogram histogram(std::span<const double> values, std::size_t bins);

}  // namespace lanecrit
