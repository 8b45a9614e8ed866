#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace regsel {

/// Empirical quantile with linear interpolation between order statistics:
/// h = (n - 1) p + 1 (1-based), interpolating between floor(h) and ceil(h).
double quantile(std::span<const double> values, double probability);
double quantile_sorted(std::span<const double> sorted, double probability);

struct FiveNumberSummary {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double mean = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    double iqr = 0.0;
};

FiveNumberSummary five_number_summary(std::span<const double> values);

/// Equal-width bins over [min, max] with Sturges' bin count unless `bins`
/// is given. `edges` has counts.size() + 1 entries; the last bin is closed.
struct Histogram {
    std::vector<double> edges;
    std::vector<std::size_t> counts;
};

Histogram histogram(std::span<const double> values, std::size_t bins = 0);

}  // namespace regsel
