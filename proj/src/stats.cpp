#include "regsel/stats.hpp"

#include "regsel/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace regsel {

double quantile_sorted(std::span<const double> sorted, double probability) {
    if (sorted.empty()) throw ArgumentError("quantile of an empty vector");
    if (!(probability >= 0.0 && probability <= 1.0)) throw ArgumentError("quantile probability outside [0, 1]");
    const double h = static_cast<double>(sorted.size() - 1) * probability;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(std::span<const double> values, double probability) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return quantile_sorted(sorted, probability);
}

FiveNumberSummary five_number_summary(std::span<const double> values) {
    if (values.empty()) throw ArgumentError("summary of an empty vector");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    FiveNumberSummary s;
    s.min = sorted.front();
    s.max = sorted.back();
    s.q1 = quantile_sorted(sorted, 0.25);
    s.median = quantile_sorted(sorted, 0.5);
    s.q3 = quantile_sorted(sorted, 0.75);
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    s.iqr = s.q3 - s.q1;
    return s;
}

Histogram histogram(std::span<const double> values, std::size_t bins) {
    if (values.empty()) throw ArgumentError("histogram of an empty vector");
    if (bins == 0) {
        bins = static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(values.size())))) + 1;
    }
    auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    double lo = *lo_it;
    double hi = *hi_it;
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw ArgumentError("histogram of non-finite values");
    if (hi == lo) {
        lo -= 0.5;
        hi += 0.5;
    }
    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t k = 0; k <= bins; ++k) {
        h.edges[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
    }
    h.edges.back() = hi;
    h.counts.assign(bins, 0);
    for (double v : values) {
        auto k = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
        if (k >= bins) k = bins - 1;
        ++h.counts[k];
    }
    return h;
}

}  // namespace regsel
