#include "stimloss/quantile.hpp"

#include <algorithm>
#include <cmath>

#include "stimloss/errors.hpp"

namespace stimloss {

namespace {
void check_args(std::size_t n, double q) {
    if (n == 0) throw InvalidArgument("quantile of an empty sequence");
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("quantile level must lie in [0, 1]");
}
}  // namespace

double quantile_sorted(std::span<const double> sorted, double q) {
    check_args(sorted.size(), q);
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

double quantile(std::span<const double> values, double q) {
    check_args(values.size(), q);
    std::vector<double> work(values.begin(), values.end());
    const double pos = q * static_cast<double>(work.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    auto lo_it = work.begin() + static_cast<std::ptrdiff_t>(lo);
    std::nth_element(work.begin(), lo_it, work.end());
    const double lo_val = *lo_it;
    if (frac == 0.0 || lo + 1 >= work.size()) return lo_val;
    // After nth_element everything right of lo_it is >= lo_val; its minimum is
    // the next order statistic.
    const double hi_val = *std::min_element(lo_it + 1, work.end());
    return lo_val + frac * (hi_val - lo_val);
}

double median(std::span<const double> values) { return quantile(values, 0.5); }

double iqr(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
}

BoxSummary box_summary(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    BoxSummary box;
    box.q1 = quantile_sorted(sorted, 0.25);
    box.median = quantile_sorted(sorted, 0.5);
    box.q3 = quantile_sorted(sorted, 0.75);
    const double reach = 1.5 * (box.q3 - box.q1);
    const double lo_fence = box.q1 - reach;
    const double hi_fence = box.q3 + reach;
    box.whisker_low = *std::lower_bound(sorted.begin(), sorted.end(), lo_fence);
    box.whisker_high = *(std::upper_bound(sorted.begin(), sorted.end(), hi_fence) - 1);
    return box;
}

}  // namespace stimloss
