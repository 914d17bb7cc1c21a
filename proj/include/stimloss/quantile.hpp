#pragma once

#include <span>
#include <vector>

namespace stimloss {

/// Linear-interpolation quantile: position q*(n-1) in the sorted values.
/// q = 0 gives the minimum and q = 1 the maximum. Throws InvalidArgument on
/// empty input or q outside [0, 1].
double quantile(std::span<const double> values, double q);

/// Same convention on input that is already sorted ascending.
double quantile_sorted(std::span<const double> sorted, double q);

double median(std::span<const double> values);

/// Q3 - Q1 under the same convention.
double iqr(std::span<const double> values);

/// Quartiles plus Tukey whiskers (most extreme values within 1.5 IQR of the
/// box). Values beyond the whiskers are outliers and are not reported.
struct BoxSummary {
    double whisker_low = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double whisker_high = 0.0;
};

BoxSummary box_summary(std::span<const double> values);

}  // namespace stimloss
