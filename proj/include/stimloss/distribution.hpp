#pragma once

#include <cstddef>
#include <limits>
#include <string_view>
#include <vector>

#include "stimloss/rng.hpp"

namespace stimloss {

/// 0.75 quantile of the standard normal. Twice this converts a normal IQR
/// into a standard deviation.
inline constexpr double kStandardNormalQ3 = 0.6744897501960817;

enum class DistributionKind { TruncNormalMeanSd, TruncNormalMedianIqr, EmpiricalKde };

std::string_view to_string(DistributionKind kind) noexcept;

/// Declarative description of a positive random quantity.
///
/// For the truncated-normal kinds, `location`/`scale` are the parameters of
/// the untruncated parent (mean/sd, or median/IQR converted under a normal
/// assumption). For EmpiricalKde they are informational and `samples` drives
/// sampling. Bounds are inclusive and in the same unit as the samples.
struct DistributionSpec {
    DistributionKind kind = DistributionKind::TruncNormalMeanSd;
    double location = 0.0;
    double scale = 0.0;
    double lower_bound = -std::numeric_limits<double>::infinity();
    double upper_bound = std::numeric_limits<double>::infinity();
    std::vector<double> samples;

    static DistributionSpec mean_sd(double mean, double sd, double lower, double upper);
    static DistributionSpec median_iqr(double median, double iqr, double lower, double upper);
    static DistributionSpec kde(std::vector<double> samples, double lower, double upper);
};

/// Throws ValidationError describing the first violated invariant.
void validate(const DistributionSpec& spec);

struct NormalParams {
    double mean = 0.0;
    double sd = 0.0;
};

/// Normal-theory conversion: mean = median, sd = IQR / (2 z_0.75).
NormalParams median_iqr_to_mean_sd(double median, double iqr);

/// Parent-normal parameters of a truncated-normal spec.
NormalParams parent_normal(const DistributionSpec& spec);

double standard_normal_cdf(double x) noexcept;

/// Rejection sampling from normal(mean, sd) conditioned on [lower, upper].
/// Throws SamplingInfeasible when the bounds miss the +-6 sd window around
/// the mean entirely.
std::vector<double> sample_trunc_normal(const DistributionSpec& spec, std::size_t n,
                                        SeededRng& rng);

/// Dispatches on spec.kind; KDE specs fit their model from spec.samples.
std::vector<double> sample(const DistributionSpec& spec, std::size_t n, SeededRng& rng);

}  // namespace stimloss
