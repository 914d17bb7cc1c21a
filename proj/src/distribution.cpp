#include "stimloss/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stimloss/errors.hpp"
#include "stimloss/kde.hpp"

namespace stimloss {

std::string_view to_string(DistributionKind kind) noexcept {
    switch (kind) {
        case DistributionKind::TruncNormalMeanSd: return "mean_sd";
        case DistributionKind::TruncNormalMedianIqr: return "median_iqr";
        case DistributionKind::EmpiricalKde: return "kde";
    }
    return "unknown";
}

DistributionSpec DistributionSpec::mean_sd(double mean, double sd, double lower, double upper) {
    return {DistributionKind::TruncNormalMeanSd, mean, sd, lower, upper, {}};
}

DistributionSpec DistributionSpec::median_iqr(double median, double iqr, double lower,
                                              double upper) {
    return {DistributionKind::TruncNormalMedianIqr, median, iqr, lower, upper, {}};
}

DistributionSpec DistributionSpec::kde(std::vector<double> samples, double lower, double upper) {
    DistributionSpec spec{DistributionKind::EmpiricalKde, 0.0, 0.0, lower, upper,
                          std::move(samples)};
    if (!spec.samples.empty()) {
        std::vector<double> sorted = spec.samples;
        std::sort(sorted.begin(), sorted.end());
        spec.location = sorted[sorted.size() / 2];
        spec.scale = sorted.back() - sorted.front();
    }
    return spec;
}

void validate(const DistributionSpec& spec) {
    if (std::isnan(spec.location) || !std::isfinite(spec.scale) || spec.scale < 0.0)
        throw ValidationError("scale must be a finite value >= 0");
    if (std::isnan(spec.lower_bound) || std::isnan(spec.upper_bound) ||
        !(spec.lower_bound < spec.upper_bound))
        throw ValidationError("lower_bound must be < upper_bound");
    if (spec.kind == DistributionKind::EmpiricalKde) {
        if (spec.samples.size() < 2)
            throw ValidationError("kde requires at least 2 samples");
        const auto [lo, hi] = std::minmax_element(spec.samples.begin(), spec.samples.end());
        if (*lo == *hi) throw ValidationError("kde requires at least 2 distinct sample values");
        for (double s : spec.samples)
            if (!std::isfinite(s)) throw ValidationError("kde samples must be finite");
    } else if (!std::isfinite(spec.location)) {
        throw ValidationError("location must be finite");
    }
}

NormalParams median_iqr_to_mean_sd(double median, double iqr) {
    if (!(iqr >= 0.0)) throw InvalidArgument("IQR must be >= 0");
    return {median, iqr / (2.0 * kStandardNormalQ3)};
}

NormalParams parent_normal(const DistributionSpec& spec) {
    switch (spec.kind) {
        case DistributionKind::TruncNormalMeanSd: return {spec.location, spec.scale};
        case DistributionKind::TruncNormalMedianIqr:
            return median_iqr_to_mean_sd(spec.location, spec.scale);
        case DistributionKind::EmpiricalKde: break;
    }
    throw InvalidArgument("parent_normal: spec is not a truncated normal");
}

double standard_normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

std::vector<double> sample_trunc_normal(const DistributionSpec& spec, std::size_t n,
                                        SeededRng& rng) {
    if (spec.kind == DistributionKind::EmpiricalKde)
        throw InvalidArgument("sample_trunc_normal: spec is a KDE");
    if (n == 0) throw InvalidArgument("sample count must be >= 1");
    validate(spec);
    const auto [mean, sd] = parent_normal(spec);
    const double lo = spec.lower_bound;
    const double hi = spec.upper_bound;

    if (hi < mean - 6.0 * sd || lo > mean + 6.0 * sd)
        throw SamplingInfeasible("truncation window [" + std::to_string(lo) + ", " +
                                 std::to_string(hi) + "] excludes the +-6 sd region around " +
                                 std::to_string(mean));

    std::vector<double> out;
    out.reserve(n);
    if (sd == 0.0) {
        out.assign(n, mean);
        return out;
    }
    while (out.size() < n) {
        const double v = mean + sd * rng.standard_normal();
        if (v >= lo && v <= hi) out.push_back(v);
    }
    return out;
}

std::vector<double> sample(const DistributionSpec& spec, std::size_t n, SeededRng& rng) {
    if (spec.kind == DistributionKind::EmpiricalKde) {
        validate(spec);
        return sample_kde(fit_kde(spec.samples), spec.lower_bound, n, rng, spec.upper_bound);
    }
    return sample_trunc_normal(spec, n, rng);
}

}  // namespace stimloss
