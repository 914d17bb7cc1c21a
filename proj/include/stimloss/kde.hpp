#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "stimloss/rng.hpp"

namespace stimloss {

/// Gaussian-kernel density estimate over a set of support points.
class KdeModel {
public:
    /// Throws InvalidArgument if support is empty or bandwidth is not > 0.
    KdeModel(std::vector<double> support, double bandwidth);

    double bandwidth() const noexcept { return bandwidth_; }
    std::span<const double> support() const noexcept { return support_; }

    double density(double x) const;
    double cdf(double x) const;

private:
    std::vector<double> support_;
    double bandwidth_;
};

/// Silverman's rule of thumb: h = 0.9 min(sd, IQR/1.34) n^(-1/5). Falls back
/// to sd alone when the IQR is zero.
double silverman_bandwidth(std::span<const double> samples);

/// Throws DegenerateDistribution unless there are >= 2 distinct samples.
KdeModel fit_kde(std::span<const double> samples);

/// Smoothed bootstrap: a uniformly chosen support point plus N(0, h) noise,
/// redrawn until it lands inside [lower_bound, upper_bound].
std::vector<double> sample_kde(const KdeModel& model, double lower_bound, std::size_t n,
                               SeededRng& rng,
                               double upper_bound = std::numeric_limits<double>::infinity());

}  // namespace stimloss
