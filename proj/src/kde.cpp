#include "stimloss/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "stimloss/distribution.hpp"
#include "stimloss/errors.hpp"
#include "stimloss/quantile.hpp"

namespace stimloss {

KdeModel::KdeModel(std::vector<double> support, double bandwidth)
    : support_(std::move(support)), bandwidth_(bandwidth) {
    if (support_.empty()) throw InvalidArgument("KDE needs at least one support point");
    if (!(bandwidth_ > 0.0) || !std::isfinite(bandwidth_))
        throw InvalidArgument("KDE bandwidth must be > 0");
}

double KdeModel::density(double x) const {
    const double norm = 1.0 / (static_cast<double>(support_.size()) * bandwidth_ *
                               std::sqrt(2.0 * std::numbers::pi));
    double sum = 0.0;
    for (double s : support_) {
        const double u = (x - s) / bandwidth_;
        sum += std::exp(-0.5 * u * u);
    }
    return sum * norm;
}

double KdeModel::cdf(double x) const {
    double sum = 0.0;
    for (double s : support_) sum += standard_normal_cdf((x - s) / bandwidth_);
    return sum / static_cast<double>(support_.size());
}

double silverman_bandwidth(std::span<const double> samples) {
    const auto n = static_cast<double>(samples.size());
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
    double ss = 0.0;
    for (double s : samples) ss += (s - mean) * (s - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    const double spread = iqr(samples) / 1.34;
    const double a = spread > 0.0 ? std::min(sd, spread) : sd;
    return 0.9 * a * std::pow(n, -0.2);
}

KdeModel fit_kde(std::span<const double> samples) {
    if (samples.size() < 2) throw DegenerateDistribution("KDE needs at least 2 samples");
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    if (*lo == *hi) throw DegenerateDistribution("KDE samples are all identical");
    return KdeModel({samples.begin(), samples.end()}, silverman_bandwidth(samples));
}

std::vector<double> sample_kde(const KdeModel& model, double lower_bound, std::size_t n,
                               SeededRng& rng, double upper_bound) {
    if (!(lower_bound < upper_bound)) throw InvalidArgument("KDE bounds must satisfy lower < upper");
    const auto support = model.support();
    const auto [lo, hi] = std::minmax_element(support.begin(), support.end());
    const double reach = 8.0 * model.bandwidth();
    if (lower_bound > *hi + reach || upper_bound < *lo - reach)
        throw SamplingInfeasible("KDE truncation window excludes all support points");

    std::vector<double> out;
    out.reserve(n);
    while (out.size() < n) {
        const double centre = support[rng.uniform_index(support.size())];
        const double v = centre + model.bandwidth() * rng.standard_normal();
        if (v >= lower_bound && v <= upper_bound) out.push_back(v);
    }
    return out;
}

}  // namespace stimloss
