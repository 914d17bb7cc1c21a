#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "stimloss/distribution.hpp"
#include "stimloss/errors.hpp"
#include "stimloss/kde.hpp"
#include "stimloss/quantile.hpp"
#include "stimloss/rng.hpp"

using namespace stimloss;
using doctest::Approx;

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST_SUITE("rng") {
    TEST_CASE("same seed and stream reproduce, other streams differ") {
        SeededRng a(42, 7), b(42, 7), c(42, 8), d(43, 7);
        bool differs_c = false, differs_d = false;
        for (int i = 0; i < 64; ++i) {
            const auto x = a.next_u64();
            CHECK(x == b.next_u64());
            differs_c |= x != c.next_u64();
            differs_d |= x != d.next_u64();
        }
        CHECK(differs_c);
        CHECK(differs_d);
    }

    TEST_CASE("uniform_index stays in range and covers it") {
        SeededRng r(1, 2);
        std::vector<int> hits(7, 0);
        for (int i = 0; i < 7000; ++i) {
            const auto k = r.uniform_index(7);
            REQUIRE(k < 7);
            ++hits[k];
        }
        for (int h : hits) CHECK(h > 800);
    }

    TEST_CASE("standard_normal moments") {
        SeededRng r(5, 5);
        std::vector<double> xs(200000);
        for (auto& x : xs) x = r.standard_normal();
        CHECK(std::abs(oracle::mean(xs)) < 0.01);
        CHECK(oracle::sd(xs) == Approx(1.0).epsilon(0.01));
    }

    TEST_CASE("fnv1a64 reference vectors") {
        CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
        CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
        CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
    }
}

TEST_SUITE("quantile") {
    TEST_CASE("fixed examples") {
        const std::vector<double> three{3, 1, 2};
        CHECK(quantile(three, 0.5) == 2.0);
        const std::vector<double> eight{8, 7, 6, 5, 4, 3, 2, 1};
        CHECK(quantile(eight, 0.75) == Approx(6.25));
        CHECK(quantile(eight, 1.0) == 8.0);
        CHECK(quantile(eight, 0.0) == 1.0);
        CHECK(median(eight) == Approx(4.5));
        CHECK(iqr(eight) == Approx(6.25 - 2.75));
    }

    TEST_CASE("errors") {
        const std::vector<double> empty;
        CHECK_THROWS_AS(quantile(empty, 0.5), InvalidArgument);
        const std::vector<double> one{1.0};
        CHECK_THROWS_AS(quantile(one, 1.5), InvalidArgument);
        CHECK_THROWS_AS(quantile(one, -0.1), InvalidArgument);
        CHECK(quantile(one, 0.3) == 1.0);
    }

    TEST_CASE("agrees with the sorting oracle on every permutation up to length 8") {
        const double qs[] = {0.0, 0.1, 0.25, 1.0 / 3.0, 0.5, 0.75, 0.9, 1.0};
        for (std::size_t n = 1; n <= 8; ++n) {
            std::vector<double> base(n);
            for (std::size_t i = 0; i < n; ++i) base[i] = std::pow(1.7, static_cast<double>(i)) - 3.0;
            std::vector<double> expected;
            for (double q : qs) expected.push_back(oracle::quantile(base, q));
            std::vector<double> perm = base;
            std::size_t count = 0;
            do {
                for (std::size_t k = 0; k < std::size(qs); ++k)
                    REQUIRE(quantile(perm, qs[k]) == Approx(expected[k]).epsilon(1e-12));
                ++count;
            } while (std::next_permutation(perm.begin(), perm.end()));
            CHECK(count == static_cast<std::size_t>(std::tgamma(static_cast<double>(n) + 1) + 0.5));
        }
    }

    TEST_CASE("monotone in q and bounded by min and max") {
        oracle::Gen g(11);
        for (int t = 0; t < 200; ++t) {
            std::vector<double> xs(g.index(1, 50));
            for (auto& x : xs) x = g.uniform(-5, 5);
            const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
            double prev = -kInf;
            for (int k = 0; k <= 20; ++k) {
                const double v = quantile(xs, k / 20.0);
                CHECK(v >= prev);
                CHECK(v >= *mn);
                CHECK(v <= *mx);
                prev = v;
            }
        }
    }

    TEST_CASE("box summary with whiskers") {
        const std::vector<double> xs{1, 2, 3, 4, 5, 6, 7, 8, 100};
        const auto b = box_summary(xs);
        CHECK(b.q1 == 3.0);
        CHECK(b.median == 5.0);
        CHECK(b.q3 == 7.0);
        CHECK(b.whisker_low == 1.0);
        CHECK(b.whisker_high == 8.0);
    }
}

TEST_SUITE("distribution") {
    TEST_CASE("IQR conversion constant matches the bisected normal quantile") {
        CHECK(kStandardNormalQ3 == Approx(oracle::normal_quantile(0.75)).epsilon(1e-12));
    }

    TEST_CASE("median/IQR conversion") {
        const double z = oracle::normal_quantile(0.75);
        auto p = median_iqr_to_mean_sd(25, 17);
        CHECK(p.mean == 25.0);
        CHECK(p.sd == Approx(17 / (2 * z)).epsilon(1e-12));
        CHECK(p.sd == Approx(12.602).epsilon(5e-4 / 12.602));
        p = median_iqr_to_mean_sd(70, 52.5);
        CHECK(p.mean == 70.0);
        CHECK(p.sd == Approx(52.5 / (2 * z)).epsilon(1e-12));
        CHECK(p.sd == Approx(38.918).epsilon(5e-4 / 38.918));
        p = median_iqr_to_mean_sd(25, 0);
        CHECK(p.mean == 25.0);
        CHECK(p.sd == 0.0);
        CHECK_THROWS_AS(median_iqr_to_mean_sd(25, -1), InvalidArgument);
    }

    TEST_CASE("IQR conversion round trip") {
        oracle::Gen g(3);
        for (int i = 0; i < 1000; ++i) {
            const double iqr_value = g.log_uniform(1e-3, 1e4);
            const auto p = median_iqr_to_mean_sd(g.uniform(0, 100), iqr_value);
            CHECK(2 * kStandardNormalQ3 * p.sd == Approx(iqr_value).epsilon(1e-12));
        }
    }

    TEST_CASE("untruncated standard normal moments") {
        SeededRng r(42, 1);
        const auto xs = sample_trunc_normal(DistributionSpec::mean_sd(0, 1, -kInf, kInf), 1'000'000, r);
        CHECK(std::abs(oracle::mean(xs)) < 0.005);
        CHECK(std::abs(oracle::sd(xs) - 1.0) < 0.005);
    }

    TEST_CASE("truncation is honored and shifts the mean") {
        SeededRng r(42, 2);
        const auto xs = sample_trunc_normal(DistributionSpec::mean_sd(67, 37, 1, kInf), 100000, r);
        CHECK(*std::min_element(xs.begin(), xs.end()) >= 1.0);

        SeededRng r2(42, 3);
        const auto ys = sample_trunc_normal(DistributionSpec::mean_sd(19, 17, 1, kInf), 1'000'000, r2);
        const double m = oracle::mean(ys);
        CHECK(m > 19.0);
        const auto ref = oracle::trunc_normal(19, 17, 1, kInf, 1'000'000, 99);
        CHECK(std::abs(m - oracle::mean(ref)) < 0.05);
        CHECK(std::abs(m - oracle::trunc_normal_mean(19, 17, 1)) < 0.05);
    }

    TEST_CASE("two-sided truncation") {
        SeededRng r(8, 8);
        const auto xs = sample_trunc_normal(DistributionSpec::mean_sd(5, 2, 4, 9), 50000, r);
        for (double x : xs) REQUIRE((x >= 4 && x <= 9));
    }

    TEST_CASE("infeasible and degenerate specs") {
        SeededRng r(1, 1);
        CHECK_THROWS_AS(sample_trunc_normal(DistributionSpec::mean_sd(0, 1, 7, kInf), 10, r),
                        SamplingInfeasible);
        const auto c = sample_trunc_normal(DistributionSpec::mean_sd(3, 0, 1, kInf), 5, r);
        for (double x : c) CHECK(x == 3.0);
        CHECK_THROWS_AS(sample_trunc_normal(DistributionSpec::mean_sd(0.5, 0, 1, kInf), 5, r),
                        SamplingInfeasible);
        CHECK_THROWS_AS(validate(DistributionSpec::mean_sd(1, -1, 0, kInf)), ValidationError);
        CHECK_THROWS_AS(validate(DistributionSpec::mean_sd(1, 1, 5, 2)), ValidationError);
    }

    TEST_CASE("sample means track the parent within a few standard errors") {
        oracle::Gen g(17);
        for (int t = 0; t < 20; ++t) {
            const double mu = g.uniform(-50, 50), s = g.log_uniform(0.1, 30);
            SeededRng r(static_cast<std::uint64_t>(t), 0);
            const auto xs = sample(DistributionSpec::mean_sd(mu, s, -kInf, kInf), 20000, r);
            CHECK(std::abs(oracle::mean(xs) - mu) <= 5 * s / std::sqrt(20000.0));
        }
    }
}

TEST_SUITE("kde") {
    std::vector<double> normal_draws(std::size_t n, std::uint64_t seed) {
        return oracle::trunc_normal(0, 1, -kInf, kInf, n, seed);
    }

    TEST_CASE("density of a standard-normal sample") {
        const auto xs = normal_draws(10000, 4);
        const auto model = fit_kde(xs);
        CHECK(std::abs(model.density(0.0) - 0.3989) < 0.02);
        for (double x : {-2.0, -0.3, 0.0, 1.1})
            CHECK(model.density(x) ==
                  Approx(oracle::kde_density(xs, model.bandwidth(), x)).epsilon(1e-10));
    }

    TEST_CASE("Silverman bandwidth") {
        const std::vector<double> xs{1, 2, 3, 4, 10};
        const double s = oracle::sd(xs);
        const double q = (oracle::quantile(xs, 0.75) - oracle::quantile(xs, 0.25)) / 1.34;
        CHECK(silverman_bandwidth(xs) ==
              Approx(0.9 * std::min(s, q) * std::pow(5.0, -0.2)).epsilon(1e-12));
        const std::vector<double> flat_box{5, 5, 5, 5, 9};
        CHECK(silverman_bandwidth(flat_box) ==
              Approx(0.9 * oracle::sd(flat_box) * std::pow(5.0, -0.2)).epsilon(1e-12));
    }

    TEST_CASE("bimodal sample has two modes") {
        auto xs = oracle::trunc_normal(-3, 0.5, -kInf, kInf, 2000, 1);
        const auto right = oracle::trunc_normal(3, 0.5, -kInf, kInf, 2000, 2);
        xs.insert(xs.end(), right.begin(), right.end());
        const auto model = fit_kde(xs);
        int maxima = 0;
        double a = model.density(-6.0), b = model.density(-5.98);
        for (double x = -5.96; x <= 6.0; x += 0.02) {
            const double c = model.density(x);
            if (b > a && b > c) ++maxima;
            a = b;
            b = c;
        }
        CHECK(maxima == 2);
    }

    TEST_CASE("degenerate inputs") {
        const std::vector<double> same{2, 2, 2};
        CHECK_THROWS_AS(fit_kde(same), DegenerateDistribution);
        const std::vector<double> one{2};
        CHECK_THROWS_AS(fit_kde(one), DegenerateDistribution);
    }

    TEST_CASE("draws follow the numerically integrated density") {
        const auto xs = normal_draws(500, 6);
        const auto model = fit_kde(xs);
        SeededRng r(42, 9);
        auto draws = sample_kde(model, -kInf, 100000, r);
        std::sort(draws.begin(), draws.end());

        // CDF by trapezoidal integration of the oracle density.
        const double lo = -8.0, hi = 8.0, step = 0.005;
        std::vector<double> grid, cdf;
        double acc = 0.0, prev = oracle::kde_density(xs, model.bandwidth(), lo);
        for (double x = lo; x <= hi; x += step) {
            const double d = oracle::kde_density(xs, model.bandwidth(), x);
            acc += 0.5 * (prev + d) * step;
            prev = d;
            grid.push_back(x);
            cdf.push_back(acc);
        }
        double ks = 0.0;
        const double n = static_cast<double>(draws.size());
        for (std::size_t i = 0; i < grid.size(); i += 4) {
            const auto below = std::upper_bound(draws.begin(), draws.end(), grid[i]) - draws.begin();
            ks = std::max(ks, std::abs(static_cast<double>(below) / n - cdf[i]));
        }
        CHECK(ks < 0.01);
    }

    TEST_CASE("lower bound is respected") {
        const std::vector<double> xs{0.1, 0.2, 0.5, 1.0, 3.0};
        SeededRng r(3, 3);
        const auto draws = sample_kde(fit_kde(xs), 0.0, 20000, r);
        CHECK(*std::min_element(draws.begin(), draws.end()) >= 0.0);
    }

    TEST_CASE("vanishing bandwidth reproduces the bootstrap") {
        const std::vector<double> xs{1.5, 2.25, 7.0, 11.0};
        const KdeModel model(xs, 1e-12);
        SeededRng r(4, 4);
        for (double d : sample_kde(model, -kInf, 1000, r)) {
            const bool near = std::any_of(xs.begin(), xs.end(),
                                          [d](double x) { return std::abs(d - x) < 1e-9; });
            REQUIRE(near);
        }
    }

    TEST_CASE("window far from the support is infeasible") {
        const std::vector<double> xs{1, 2, 3};
        SeededRng r(1, 1);
        CHECK_THROWS_AS(sample_kde(fit_kde(xs), 1000.0, 10, r), SamplingInfeasible);
    }
}
