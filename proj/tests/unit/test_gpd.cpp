#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "tailrisk/errors.hpp"
#include "tailrisk/gpd.hpp"
#include "tailrisk/numerics.hpp"
#include "tailrisk/simulate.hpp"

using namespace tailrisk;
using gpd::Params;

TEST_CASE("gpd cdf/pdf: closed-form spot values") {
    CHECK(gpd::cdf(Params{0.0, 2.0}, 2.0) == doctest::Approx(-std::expm1(-1.0)).epsilon(1e-14));
    CHECK(gpd::cdf(Params{1.0, 1.0}, 0.0) == 0.0);
    CHECK(gpd::cdf(Params{0.5, 1.0}, 3.0) == doctest::Approx(0.84).epsilon(1e-14));

    CHECK(gpd::pdf(Params{0.5, 1.0}, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(gpd::pdf(Params{0.0, 2.0}, 2.0) ==
          doctest::Approx(std::exp(-1.0) / 2.0).epsilon(1e-14));
}

TEST_CASE("gpd pdf: integrates to one") {
    const Params p{1.25, 3.0};
    auto r = numerics::integrate_adaptive([&](double w) { return gpd::pdf(p, w); }, 0.0,
                                          numerics::kInfinity, 1e-10);
    CHECK(std::fabs(r.value - 1.0) <= 1e-9);
}

TEST_CASE("gpd quantile: spot values and inversion") {
    CHECK(gpd::quantile(Params{0.5, 1.0}, 0.84) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(gpd::quantile(Params{0.5, 1.0}, 0.0) == 0.0);
    CHECK(gpd::quantile(Params{0.0, 2.0}, -std::expm1(-1.0)) ==
          doctest::Approx(2.0).epsilon(1e-13));

    for (const Params p : {Params{-0.4, 0.5}, Params{0.0, 1.0}, Params{1.2, 2.0}}) {
        for (double q : {0.0, 0.1, 0.5, 0.9, 0.99, 0.999999}) {
            CHECK(std::fabs(gpd::cdf(p, gpd::quantile(p, q)) - q) <= 1e-12);
        }
    }
    CHECK_THROWS_AS(gpd::quantile(Params{0.5, 1.0}, 1.0), std::domain_error);
    CHECK_THROWS_AS(gpd::quantile(Params{0.5, 1.0}, -0.1), std::domain_error);
}

TEST_CASE("gpd: continuity across xi = 0") {
    const Params eps{1e-9, 1.0};
    const Params zero{0.0, 1.0};
    for (double w = 0.0; w <= 100.0; w += 2.5) {
        CHECK(std::fabs(gpd::cdf(eps, w) - gpd::cdf(zero, w)) <= 1e-7);
    }
}

TEST_CASE("gpd: domain errors at the support edges") {
    CHECK_THROWS_AS(gpd::cdf(Params{0.5, 1.0}, -1e-9), std::domain_error);
    CHECK_THROWS_AS(gpd::cdf(Params{-0.5, 1.0}, 2.001), std::domain_error);
    CHECK(gpd::cdf(Params{-0.5, 1.0}, 2.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(gpd::pdf(Params{0.5, 0.0}, 1.0), std::domain_error);
}

TEST_CASE("moment_exists: xi < 1/p rule") {
    CHECK_FALSE(gpd::moment_exists(Params{1.2, 1.0}, 1.0));
    CHECK(gpd::moment_exists(Params{0.0, 1.0}, 10.0));
    CHECK_FALSE(gpd::moment_exists(Params{0.5, 1.0}, 2.0));
    CHECK(gpd::moment_exists(Params{0.49, 1.0}, 2.0));
    CHECK_THROWS_AS(gpd::moment_exists(Params{0.5, 1.0}, 0.0), std::domain_error);
}

TEST_CASE("fit_mle: recovers heavy and exponential tails") {
    simulate::Config cfg;
    cfg.seed = 20240917;
    cfg.n = 100000;

    auto heavy = simulate::sample_gpd(Params{1.2, 1.0}, cfg);
    const auto fit = gpd::fit_mle(heavy);
    CHECK(std::fabs(fit.params.xi - 1.2) <= 0.05);
    CHECK(std::fabs(fit.params.sigma - 1.0) <= 0.05);
    CHECK(std::isfinite(fit.log_likelihood));
    CHECK(fit.std_errors.has_value());

    cfg.seed = 7;
    auto expo = simulate::sample_gpd(Params{0.0, 2.0}, cfg);
    const auto efit = gpd::fit_mle(expo);
    CHECK(std::fabs(efit.params.xi) <= 0.02);
    CHECK(std::fabs(efit.params.sigma - 2.0) <= 0.05);
}

TEST_CASE("fit_mle: degenerate and undersized samples") {
    CHECK_THROWS_AS(gpd::fit_mle({1.0, 1.0, 1.0, 1.0, 1.0}), DegenerateSampleError);
    CHECK_THROWS_AS(gpd::fit_mle({1.0, 2.0}), InsufficientDataError);
    CHECK_THROWS_AS(gpd::fit_mle({1.0, 2.0, 3.0, -1.0, 5.0}), std::invalid_argument);
}

TEST_CASE("fit_mle: stationarity of the likelihood at the optimum") {
    simulate::Config cfg;
    cfg.seed = 99;
    cfg.n = 20000;
    auto w = simulate::sample_gpd(Params{0.6, 1.5}, cfg);
    std::sort(w.begin(), w.end());
    const auto fit = gpd::fit_mle(w);

    const double hx = 1e-5, hs = 1e-5 * fit.params.sigma;
    const double gx = (gpd::log_likelihood(Params{fit.params.xi + hx, fit.params.sigma}, w) -
                       gpd::log_likelihood(Params{fit.params.xi - hx, fit.params.sigma}, w)) /
                      (2 * hx);
    const double gs = (gpd::log_likelihood(Params{fit.params.xi, fit.params.sigma + hs}, w) -
                       gpd::log_likelihood(Params{fit.params.xi, fit.params.sigma - hs}, w)) /
                      (2 * hs);
    const double grad_norm = std::sqrt(gx * gx + gs * gs);
    CHECK(grad_norm <= 1e-4 * std::fabs(fit.log_likelihood));
}

TEST_CASE("fit_moments: recovery, reliability flag, and zero variance") {
    simulate::Config cfg;
    cfg.seed = 31337;
    cfg.n = 1000000;
    auto draws = simulate::sample_gpd(Params{0.25, 1.0}, cfg);
    const auto fit = gpd::fit_moments(draws);
    CHECK(std::fabs(fit.params.xi - 0.25) <= 0.02);
    CHECK_FALSE(fit.unreliable);

    cfg.n = 100000;
    auto expo = simulate::sample_gpd(Params{0.0, 1.0}, cfg);
    const auto efit = gpd::fit_moments(expo);
    CHECK(std::fabs(efit.params.xi) <= 0.01);

    auto wild = simulate::sample_gpd(Params{1.2, 1.0}, cfg);
    CHECK(gpd::fit_moments(wild).unreliable);

    CHECK_THROWS_AS(gpd::fit_moments({2.0, 2.0, 2.0}), DegenerateSampleError);
}

TEST_CASE("fitters: permutation invariance and MLE optimality") {
    simulate::Config cfg;
    cfg.seed = 5150;
    cfg.n = 4000;
    auto w = simulate::sample_gpd(Params{0.4, 2.0}, cfg);
    auto shuffled = w;
    std::mt19937_64 rng(17);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);

    const auto a = gpd::fit_mle(w);
    const auto b = gpd::fit_mle(shuffled);
    CHECK(a.params.xi == b.params.xi);
    CHECK(a.params.sigma == b.params.sigma);
    CHECK(a.log_likelihood == b.log_likelihood);

    const auto ma = gpd::fit_moments(w);
    const auto mb = gpd::fit_moments(shuffled);
    CHECK(ma.params.xi == mb.params.xi);
    CHECK(ma.params.sigma == mb.params.sigma);

    CHECK(a.log_likelihood >= ma.log_likelihood);
}

TEST_CASE("empirical_mean_excess: pairs and omissions") {
    const std::vector<double> sample{1.0, 2.0, 3.0, 4.0, 5.0};
    const std::vector<double> thresholds{3.0, 4.5, 5.0};
    const auto pairs = gpd::empirical_mean_excess(sample, thresholds);
    REQUIRE(pairs.size() == 1);  // u=4.5 and u=5 have fewer than 2 exceedances
    CHECK(pairs[0].first == 3.0);
    CHECK(pairs[0].second == doctest::Approx(1.5));

    const std::vector<double> unsorted{3.0, 1.0, 2.0};
    CHECK_THROWS_AS(gpd::empirical_mean_excess(unsorted, thresholds),
                    std::invalid_argument);
}

TEST_CASE("empirical_mean_excess: GPD linearity in the threshold") {
    simulate::Config cfg;
    cfg.seed = 271828;
    cfg.n = 200000;
    auto w = simulate::sample_gpd(Params{0.5, 1.0}, cfg);
    std::sort(w.begin(), w.end());

    std::vector<double> thresholds;
    for (double q : {0.50, 0.60, 0.70, 0.80, 0.90}) {
        thresholds.push_back(w[static_cast<std::size_t>(q * (w.size() - 1))]);
    }
    const auto pairs = gpd::empirical_mean_excess(w, thresholds);
    REQUIRE(pairs.size() == thresholds.size());

    // least-squares slope vs the theoretical xi/(1-xi) = 1
    double su = 0, sm = 0, suu = 0, sum = 0;
    for (const auto& [u, m] : pairs) {
        su += u;
        sm += m;
        suu += u * u;
        sum += u * m;
    }
    const double n = static_cast<double>(pairs.size());
    const double slope = (n * sum - su * sm) / (n * suu - su * su);
    CHECK(std::fabs(slope - 1.0) <= 0.15);
}
