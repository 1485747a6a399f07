#include <doctest.h>

#include <cmath>
#include <numeric>

#include "tailrisk/dual.hpp"
#include "tailrisk/errors.hpp"
#include "tailrisk/pipeline.hpp"
#include "tailrisk/rng.hpp"
#include "tailrisk/simulate.hpp"

using namespace tailrisk;
using pipeline::TailSample;
using pipeline::ThresholdSpec;

namespace {

TailSample synthetic_sample(double alpha, double sigma, double L, double H,
                            std::size_t n, std::uint64_t seed) {
    const shadow::Model m(alpha, sigma, L, H, L);
    simulate::Config cfg;
    cfg.seed = seed;
    cfg.n = n;
    TailSample s;
    s.values = simulate::sample_shadow_y(m, cfg).values;
    s.source = "synthetic";
    s.n_total = s.values.size();
    return s;
}

}  // namespace

TEST_CASE("resolve_threshold: quantile arithmetic") {
    std::vector<double> values(1000);
    rng::Stream stream(5, 0);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = stream.uniform(i);

    const double u = pipeline::resolve_threshold(values, ThresholdSpec::at_quantile(0.95));
    const std::size_t exceed = std::count_if(values.begin(), values.end(),
                                             [&](double y) { return y > u; });
    CHECK(exceed == 50);

    CHECK(pipeline::resolve_threshold(values, ThresholdSpec::at_value(0.5)) == 0.5);
    CHECK_THROWS_AS(ThresholdSpec::at_quantile(1.5), std::invalid_argument);
}

TEST_CASE("fit_shadow_model: parameter recovery on synthetic data") {
    const auto sample = synthetic_sample(1.25, 2.0, 1.0, 1e4, 100000, 321);
    const auto outcome = pipeline::fit_shadow_model(sample, 1.0, 1e4,
                                                    ThresholdSpec::at_value(1.0));
    REQUIRE(outcome.model.has_value());
    CHECK(std::fabs(outcome.model->alpha - 1.25) <= 0.1);
    CHECK(std::fabs(outcome.model->sigma - 2.0) <= 0.15);
    CHECK(outcome.n_exceedances == sample.values.size());
    CHECK(outcome.threshold_y == 1.0);
    CHECK(outcome.warnings.empty());
}

TEST_CASE("fit_shadow_model: bound violations name the offending rows") {
    TailSample s;
    s.values = {1.0, 2.0, 11.0, 3.0};
    s.source = "inline";
    s.n_total = 4;
    try {
        pipeline::fit_shadow_model(s, 0.0, 11.0, ThresholdSpec::at_value(1.5));
        FAIL("expected DataError");
    } catch (const DataError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("#3") != std::string::npos);
    }

    s.values = {1.0, -2.0, 3.0};
    CHECK_THROWS_AS(pipeline::fit_shadow_model(s, 0.0, 11.0, ThresholdSpec::at_value(1.5)),
                    DataError);
}

TEST_CASE("fit_shadow_model: too few exceedances") {
    TailSample s;
    for (int i = 0; i < 100; ++i) s.values.push_back(1.0 + i % 7);
    s.n_total = s.values.size();
    CHECK_THROWS_AS(pipeline::fit_shadow_model(s, 0.0, 100.0, ThresholdSpec::at_value(7.5)),
                    InsufficientDataError);
}

TEST_CASE("fit_shadow_model: non-heavy tail downgrades to a warning") {
    // uniform data has a finite-endpoint tail: xi_hat < 0
    TailSample s;
    rng::Stream stream(77, 0);
    for (std::size_t i = 0; i < 5000; ++i) {
        s.values.push_back(10.0 * stream.uniform(i));
    }
    s.n_total = s.values.size();
    const auto outcome = pipeline::fit_shadow_model(s, 0.0, 1e6,
                                                    ThresholdSpec::at_quantile(0.9));
    CHECK_FALSE(outcome.model.has_value());
    REQUIRE(outcome.warnings.size() == 1);
    CHECK(outcome.warnings[0].find("not positive") != std::string::npos);
}

TEST_CASE("likelihood equivalence: y-space and z-space fits agree") {
    const double L = 1.0, H = 1e4;
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        const auto sample = synthetic_sample(1.25, 2.0, L, H, 1500, seed);
        const double u = L;

        std::vector<double> w;
        const dual::Transform t(L, H);
        std::vector<double> ys(sample.values);
        std::sort(ys.begin(), ys.end());
        for (double y : ys) w.push_back(dual::phi(t, y) - dual::phi(t, u));

        const auto zfit = gpd::fit_mle(w, dual::phi(t, u));
        const auto yfit = pipeline::fit_mle_y_space(ys, u, L, H);

        CAPTURE(seed);
        CHECK(std::fabs(zfit.params.xi - yfit.params.xi) <= 1e-6);
        CHECK(std::fabs(zfit.params.sigma - yfit.params.sigma) <=
              1e-6 * std::max(1.0, zfit.params.sigma));

        // the two maximized likelihoods differ by sum log phi'(y) exactly
        double jacobian = 0.0;
        for (double y : ys) jacobian += std::log(H / (H - y));
        const double gap = yfit.log_likelihood - zfit.log_likelihood;
        CHECK(std::fabs(gap - jacobian) <= 1e-8 * std::max(1.0, std::fabs(jacobian)));
    }
}

TEST_CASE("build_report: assembles measures, naive contrast, and provenance") {
    const auto sample = synthetic_sample(0.8, 1.0, 1.0, 1e6, 20000, 99);
    pipeline::ReportRequest req;
    req.lower_bound = 1.0;
    req.upper_bound = 1e6;
    req.threshold = ThresholdSpec::at_quantile(0.95);
    req.h_grid = std::vector<double>{1e5, 1e6, 1e7};
    req.seed = 99;
    const auto report = pipeline::build_report(sample, req, "fnv1a64:test", "t0");

    REQUIRE(report.fit.model.has_value());
    REQUIRE(report.measures.has_value());
    CHECK(report.measures->shadow_mean > report.fit.threshold_y);
    CHECK(report.measures->shadow_mean < 1e6);
    CHECK(report.measures->var_levels.size() == 2);
    CHECK(report.measures->es_levels.size() == 2);

    // naive contrast: same exceedances fitted without the transform
    CHECK(report.naive.sample_mean_above_u > report.fit.threshold_y);
    CHECK(report.naive.fit_on_y.n_excesses == report.n_exceedances);

    REQUIRE(report.sensitivity.has_value());
    CHECK(report.sensitivity->size() == 3);
    CHECK((*report.sensitivity)[0].second <= (*report.sensitivity)[1].second);

    CHECK(report.provenance.input_digest == "fnv1a64:test");
    CHECK(report.provenance.seed == 99);
    CHECK(report.provenance.timestamp == "t0");

    pipeline::ReportRequest bad = req;
    bad.var_levels = {1.5};
    CHECK_THROWS_AS(pipeline::build_report(sample, bad, "d", "t"),
                    std::invalid_argument);
}
