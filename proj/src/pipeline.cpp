#include "tailrisk/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "tailrisk/detail/nelder_mead.hpp"
#include "tailrisk/dual.hpp"
#include "tailrisk/errors.hpp"
#include "tailrisk/version.hpp"

namespace tailrisk::pipeline {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_bounds(std::span<const double> values, double L, double H) {
    if (!(L < H) || !std::isfinite(L) || !std::isfinite(H)) {
        throw DataError("bounds must satisfy L < H with both finite");
    }
    std::ostringstream bad;
    std::size_t n_bad = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] >= H) {
            if (n_bad < 10) {
                bad << (n_bad ? ", " : "") << "#" << (i + 1) << " (value " << values[i]
                    << ")";
            }
            ++n_bad;
        }
        if (values[i] < L) {
            throw DataError("observation #" + std::to_string(i + 1) +
                            " lies below the lower bound L");
        }
    }
    if (n_bad > 0) {
        throw DataError("upper bound violated: " + std::to_string(n_bad) +
                        " observation(s) at or above H, e.g. " + bad.str() +
                        "; the stated H is falsified by the data");
    }
}

}  // namespace

ThresholdSpec ThresholdSpec::at_quantile(double q) {
    if (!(q > 0.0) || !(q < 1.0)) {
        throw std::invalid_argument("threshold quantile must lie in (0, 1)");
    }
    return {Kind::kQuantile, q};
}

double resolve_threshold(std::span<const double> values, const ThresholdSpec& spec) {
    if (spec.kind == ThresholdSpec::Kind::kValue) return spec.value;
    if (values.empty()) {
        throw DataError("cannot resolve a quantile threshold on an empty sample");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    auto k = static_cast<std::size_t>(std::ceil(spec.value * n));
    if (k < 1) k = 1;
    if (k > sorted.size()) k = sorted.size();
    return sorted[k - 1];
}

FitOutcome fit_shadow_model(const TailSample& sample, double L, double H,
                            const ThresholdSpec& spec) {
    validate_bounds(sample.values, L, H);
    const double u = resolve_threshold(sample.values, spec);
    if (!(u >= L) || !(u < H)) {
        throw DataError("resolved threshold " + std::to_string(u) +
                        " is outside [L, H)");
    }
    const dual::Transform t(L, H);
    const double zu = dual::phi(t, u);

    std::vector<double> w;
    for (double y : sample.values) {
        if (y > u) w.push_back(dual::phi(t, y) - zu);
    }
    if (w.size() < kMinExceedances) {
        throw InsufficientDataError("only " + std::to_string(w.size()) +
                                    " exceedances of u = " + std::to_string(u) +
                                    "; need at least " +
                                    std::to_string(kMinExceedances));
    }

    FitOutcome out;
    out.threshold_y = u;
    out.threshold_z = zu;
    out.n_exceedances = w.size();
    out.dual_fit = gpd::fit_mle(std::move(w), zu);
    const double xi = out.dual_fit.params.xi;
    if (xi > 0.0) {
        out.model.emplace(1.0 / xi, out.dual_fit.params.sigma, L, H, u);
    } else {
        out.warnings.push_back(
            "fitted shape is not positive (xi_hat = " + std::to_string(xi) +
            "): the dual tail does not look like a power law, shadow risk "
            "measures are not reported");
    }
    return out;
}

gpd::Fit fit_mle_y_space(std::span<const double> exceedances_y, double u, double L,
                         double H) {
    if (exceedances_y.size() < gpd::kMinExcessesMle) {
        throw InsufficientDataError("fit_mle_y_space: too few exceedances");
    }
    std::vector<double> ys(exceedances_y.begin(), exceedances_y.end());
    std::sort(ys.begin(), ys.end());
    const dual::Transform t(L, H);
    const double zu = dual::phi(t, u);
    std::vector<double> w(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) {
        if (!(ys[i] > u) || ys[i] >= H) {
            throw std::invalid_argument("fit_mle_y_space: exceedance outside (u, H)");
        }
        w[i] = dual::phi(t, ys[i]) - zu;
    }

    // identical start grid to the dual-space fit
    const auto starts = gpd::mle_start_points(w);
    auto objective = [&](const std::array<double, 2>& theta) -> double {
        const double xi = theta[0];
        const double sigma = std::exp(theta[1]);
        if (!(xi > 0.0) || xi > 10.0 || !std::isfinite(sigma) || sigma <= 0.0) {
            return kInf;
        }
        const shadow::Model m(1.0 / xi, sigma, L, H, u);
        double ll = 0.0;
        for (double y : ys) ll += shadow::log_pdf(m, y);
        return -ll;
    };

    detail::NelderMeadResult best;
    best.f = kInf;
    for (const auto& start : starts) {
        const auto r =
            detail::nelder_mead_2d(objective, start, {0.1, 0.25}, 1e-13, 1e-9, 800);
        if (r.f < best.f) best = r;
    }
    if (!std::isfinite(best.f)) {
        throw NonConvergenceError("fit_mle_y_space: maximization failed from all starts");
    }
    gpd::Fit fit;
    fit.params = gpd::Params{best.x[0], std::exp(best.x[1])};
    fit.threshold = u;
    fit.n_excesses = ys.size();
    fit.log_likelihood = -best.f;
    fit.method = gpd::FitMethod::kMle;
    return fit;
}

NaiveBlock naive_block(std::span<const double> exceedances_y, double u,
                       const gpd::Fit& dual_fit) {
    NaiveBlock out;
    std::vector<double> excess(exceedances_y.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < exceedances_y.size(); ++i) {
        excess[i] = exceedances_y[i] - u;
        acc += exceedances_y[i];
    }
    out.sample_mean_above_u = acc / static_cast<double>(exceedances_y.size());
    out.fit_on_y = gpd::fit_mle(std::move(excess), u);
    out.dual_mean_finite = gpd::moment_exists(dual_fit.params, 1.0);
    return out;
}

RiskReport build_report(const TailSample& sample, const ReportRequest& req,
                        const std::string& input_digest, const std::string& timestamp) {
    RiskReport report;
    report.source = sample.source;
    report.n_total = sample.values.size();
    report.lower_bound = req.lower_bound;
    report.upper_bound = req.upper_bound;
    report.threshold_spec = req.threshold;

    report.fit = fit_shadow_model(sample, req.lower_bound, req.upper_bound, req.threshold);
    report.n_exceedances = report.fit.n_exceedances;

    std::vector<double> exceed;
    for (double y : sample.values) {
        if (y > report.fit.threshold_y) exceed.push_back(y);
    }
    report.naive = naive_block(exceed, report.fit.threshold_y, report.fit.dual_fit);

    for (double p : req.var_levels) {
        if (!(p > 0.0) || !(p < 1.0)) {
            throw std::invalid_argument("VaR level outside (0, 1)");
        }
    }
    for (double p : req.es_levels) {
        if (!(p > 0.0) || !(p < 1.0)) {
            throw std::invalid_argument("ES level outside (0, 1)");
        }
    }
    if (report.fit.model) {
        report.measures =
            shadow::risk_measures(*report.fit.model, req.var_levels, req.es_levels);
        if (req.h_grid) {
            report.sensitivity = shadow::mean_vs_upper_bound(
                report.fit.model->alpha, report.fit.model->sigma, req.lower_bound,
                report.fit.threshold_y, *req.h_grid);
        }
    }

    report.provenance.input_digest = input_digest;
    report.provenance.seed = req.seed;
    report.provenance.tool_version = kToolVersion;
    report.provenance.timestamp = timestamp;
    return report;
}

}  // namespace tailrisk::pipeline
