#include "tailrisk/gpd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "tailrisk/detail/nelder_mead.hpp"
#include "tailrisk/errors.hpp"

namespace tailrisk::gpd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_params(const Params& p) {
    if (!(p.sigma > 0.0) || !std::isfinite(p.sigma) || !std::isfinite(p.xi)) {
        throw std::domain_error("gpd: sigma must be positive and parameters finite");
    }
}

void check_support(const Params& p, double w) {
    if (!(w >= 0.0)) {
        throw std::domain_error("gpd: excess must be >= 0; got " + std::to_string(w));
    }
    if (p.xi < 0.0 && w > -p.sigma / p.xi) {
        throw std::domain_error("gpd: excess beyond the finite right endpoint");
    }
}

struct SampleMoments {
    double mean;
    double variance;  // unbiased
};

SampleMoments sample_moments(std::span<const double> xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, ss / (n - 1.0)};
}

void validate_excesses(const std::vector<double>& w, std::size_t floor_count) {
    if (w.size() < floor_count) {
        throw InsufficientDataError("gpd fit: need at least " +
                                    std::to_string(floor_count) + " excesses, got " +
                                    std::to_string(w.size()));
    }
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!(w[i] > 0.0) || !std::isfinite(w[i])) {
            throw std::invalid_argument("gpd fit: excess #" + std::to_string(i + 1) +
                                        " is not a positive finite number");
        }
    }
}

// Moment estimates of (xi, sigma); Hosking & Wallis matching.
std::pair<double, double> moment_estimates(std::span<const double> w) {
    const SampleMoments m = sample_moments(w);
    if (!(m.variance > 0.0)) {
        throw DegenerateSampleError("gpd fit: sample variance is zero");
    }
    const double r = m.mean * m.mean / m.variance;
    return {0.5 * (1.0 - r), 0.5 * m.mean * (r + 1.0)};
}

// negative log likelihood over sorted excesses, parameterized by
// (xi, log sigma); +inf outside xi in (-0.99, 10] or off the support.
double negative_log_likelihood(const std::array<double, 2>& theta,
                               std::span<const double> sorted_w, double sum_w) {
    const double xi = theta[0];
    const double sigma = std::exp(theta[1]);
    if (!(xi > -0.99) || xi > 10.0 || !std::isfinite(sigma) || sigma <= 0.0) {
        return kInf;
    }
    const double n = static_cast<double>(sorted_w.size());
    if (std::fabs(xi) < kXiZeroTol) {
        return n * theta[1] + sum_w / sigma;
    }
    if (xi < 0.0 && sorted_w.back() >= -sigma / xi) {
        return kInf;
    }
    double acc = 0.0;
    const double c = 1.0 / xi + 1.0;
    for (double w : sorted_w) {
        acc += std::log1p(xi * w / sigma);
    }
    return n * theta[1] + c * acc;
}

std::optional<std::pair<double, double>> observed_information_se(
    const Params& hat, std::span<const double> sorted_w) {
    if (!(hat.xi > -0.5)) return std::nullopt;
    const double hx = 1e-5 * (1.0 + std::fabs(hat.xi));
    const double hs = 1e-5 * hat.sigma;
    auto ll = [&](double xi, double sigma) {
        return log_likelihood(Params{xi, sigma}, sorted_w);
    };
    const double f0 = ll(hat.xi, hat.sigma);
    const double dxx =
        (ll(hat.xi + hx, hat.sigma) - 2.0 * f0 + ll(hat.xi - hx, hat.sigma)) / (hx * hx);
    const double dss =
        (ll(hat.xi, hat.sigma + hs) - 2.0 * f0 + ll(hat.xi, hat.sigma - hs)) / (hs * hs);
    const double dxs = (ll(hat.xi + hx, hat.sigma + hs) - ll(hat.xi + hx, hat.sigma - hs) -
                        ll(hat.xi - hx, hat.sigma + hs) + ll(hat.xi - hx, hat.sigma - hs)) /
                       (4.0 * hx * hs);
    // observed information = -Hessian of the log likelihood
    const double i00 = -dxx, i11 = -dss, i01 = -dxs;
    const double det = i00 * i11 - i01 * i01;
    if (!(det > 0.0) || !(i00 > 0.0) || !std::isfinite(det)) return std::nullopt;
    const double var_xi = i11 / det;
    const double var_sigma = i00 / det;
    if (!(var_xi > 0.0) || !(var_sigma > 0.0)) return std::nullopt;
    return std::make_pair(std::sqrt(var_xi), std::sqrt(var_sigma));
}

}  // namespace

double Params::alpha() const {
    if (!(xi > 0.0)) {
        throw std::domain_error("gpd: alpha = 1/xi requires xi > 0");
    }
    return 1.0 / xi;
}

double Params::right_endpoint() const {
    return xi >= 0.0 ? kInf : -sigma / xi;
}

double cdf(const Params& p, double w) {
    check_params(p);
    check_support(p, w);
    if (std::fabs(p.xi) < kXiZeroTol) {
        return -std::expm1(-w / p.sigma);
    }
    return -std::expm1(-std::log1p(p.xi * w / p.sigma) / p.xi);
}

double pdf(const Params& p, double w) {
    check_params(p);
    check_support(p, w);
    return std::exp(log_pdf(p, w));
}

double log_pdf(const Params& p, double w) {
    if (!(w >= 0.0)) return -kInf;
    if (std::fabs(p.xi) < kXiZeroTol) {
        return -std::log(p.sigma) - w / p.sigma;
    }
    const double z = p.xi * w / p.sigma;
    if (z <= -1.0) return -kInf;
    return -std::log(p.sigma) - (1.0 / p.xi + 1.0) * std::log1p(z);
}

double quantile(const Params& p, double q) {
    check_params(p);
    if (!(q >= 0.0) || q >= 1.0) {
        throw std::domain_error("gpd: quantile level must lie in [0, 1)");
    }
    if (std::fabs(p.xi) < kXiZeroTol) {
        return -p.sigma * std::log1p(-q);
    }
    return p.sigma * std::expm1(-p.xi * std::log1p(-q)) / p.xi;
}

bool moment_exists(const Params& p, double order) {
    if (!(order > 0.0)) {
        throw std::domain_error("gpd: moment order must be positive");
    }
    return p.xi < 1.0 / order;
}

double log_likelihood(const Params& p, std::span<const double> excesses) {
    double acc = 0.0;
    for (double w : excesses) acc += log_pdf(p, w);
    return acc;
}

std::array<std::array<double, 2>, 5> mle_start_points(std::span<const double> excesses) {
    auto [xi0, sigma0] = moment_estimates(excesses);
    xi0 = std::clamp(xi0, -0.9, 5.0);
    const double ls = std::log(sigma0);
    auto clamp_xi = [](double xi) { return std::clamp(xi, -0.95, 9.5); };
    return {{{clamp_xi(xi0), ls},
             {clamp_xi(xi0 + 0.4), ls},
             {clamp_xi(xi0 - 0.4), ls},
             {clamp_xi(xi0), ls + std::log(0.5)},
             {clamp_xi(xi0), ls + std::log(2.0)}}};
}

Fit fit_mle(std::vector<double> excesses, double threshold) {
    validate_excesses(excesses, kMinExcessesMle);
    std::sort(excesses.begin(), excesses.end());
    if (excesses.front() == excesses.back()) {
        throw DegenerateSampleError("gpd fit: all excesses are equal");
    }
    const double sum_w = std::accumulate(excesses.begin(), excesses.end(), 0.0);
    const auto starts = mle_start_points(excesses);

    auto objective = [&](const std::array<double, 2>& theta) {
        return negative_log_likelihood(theta, excesses, sum_w);
    };

    detail::NelderMeadResult best;
    best.f = kInf;
    for (const auto& start : starts) {
        const auto r = detail::nelder_mead_2d(objective, start, {0.1, 0.25},
                                              1e-13, 1e-9, 800);
        if (r.f < best.f) best = r;
    }
    if (!std::isfinite(best.f)) {
        throw NonConvergenceError("gpd fit: likelihood maximization failed from all starts");
    }

    Fit fit;
    fit.params = Params{best.x[0], std::exp(best.x[1])};
    fit.threshold = threshold;
    fit.n_excesses = excesses.size();
    fit.log_likelihood = -best.f;
    fit.method = FitMethod::kMle;
    fit.std_errors = observed_information_se(fit.params, excesses);
    return fit;
}

Fit fit_moments(std::vector<double> excesses, double threshold) {
    validate_excesses(excesses, kMinExcessesMoments);
    std::sort(excesses.begin(), excesses.end());
    const auto [xi0, sigma0] = moment_estimates(excesses);

    Fit fit;
    fit.params = Params{xi0, sigma0};
    fit.threshold = threshold;
    fit.n_excesses = excesses.size();
    fit.log_likelihood = log_likelihood(fit.params, excesses);
    fit.method = FitMethod::kMoments;
    // The estimator satisfies xi_hat = (1 - mean^2/var)/2 < 1/2 identically,
    // with xi_hat -> 1/2 from below exactly when the matched second moment
    // stops existing; estimates this close to the boundary are meaningless.
    fit.unreliable = xi0 >= 0.45 || !std::isfinite(fit.log_likelihood);
    return fit;
}

std::vector<std::pair<double, double>> empirical_mean_excess(
    std::span<const double> sorted_sample, std::span<const double> thresholds) {
    if (!std::is_sorted(sorted_sample.begin(), sorted_sample.end())) {
        throw std::invalid_argument("empirical_mean_excess: sample must be sorted");
    }
    // suffix sums for O(log n) per threshold
    std::vector<double> suffix(sorted_sample.size() + 1, 0.0);
    for (std::size_t i = sorted_sample.size(); i-- > 0;) {
        suffix[i] = suffix[i + 1] + sorted_sample[i];
    }
    std::vector<std::pair<double, double>> out;
    out.reserve(thresholds.size());
    for (double u : thresholds) {
        const auto it = std::upper_bound(sorted_sample.begin(), sorted_sample.end(), u);
        const std::size_t idx = static_cast<std::size_t>(it - sorted_sample.begin());
        const std::size_t k = sorted_sample.size() - idx;
        if (k < 2) continue;
        const double mean = suffix[idx] / static_cast<double>(k) - u;
        out.emplace_back(u, mean);
    }
    return out;
}

}  // namespace tailrisk::gpd
