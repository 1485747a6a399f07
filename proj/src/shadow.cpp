#include "tailrisk/shadow.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "tailrisk/gpd.hpp"
#include "tailrisk/numerics.hpp"

namespace tailrisk::shadow {

namespace {

void check_y(const Model& m, double y, const char* who) {
    if (!(y >= m.u) || y >= m.H) {
        throw std::domain_error(std::string(who) + ": y must lie in [u, H); got " +
                                std::to_string(y));
    }
}

// log((H-u)/(H-v)) evaluated without cancellation for v anywhere in [u, H).
double log_gap_ratio(const Model& m, double v) {
    return std::log1p((v - m.u) / (m.H - v));
}

}  // namespace

Model::Model(double alpha_, double sigma_, double L_, double H_, double u_)
    : alpha(alpha_), sigma(sigma_), L(L_), H(H_), u(u_) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw std::domain_error("shadow::Model: alpha must be positive");
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::domain_error("shadow::Model: sigma must be positive");
    }
    if (!std::isfinite(L) || !std::isfinite(H) || !std::isfinite(u) || !(L <= u) ||
        !(u < H)) {
        throw std::domain_error("shadow::Model: bounds must satisfy L <= u < H, H finite");
    }
}

double pdf_from_gap(const Model& m, double gap) {
    const double span = m.H - m.u;
    if (!(gap > 0.0) || gap > span) {
        throw std::domain_error("shadow::pdf_from_gap: gap must lie in (0, H-u]");
    }
    const double t = std::log1p((span - gap) / gap);  // log((H-u)/(H-y))
    const double q = m.H * t / (m.alpha * m.sigma);
    return m.H / (m.sigma * gap) * std::exp(-(m.alpha + 1.0) * std::log1p(q));
}

double pdf(const Model& m, double y) {
    check_y(m, y, "shadow::pdf");
    return pdf_from_gap(m, m.H - y);
}

double log_pdf(const Model& m, double y) {
    if (!(y >= m.u) || y >= m.H) return -std::numeric_limits<double>::infinity();
    const double t = log_gap_ratio(m, y);
    const double q = m.H * t / (m.alpha * m.sigma);
    return std::log(m.H / m.sigma) - std::log(m.H - y) -
           (m.alpha + 1.0) * std::log1p(q);
}

double cdf(const Model& m, double y) {
    check_y(m, y, "shadow::cdf");
    const double t = log_gap_ratio(m, y);
    const double q = m.H * t / (m.alpha * m.sigma);
    return -std::expm1(-m.alpha * std::log1p(q));
}

double quantile(const Model& m, double p) {
    if (!(p >= 0.0) || p >= 1.0) {
        throw std::domain_error("shadow::quantile: p must lie in [0, 1)");
    }
    if (p == 0.0) return m.u;
    const double theta = m.theta();
    const double gamma_p = theta * std::pow(1.0 - p, -1.0 / m.alpha);
    // u - (H-u) expm1(theta - gamma_p); exact near both endpoints
    double y = m.u - (m.H - m.u) * std::expm1(theta - gamma_p);
    if (y >= m.H) y = std::nextafter(m.H, m.u);
    if (y < m.u) y = m.u;
    return y;
}

double mean(const Model& m) {
    return m.u + (m.H - m.u) * numerics::exp_scaled_upper_gamma(m.alpha, m.theta());
}

double mean_excess(const Model& m, double v) {
    check_y(m, v, "shadow::mean_excess");
    const double t = log_gap_ratio(m, v);
    return (m.H - v) * numerics::exp_scaled_upper_gamma(m.alpha, m.theta() + t);
}

double expected_shortfall(const Model& m, double p) {
    if (!(p > 0.0) || p >= 1.0) {
        throw std::domain_error("shadow::expected_shortfall: p must lie in (0, 1)");
    }
    const double v = quantile(m, p);
    double es = v + mean_excess(m, v);
    if (es >= m.H) es = std::nextafter(m.H, m.u);  // strict bound survives rounding
    return es;
}

double moment(const Model& m, int order, double tol) {
    if (order < 1) {
        throw std::domain_error("shadow::moment: order must be >= 1");
    }
    // In the scaled dual excess w = (phi(y) - phi(u))/(alpha sigma) the
    // density is exactly alpha (1+w)^(-alpha-1) and y = H - (H-u) e^(-theta w),
    // so the integrand is O(1) and the near-H mass sits at ordinary w.
    const double span = m.H - m.u;
    const double theta = m.theta();
    auto integrand = [&](double w) {
        const double y = m.u - span * std::expm1(-theta * w);
        return std::pow(y, order) * m.alpha *
               std::exp(-(m.alpha + 1.0) * std::log1p(w));
    };
    return numerics::integrate_adaptive(integrand, 0.0, numerics::kInfinity, tol).value;
}

std::vector<std::pair<double, double>> mean_vs_upper_bound(
    double alpha, double sigma, double L, double u, std::span<const double> h_grid) {
    std::vector<std::pair<double, double>> out;
    out.reserve(h_grid.size());
    for (double h : h_grid) {
        if (!(h > u)) {
            throw std::domain_error("mean_vs_upper_bound: every H must exceed u");
        }
        out.emplace_back(h, mean(Model(alpha, sigma, L, h, u)));
    }
    return out;
}

RiskMeasures risk_measures(const Model& m, std::span<const double> var_ps,
                           std::span<const double> es_ps) {
    RiskMeasures out;
    out.shadow_mean = mean(m);
    out.var_levels.reserve(var_ps.size());
    for (double p : var_ps) out.var_levels.emplace_back(p, quantile(m, p));
    out.es_levels.reserve(es_ps.size());
    for (double p : es_ps) out.es_levels.emplace_back(p, expected_shortfall(m, p));
    out.dual_mean_finite = gpd::moment_exists(gpd::Params{1.0 / m.alpha, m.sigma}, 1.0);
    return out;
}

}  // namespace tailrisk::shadow
