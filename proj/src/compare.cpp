#include "tailrisk/compare.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tailrisk/numerics.hpp"
#include "tailrisk/shadow.hpp"

namespace tailrisk::compare {

namespace {

void check_x(const ParetoSpec& s, double x, double hi, const char* who) {
    if (!(x >= s.L) || x > hi) {
        throw std::domain_error(std::string(who) + ": x out of range; got " +
                                std::to_string(x));
    }
}

// 1 - (1 + (x-L)/(alpha sigma))^-alpha, stable for the whole range
double cdf_impl(const ParetoSpec& s, double x) {
    return -std::expm1(-s.alpha * std::log1p((x - s.L) / (s.alpha * s.sigma)));
}

}  // namespace

ParetoSpec::ParetoSpec(double alpha_, double sigma_, double L_, double H_)
    : alpha(alpha_), sigma(sigma_), L(L_), H(H_) {
    if (!(alpha > 0.0) || !(sigma > 0.0) || !std::isfinite(L) || !std::isfinite(H) ||
        !(H >= L)) {
        throw std::domain_error("ParetoSpec: requires alpha > 0, sigma > 0, L <= H finite");
    }
}

double pareto_pdf(const ParetoSpec& s, double x) {
    check_x(s, x, numerics::kInfinity, "pareto_pdf");
    return std::exp(-(s.alpha + 1.0) * std::log1p((x - s.L) / (s.alpha * s.sigma))) /
           s.sigma;
}

double pareto_cdf(const ParetoSpec& s, double x) {
    check_x(s, x, numerics::kInfinity, "pareto_cdf");
    return cdf_impl(s, x);
}

double truncated_pareto_pdf(const ParetoSpec& s, double x) {
    check_x(s, x, s.H, "truncated_pareto_pdf");
    if (!(s.H > s.L)) {
        throw std::domain_error("truncated_pareto_pdf: needs H > L");
    }
    return pareto_pdf(s, x) / cdf_impl(s, s.H);
}

double truncated_pareto_moment(const ParetoSpec& s, double p, double tol) {
    if (!(p >= 1.0)) {
        throw std::domain_error("truncated_pareto_moment: order must be >= 1");
    }
    if (s.H == s.L) return std::pow(s.L, p);
    const double norm = cdf_impl(s, s.H);
    auto integrand = [&](double x) {
        return std::pow(x, p) * pareto_pdf(s, x) / norm;
    };
    return numerics::integrate_adaptive(integrand, s.L, s.H, tol).value;
}

double absorbing_barrier_mean(const ParetoSpec& s, double tol) {
    if (s.H == s.L) return s.L;
    auto integrand = [&](double x) { return x * pareto_pdf(s, x); };
    const double interior = numerics::integrate_adaptive(integrand, s.L, s.H, tol).value;
    // 1 - F(H): all mass beyond H collapses onto the barrier
    const double tail_mass =
        std::exp(-s.alpha * std::log1p((s.H - s.L) / (s.alpha * s.sigma)));
    return interior + s.H * tail_mass;
}

double soft_to_truncated_ratio(double alpha, double sigma, double L, double H, double u) {
    if (!(u >= L) || !(u < H)) {
        throw std::domain_error("soft_to_truncated_ratio: requires L <= u < H");
    }
    const shadow::Model model(alpha, sigma, L, H, u);
    const ParetoSpec spec(alpha, sigma, L, H);
    return shadow::mean(model) / truncated_pareto_moment(spec, 1.0);
}

}  // namespace tailrisk::compare
