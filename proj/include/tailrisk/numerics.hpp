#pragma once

#include <cstddef>
#include <functional>
#include <limits>

namespace tailrisk::numerics {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Outcome of an adaptive quadrature run.
struct QuadratureResult {
    double value = 0.0;
    double abs_error_estimate = 0.0;
    std::size_t evaluations = 0;
};

inline constexpr double kDefaultQuadratureTol = 1e-10;
inline constexpr std::size_t kDefaultEvaluationBudget = 1'000'000;

/// Upper incomplete gamma Gamma(s, x) = int_x^inf t^(s-1) e^(-t) dt.
///
/// Valid for any real s when x > 0, and for s > 0 when x = 0 (complete
/// gamma). Negative and zero s are the regime the tail formulas need;
/// they are computed without cancellation by switching between a
/// continued fraction (x >= 1/4) and a pole-grouped power series
/// (x < 1/4). Throws std::domain_error for x < 0 or (x == 0, s <= 0).
double upper_incomplete_gamma(double s, double x);

/// Generalized exponential integral E_nu(x) = int_1^inf e^(-x t) t^(-nu) dt,
/// for real nu and x > 0. Uses its own continued fraction for x >= 1, so the
/// identity E_nu(x) = x^(nu-1) Gamma(1-nu, x) is a genuine cross-check there.
double exponential_integral(double nu, double x);

/// Fused product x^alpha * Gamma(1-alpha, x) for alpha > 0, x > 0.
///
/// The factors overflow/underflow separately long before the product
/// leaves double range, so the tail formulas must evaluate it fused.
/// Behaves like x/(alpha-1) + Gamma(1-alpha) x^alpha as x -> 0.
double scaled_upper_gamma(double alpha, double x);

/// e^x * x^alpha * Gamma(1-alpha, x): the combination the bounded-tail
/// closed forms are built from. Tends to 1 as x -> infinity, so it stays
/// representable even where e^x alone would overflow.
double exp_scaled_upper_gamma(double alpha, double x);

/// Globally adaptive Gauss-Kronrod (7,15) quadrature of f over [a, b],
/// where b may be +infinity (handled by a cubic rational substitution).
/// Stops when the accumulated error estimate drops below
/// tol * max(1, |value|); throws NonConvergenceError once the evaluation
/// budget is spent.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b,
                                    double tol = kDefaultQuadratureTol,
                                    std::size_t max_evaluations = kDefaultEvaluationBudget);

}  // namespace tailrisk::numerics
