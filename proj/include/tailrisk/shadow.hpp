#pragma once

#include <span>
#include <utility>
#include <vector>

namespace tailrisk::shadow {

/// Everything needed to evaluate the bounded-tail closed forms: a GPD
/// tail (alpha = 1/xi, sigma) fitted to the dual variable above phi(u),
/// mapped back to the original support [L, H].
struct Model {
    double alpha;  // tail index, > 0
    double sigma;  // GPD scale of the dual excesses, > 0
    double L;      // lower bound of the support
    double H;      // finite upper bound
    double u;      // tail threshold in Y units, L <= u < H

    Model(double alpha, double sigma, double L, double H, double u);

    /// alpha * sigma / H, the argument all the incomplete-gamma forms share.
    double theta() const { return alpha * sigma / H; }
};

struct RiskMeasures {
    double shadow_mean = 0.0;
    std::vector<std::pair<double, double>> var_levels;  // (p, VaR_p)
    std::vector<std::pair<double, double>> es_levels;   // (p, ES_p)
    bool dual_mean_finite = false;
};

/// Density of Y | Y > u on [u, H). Diverges integrably as y -> H.
double pdf(const Model& m, double y);

/// Density as a function of the gap H - y. Near-bound mass lives at gaps far
/// below one ulp of H; this entry point lets oracles evaluate the closed form
/// without forming y itself. Like the density in y, it grows without bound
/// as the gap shrinks.
double pdf_from_gap(const Model& m, double gap);

double log_pdf(const Model& m, double y);  // quietly -inf outside [u, H)

/// Distribution function of Y | Y > u; tends to 1 as y -> H.
double cdf(const Model& m, double y);

/// Conditional quantile; exact at p = 0 (returns u), approaches H as p -> 1
/// without attaining it.
double quantile(const Model& m, double p);

/// The shadow mean E[Y | Y > u]. Finite for every alpha > 0, including
/// alpha <= 1 where the dual GPD has no mean.
double mean(const Model& m);

/// Mean excess e_v = E[Y - v | Y > v] for v in [u, H). Vanishes as v -> H.
double mean_excess(const Model& m, double v);

/// ES_p = VaR_p + e_{VaR_p}; strictly below H.
double expected_shortfall(const Model& m, double p);

/// Conditional moment E[Y^order | Y > u] by adaptive quadrature (finite for
/// every order on a bounded support).
double moment(const Model& m, int order, double tol = 1e-10);

/// Shadow mean swept over candidate upper bounds; one entry per grid value.
std::vector<std::pair<double, double>> mean_vs_upper_bound(
    double alpha, double sigma, double L, double u, std::span<const double> h_grid);

RiskMeasures risk_measures(const Model& m, std::span<const double> var_ps,
                           std::span<const double> es_ps);

}  // namespace tailrisk::shadow
