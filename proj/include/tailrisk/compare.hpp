#pragma once

namespace tailrisk::compare {

/// A Pareto tail f(x) = (1/sigma) ((x-L)/(alpha sigma) + 1)^(-alpha-1) on
/// [L, inf), together with the cutoff H used by its truncated and
/// absorbing-barrier variants.
struct ParetoSpec {
    double alpha;
    double sigma;
    double L;
    double H;

    ParetoSpec(double alpha, double sigma, double L, double H);
};

double pareto_pdf(const ParetoSpec& s, double x);
double pareto_cdf(const ParetoSpec& s, double x);

/// Hard truncation: the Pareto density renormalized to [L, H]; the excess
/// mass is spread across all points, so g > f everywhere below H.
double truncated_pareto_pdf(const ParetoSpec& s, double x);

/// E[X^p] of the hard-truncated Pareto by adaptive quadrature. The printed
/// closed form (incomplete beta at negative parameters) needs branch-cut
/// conventions; the defining integral is unambiguous and is the primary path.
double truncated_pareto_moment(const ParetoSpec& s, double p, double tol = 1e-10);

/// Mean when H is an absorbing barrier: interior Pareto mass plus a point
/// mass at H carrying the whole exceedance probability.
double absorbing_barrier_mean(const ParetoSpec& s, double tol = 1e-10);

/// Mean of the smooth bounded-tail model over the mean of the hard-truncated
/// Pareto with the same (alpha, sigma, L, H). Below 1 for alpha < 1: hard
/// truncation keeps more weight near the cutoff.
double soft_to_truncated_ratio(double alpha, double sigma, double L, double H, double u);

}  // namespace tailrisk::compare
