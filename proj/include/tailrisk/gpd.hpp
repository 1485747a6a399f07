#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace tailrisk::gpd {

/// Shape/scale pair of a Generalized Pareto distribution of threshold
/// excesses. xi > 0 is the heavy (Frechet-type) regime; alpha = 1/xi is the
/// tail index.
struct Params {
    double xi = 0.0;
    double sigma = 1.0;

    double alpha() const;           // 1/xi; requires xi > 0
    double right_endpoint() const;  // +inf when xi >= 0, else -sigma/xi
};

enum class FitMethod { kMle, kMoments };

struct Fit {
    Params params;
    double threshold = 0.0;  // in the units of the fitted data (provenance)
    std::size_t n_excesses = 0;
    double log_likelihood = 0.0;
    FitMethod method = FitMethod::kMle;
    std::optional<std::pair<double, double>> std_errors;  // (se_xi, se_sigma)
    bool unreliable = false;
};

inline constexpr std::size_t kMinExcessesMle = 5;
inline constexpr std::size_t kMinExcessesMoments = 2;
// Below this the exponential branch is used; keeps both branches continuous.
inline constexpr double kXiZeroTol = 1e-8;

double cdf(const Params& p, double w);
double pdf(const Params& p, double w);
/// log density; quietly -inf outside the support (the optimizer needs this).
double log_pdf(const Params& p, double w);
double quantile(const Params& p, double q);

/// Moment of the given order exists iff xi < 1/order.
bool moment_exists(const Params& p, double order);

double log_likelihood(const Params& p, std::span<const double> excesses);

/// The five (xi, log sigma) optimizer starts used by fit_mle, seeded from the
/// moment estimate of the (sorted) excesses. Exposed so alternative
/// likelihood routes can replicate the exact search.
std::array<std::array<double, 2>, 5> mle_start_points(std::span<const double> excesses);

/// Maximum-likelihood fit on positive excesses; direct search over
/// (xi, log sigma) with xi constrained to (-0.99, 10]. The excess list is
/// sorted internally so any permutation of the input yields bitwise
/// identical results.
Fit fit_mle(std::vector<double> excesses, double threshold = 0.0);

/// Method-of-moments fit; flagged unreliable when xi_hat >= 1/2 (the
/// second moment of the data-generating GPD would not exist).
Fit fit_moments(std::vector<double> excesses, double threshold = 0.0);

/// (threshold, mean excess) pairs for each requested threshold with at
/// least two exceedances; thresholds with fewer are omitted.
std::vector<std::pair<double, double>> empirical_mean_excess(
    std::span<const double> sorted_sample, std::span<const double> thresholds);

}  // namespace tailrisk::gpd
