#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tailrisk/gpd.hpp"
#include "tailrisk/shadow.hpp"

namespace tailrisk::simulate {

struct Config {
    std::uint64_t seed = 0;
    std::size_t n = 0;
    std::optional<double> censor_at;  // observation ceiling M, in (L, H)
};

struct Sample {
    std::vector<double> values;
    std::size_t n_generated = 0;  // before censoring
};

struct BootstrapCi {
    double point = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.0;
    std::size_t replicates = 0;
    std::size_t refit_failures = 0;
};

struct ApparentTailResult {
    gpd::Fit naive;  // MLE on raw Y excesses of the censored sample
    gpd::Fit dual;   // MLE on phi-transformed excesses of the same sample
    std::size_t n_kept = 0;
};

/// n inverse-transform GPD draws; bitwise reproducible per (seed, n, params).
std::vector<double> sample_gpd(const gpd::Params& params, const Config& cfg);

/// Draws of Y | Y > u under the shadow model: W ~ GPD, Y = H - (H-u) e^(-W/H).
/// Every value is strictly inside (u, H). With censor_at set, draws above the
/// ceiling are dropped (not capped) and n_generated records the raw count.
Sample sample_shadow_y(const shadow::Model& m, const Config& cfg);

/// The censored-observation experiment: fit the apparent tail directly on
/// Y excesses and the dual tail on phi-excesses, from one censored sample.
/// Requires cfg.censor_at with M <= H/10 and at least 30 surviving draws.
ApparentTailResult apparent_tail_experiment(const shadow::Model& m, const Config& cfg);

/// Nonparametric bootstrap of the shadow mean over the exceedances of u:
/// each replicate resamples the exceedances, refits the dual GPD, and
/// re-evaluates the closed form. Percentile interval; deterministic per seed
/// and independent of `threads`.
BootstrapCi bootstrap_shadow_mean(std::span<const double> sample, double L, double H,
                                  double u, double level, std::size_t replicates,
                                  std::uint64_t seed, unsigned threads = 1);

}  // namespace tailrisk::simulate
