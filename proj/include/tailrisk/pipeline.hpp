#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tailrisk/gpd.hpp"
#include "tailrisk/shadow.hpp"

namespace tailrisk::pipeline {

/// An ordered loss sample with provenance counts.
struct TailSample {
    std::vector<double> values;  // raw Y observations, input order
    std::string source;          // file path or "-"
    std::size_t n_total = 0;
    std::size_t n_exceedances = 0;  // of the resolved threshold
};

struct ThresholdSpec {
    enum class Kind { kValue, kQuantile };
    Kind kind = Kind::kQuantile;
    double value = 0.95;

    static ThresholdSpec at_value(double v) { return {Kind::kValue, v}; }
    static ThresholdSpec at_quantile(double q);
};

/// Default tail cut when the caller gives none: the 95th sample percentile.
inline constexpr double kDefaultThresholdQuantile = 0.95;
inline constexpr std::size_t kMinExceedances = 30;

struct FitOutcome {
    gpd::Fit dual_fit;                  // GPD on phi-excesses over phi(u)
    std::optional<shadow::Model> model; // absent when xi_hat <= 0
    double threshold_y = 0.0;           // u
    double threshold_z = 0.0;           // phi(u)
    std::size_t n_exceedances = 0;
    std::vector<std::string> warnings;
};

struct NaiveBlock {
    double sample_mean_above_u = 0.0;
    gpd::Fit fit_on_y;  // the apparent tail: GPD fitted to raw Y excesses
    bool dual_mean_finite = false;
};

struct Provenance {
    std::string input_digest;
    std::uint64_t seed = 0;
    std::string tool_version;
    std::string timestamp;
};

struct RiskReport {
    std::string source;
    std::size_t n_total = 0;
    std::size_t n_exceedances = 0;
    double lower_bound = 0.0;
    double upper_bound = 0.0;
    ThresholdSpec threshold_spec;
    FitOutcome fit;
    NaiveBlock naive;
    std::optional<shadow::RiskMeasures> measures;
    std::optional<std::vector<std::pair<double, double>>> sensitivity;
    Provenance provenance;
};

/// Explicit value, or the k-th order statistic with k = ceil(q n) for a
/// quantile spec; exceedances are strictly above the resolved value.
double resolve_threshold(std::span<const double> values, const ThresholdSpec& spec);

/// The end-to-end estimation step: validate bounds, resolve u, transform the
/// exceedances through phi, fit the GPD by MLE, and assemble the shadow
/// model. A non-positive fitted shape downgrades the outcome to a warning
/// (no model) instead of an error.
FitOutcome fit_shadow_model(const TailSample& sample, double L, double H,
                            const ThresholdSpec& spec);

/// Same likelihood expressed in Y space via the bounded-tail density,
/// maximized with the identical start grid and optimizer. The argmax agrees
/// with the dual-space fit; the attained maxima differ by the fixed Jacobian
/// term sum log(H/(H-y_i)).
gpd::Fit fit_mle_y_space(std::span<const double> exceedances_y, double u, double L,
                         double H);

NaiveBlock naive_block(std::span<const double> exceedances_y, double u,
                       const gpd::Fit& dual_fit);

struct ReportRequest {
    double lower_bound = 0.0;
    double upper_bound = 0.0;
    ThresholdSpec threshold;
    std::vector<double> var_levels{0.95, 0.99};
    std::vector<double> es_levels{0.95, 0.99};
    std::optional<std::vector<double>> h_grid;
    std::uint64_t seed = 0;
};

RiskReport build_report(const TailSample& sample, const ReportRequest& req,
                        const std::string& input_digest, const std::string& timestamp);

}  // namespace tailrisk::pipeline
