// shadow: tail-risk estimation for heavy-tailed data with a remote but
// finite upper bound. Fits a GPD to the log-transformed (dual) tail and
// reports closed-form shadow moments, VaR, and ES on the bounded scale.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <vector>

#include <CLI11.hpp>

#include "tailrisk/compare.hpp"
#include "tailrisk/dual.hpp"
#include "tailrisk/errors.hpp"
#include "tailrisk/gpd.hpp"
#include "tailrisk/io.hpp"
#include "tailrisk/pipeline.hpp"
#include "tailrisk/shadow.hpp"
#include "tailrisk/simulate.hpp"
#include "tailrisk/version.hpp"

namespace {

using namespace tailrisk;

std::ostream& open_output(const std::string& path, std::ofstream& file) {
    if (path.empty()) return std::cout;
    file.open(path, std::ios::binary);
    if (!file) throw DataError("cannot open output file: " + path);
    return file;
}

io::Format parse_format(const std::string& s) {
    if (s == "csv") return io::Format::kCsv;
    if (s == "jsonl") return io::Format::kJsonl;
    return io::Format::kAuto;
}

std::string fit_json(const gpd::Fit& fit) {
    std::ostringstream out;
    out << "{\"xi\": " << io::format_full(fit.params.xi)
        << ", \"sigma\": " << io::format_full(fit.params.sigma)
        << ", \"n_excesses\": " << fit.n_excesses
        << ", \"log_likelihood\": " << io::format_full(fit.log_likelihood)
        << ", \"std_errors\": ";
    if (fit.std_errors) {
        out << "{\"xi\": " << io::format_full(fit.std_errors->first)
            << ", \"sigma\": " << io::format_full(fit.std_errors->second) << "}";
    } else {
        out << "null";
    }
    out << "}";
    return out.str();
}

struct ModelFlags {
    double alpha = 0.0;
    double sigma = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double threshold = 0.0;
    bool threshold_set = false;

    shadow::Model build() const {
        return shadow::Model(alpha, sigma, lower, upper,
                             threshold_set ? threshold : lower);
    }
};

void add_model_flags(CLI::App* cmd, ModelFlags& mf) {
    cmd->add_option("--alpha", mf.alpha, "Tail index alpha = 1/xi")->required();
    cmd->add_option("--sigma", mf.sigma, "GPD scale of the dual tail")->required();
    cmd->add_option("--lower-bound", mf.lower, "Lower bound L of the support")->required();
    cmd->add_option("--upper-bound", mf.upper, "Finite upper bound H")->required();
    auto* thr = cmd->add_option("--threshold", mf.threshold,
                                "Tail threshold u in data units (default: L)");
    thr->each([&mf](const std::string&) { mf.threshold_set = true; });
}

int run_fit(const std::string& input, const std::string& format, std::size_t column,
            double lower, double upper, std::optional<double> thr_value,
            std::optional<double> thr_quantile, const std::vector<double>& var_levels,
            const std::vector<double>& es_levels, const std::vector<double>& h_grid,
            std::uint64_t seed, const std::string& output) {
    pipeline::TailSample sample;
    std::string digest;
    sample.values = io::read_values(input, parse_format(format), column, &digest);
    sample.source = input;
    sample.n_total = sample.values.size();

    pipeline::ReportRequest req;
    req.lower_bound = lower;
    req.upper_bound = upper;
    req.threshold = thr_value ? pipeline::ThresholdSpec::at_value(*thr_value)
                              : pipeline::ThresholdSpec::at_quantile(
                                    thr_quantile.value_or(pipeline::kDefaultThresholdQuantile));
    if (!var_levels.empty()) req.var_levels = var_levels;
    if (!es_levels.empty()) req.es_levels = es_levels;
    if (!h_grid.empty()) req.h_grid = h_grid;
    req.seed = seed;

    const pipeline::RiskReport report =
        pipeline::build_report(sample, req, digest, io::utc_timestamp());

    std::ofstream file;
    io::write_report_json(report, open_output(output, file));
    for (const auto& warning : report.fit.warnings) {
        std::cerr << "warning: " << warning << "\n";
    }
    return 0;
}

int run_report(const std::string& report_path, const std::vector<double>& var_levels,
               const std::vector<double>& es_levels, const std::vector<double>& h_grid,
               const std::string& output) {
    std::ifstream in(report_path, std::ios::binary);
    if (!in) throw DataError("cannot open report: " + report_path);
    pipeline::RiskReport report = io::read_report_json(in);
    if (!report.fit.model) {
        throw DataError("report has no fitted shadow model (non-positive shape); "
                        "nothing to evaluate");
    }
    const shadow::Model& model = *report.fit.model;

    auto add_levels = [&](std::vector<std::pair<double, double>>& dst,
                          const std::vector<double>& ps, auto eval) {
        for (double p : ps) {
            if (!(p > 0.0) || !(p < 1.0)) {
                throw std::invalid_argument("level outside (0, 1)");
            }
            const bool present = std::any_of(dst.begin(), dst.end(),
                                             [&](const auto& e) { return e.first == p; });
            if (!present) dst.emplace_back(p, eval(p));
        }
        std::sort(dst.begin(), dst.end());
    };

    if (!report.measures) {
        report.measures = shadow::risk_measures(model, {}, {});
    }
    add_levels(report.measures->var_levels, var_levels,
               [&](double p) { return shadow::quantile(model, p); });
    add_levels(report.measures->es_levels, es_levels,
               [&](double p) { return shadow::expected_shortfall(model, p); });

    if (!h_grid.empty()) {
        auto rows = shadow::mean_vs_upper_bound(model.alpha, model.sigma, model.L,
                                                model.u, h_grid);
        if (!report.sensitivity) report.sensitivity.emplace();
        for (const auto& row : rows) {
            const bool present =
                std::any_of(report.sensitivity->begin(), report.sensitivity->end(),
                            [&](const auto& e) { return e.first == row.first; });
            if (!present) report.sensitivity->push_back(row);
        }
        std::sort(report.sensitivity->begin(), report.sensitivity->end());
    }

    std::ofstream file;
    io::write_report_json(report, open_output(output, file));
    return 0;
}

int run_compare(const ModelFlags& mf, const std::vector<double>& h_curve,
                const std::string& output) {
    std::ofstream file;
    std::ostream& out = open_output(output, file);
    const double u = mf.threshold_set ? mf.threshold : mf.lower;
    if (!h_curve.empty()) {
        out << "upper_bound,ratio\n";
        for (double h : h_curve) {
            const double r = compare::soft_to_truncated_ratio(mf.alpha, mf.sigma,
                                                              mf.lower, h, u);
            out << io::format_full(h) << "," << io::format_full(r) << "\n";
        }
        return 0;
    }
    const compare::ParetoSpec spec(mf.alpha, mf.sigma, mf.lower, mf.upper);
    const shadow::Model model = mf.build();
    out << "quantity,value\n";
    out << "truncated_mean," << io::format_full(compare::truncated_pareto_moment(spec, 1.0))
        << "\n";
    out << "absorbing_barrier_mean," << io::format_full(compare::absorbing_barrier_mean(spec))
        << "\n";
    out << "shadow_mean," << io::format_full(shadow::mean(model)) << "\n";
    out << "soft_to_truncated_ratio,"
        << io::format_full(
               compare::soft_to_truncated_ratio(mf.alpha, mf.sigma, mf.lower, mf.upper, u))
        << "\n";
    return 0;
}

int run_simulate(const ModelFlags& mf, std::size_t n, std::uint64_t seed,
                 std::optional<double> censor_at, const std::string& experiment,
                 std::size_t replicates, double level, unsigned threads,
                 const std::string& output) {
    const shadow::Model model = mf.build();
    simulate::Config cfg;
    cfg.seed = seed;
    cfg.n = n;
    cfg.censor_at = censor_at;

    std::ofstream file;
    std::ostream& out = open_output(output, file);

    if (experiment == "apparent-tail") {
        const auto result = simulate::apparent_tail_experiment(model, cfg);
        const double se_n = result.naive.std_errors ? result.naive.std_errors->first : 0.0;
        const double se_d = result.dual.std_errors ? result.dual.std_errors->first : 0.0;
        const double combined = std::sqrt(se_n * se_n + se_d * se_d);
        const double diff = result.naive.params.xi - result.dual.params.xi;
        out << "{\n";
        out << "  \"experiment\": \"apparent-tail\",\n";
        out << "  \"n\": " << n << ",\n";
        out << "  \"seed\": " << seed << ",\n";
        out << "  \"censor_at\": " << io::format_full(*censor_at) << ",\n";
        out << "  \"n_kept\": " << result.n_kept << ",\n";
        out << "  \"naive_fit\": " << fit_json(result.naive) << ",\n";
        out << "  \"dual_fit\": " << fit_json(result.dual) << ",\n";
        out << "  \"xi_difference\": " << io::format_full(diff) << ",\n";
        out << "  \"combined_se\": " << io::format_full(combined) << ",\n";
        out << "  \"indistinguishable_2se\": "
            << (std::fabs(diff) <= 2.0 * combined ? "true" : "false") << ",\n";
        out << "  \"shadow_mean\": " << io::format_full(shadow::mean(model)) << "\n";
        out << "}\n";
        return 0;
    }
    if (experiment == "bootstrap-ci") {
        const auto sample = simulate::sample_shadow_y(model, cfg);
        const auto ci = simulate::bootstrap_shadow_mean(sample.values, model.L, model.H,
                                                        model.u, level, replicates,
                                                        seed, threads);
        out << "{\n";
        out << "  \"experiment\": \"bootstrap-ci\",\n";
        out << "  \"n\": " << n << ",\n";
        out << "  \"seed\": " << seed << ",\n";
        out << "  \"level\": " << io::format_full(ci.level) << ",\n";
        out << "  \"replicates\": " << ci.replicates << ",\n";
        out << "  \"refit_failures\": " << ci.refit_failures << ",\n";
        out << "  \"point\": " << io::format_full(ci.point) << ",\n";
        out << "  \"lower\": " << io::format_full(ci.lower) << ",\n";
        out << "  \"upper\": " << io::format_full(ci.upper) << "\n";
        out << "}\n";
        return 0;
    }
    if (!experiment.empty()) {
        throw CLI::ValidationError("--experiment",
                                   "unknown experiment '" + experiment + "'");
    }
    const auto sample = simulate::sample_shadow_y(model, cfg);
    out << "y\n";
    for (double y : sample.values) {
        out << io::format_full(y) << "\n";
    }
    if (censor_at) {
        std::cerr << "kept " << sample.values.size() << " of " << sample.n_generated
                  << " draws at or below the censoring level\n";
    }
    return 0;
}

int run_diagnose(const std::string& input, const std::string& format, std::size_t column,
                 double lower, double upper, const std::string& output) {
    std::string digest;
    std::vector<double> values = io::read_values(input, parse_format(format), column, &digest);

    pipeline::TailSample sample;
    sample.values = values;
    sample.source = input;
    sample.n_total = values.size();
    const auto spec = pipeline::ThresholdSpec::at_quantile(pipeline::kDefaultThresholdQuantile);
    const auto outcome = pipeline::fit_shadow_model(sample, lower, upper, spec);
    const double u = outcome.threshold_y;

    std::vector<double> exceed_y;
    for (double y : values) {
        if (y > u) exceed_y.push_back(y);
    }
    std::vector<double> excess(exceed_y.size());
    for (std::size_t i = 0; i < exceed_y.size(); ++i) excess[i] = exceed_y[i] - u;
    const gpd::Fit naive = gpd::fit_mle(std::move(excess), u);

    std::sort(values.begin(), values.end());
    const dual::Transform t(lower, upper);
    std::vector<double> zvalues(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) zvalues[i] = dual::phi(t, values[i]);

    // thresholds: every 5th order statistic above the median
    std::vector<double> y_thresholds, z_thresholds;
    for (std::size_t i = values.size() / 2; i < values.size(); i += 5) {
        y_thresholds.push_back(values[i]);
        z_thresholds.push_back(zvalues[i]);
    }

    std::ofstream file;
    std::ostream& out = open_output(output, file);
    out << "space,threshold_or_y,value,series_tag\n";
    for (const auto& [uk, me] : gpd::empirical_mean_excess(values, y_thresholds)) {
        out << "y," << io::format_full(uk) << "," << io::format_full(me)
            << ",empirical_mean_excess\n";
    }
    for (const auto& [uk, me] : gpd::empirical_mean_excess(zvalues, z_thresholds)) {
        out << "z," << io::format_full(uk) << "," << io::format_full(me)
            << ",empirical_mean_excess\n";
    }

    // apparent vs dual survival of Y | Y > u on a grid running past H
    const double zu = dual::phi(t, u);
    for (int i = 0; i < 200; ++i) {
        const double frac = static_cast<double>(i) / 199.0;
        const double y = u + (2.0 * upper - u) * frac * frac;
        double dual_survival = 0.0;
        if (y < upper) {
            dual_survival = 1.0 - gpd::cdf(outcome.dual_fit.params, dual::phi(t, y) - zu);
        }
        const double naive_survival = 1.0 - gpd::cdf(naive.params, y - u);
        out << "y," << io::format_full(y) << "," << io::format_full(dual_survival)
            << ",survival_dual\n";
        out << "y," << io::format_full(y) << "," << io::format_full(naive_survival)
            << ",survival_naive\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"shadow: tail risk with a remote but finite upper bound"};
    app.set_version_flag("--version", std::string(tailrisk::kToolVersion));
    app.require_subcommand(1);

    // ---- fit ----
    auto* fit = app.add_subcommand("fit", "Fit the dual-tail GPD and write a risk report");
    std::string fit_input, fit_format = "auto", fit_output;
    std::size_t fit_column = 0;
    double fit_lower = 0.0, fit_upper = 0.0;
    std::optional<double> fit_thr, fit_thrq;
    std::vector<double> fit_var, fit_es, fit_hgrid;
    std::uint64_t fit_seed = 0;
    fit->add_option("--input", fit_input, "CSV or JSONL loss sample")->required();
    fit->add_option("--format", fit_format, "auto|csv|jsonl (default auto)");
    fit->add_option("--column", fit_column, "CSV column index (default 0)");
    fit->add_option("--lower-bound", fit_lower, "Lower bound L")->required();
    fit->add_option("--upper-bound", fit_upper, "Finite upper bound H")->required();
    auto* fit_thr_opt = fit->add_option("--threshold", fit_thr, "Threshold u in data units");
    auto* fit_thrq_opt = fit->add_option("--threshold-quantile", fit_thrq,
                                         "Threshold as a sample quantile (default 0.95)");
    fit_thr_opt->excludes(fit_thrq_opt);
    fit->add_option("--var-levels", fit_var, "VaR levels (default 0.95,0.99)")->delimiter(',');
    fit->add_option("--es-levels", fit_es, "ES levels (default 0.95,0.99)")->delimiter(',');
    fit->add_option("--h-grid", fit_hgrid, "Upper bounds for the sensitivity sweep")->delimiter(',');
    fit->add_option("--seed", fit_seed, "Seed recorded in provenance")->envname("SHADOW_SEED");
    fit->add_option("--output", fit_output, "Report path (default stdout)");

    // ---- report ----
    auto* rep = app.add_subcommand("report", "Evaluate more measures on a fitted report");
    std::string rep_path, rep_output;
    std::vector<double> rep_var, rep_es, rep_hgrid;
    rep->add_option("--report", rep_path, "Existing report JSON")->required();
    rep->add_option("--var-levels", rep_var, "VaR levels to add")->delimiter(',');
    rep->add_option("--es-levels", rep_es, "ES levels to add")->delimiter(',');
    rep->add_option("--h-grid", rep_hgrid, "Upper bounds for the sensitivity sweep")->delimiter(',');
    rep->add_option("--output", rep_output, "Output path (default stdout)");

    // ---- compare ----
    auto* cmp = app.add_subcommand("compare",
                                   "Smooth-transform vs hard truncation vs absorbing barrier");
    ModelFlags cmp_flags;
    std::vector<double> cmp_curve;
    std::string cmp_output;
    add_model_flags(cmp, cmp_flags);
    cmp->add_option("--h-curve", cmp_curve, "Emit (H, ratio) rows over these upper bounds")
        ->delimiter(',');
    cmp->add_option("--output", cmp_output, "Output path (default stdout)");

    // ---- simulate ----
    auto* sim = app.add_subcommand("simulate", "Seeded draws and designed experiments");
    ModelFlags sim_flags;
    std::size_t sim_n = 0;
    std::uint64_t sim_seed = 0;
    std::optional<double> sim_censor;
    std::string sim_experiment, sim_output;
    std::size_t sim_replicates = 200;
    double sim_level = 0.95;
    unsigned sim_threads = 1;
    add_model_flags(sim, sim_flags);
    sim->add_option("--n", sim_n, "Number of draws")->required();
    sim->add_option("--seed", sim_seed, "RNG seed")->envname("SHADOW_SEED");
    sim->add_option("--censor-at", sim_censor, "Observation ceiling M; draws above are dropped");
    sim->add_option("--experiment", sim_experiment, "apparent-tail | bootstrap-ci");
    sim->add_option("--replicates", sim_replicates, "Bootstrap replicates (default 200)");
    sim->add_option("--level", sim_level, "Bootstrap CI level (default 0.95)");
    sim->add_option("--threads", sim_threads, "Worker threads (results do not depend on this)");
    sim->add_option("--output", sim_output, "Output path (default stdout)");

    // ---- diagnose ----
    auto* dia = app.add_subcommand("diagnose", "Mean-excess and survival diagnostics as CSV");
    std::string dia_input, dia_format = "auto", dia_output;
    std::size_t dia_column = 0;
    double dia_lower = 0.0, dia_upper = 0.0;
    dia->add_option("--input", dia_input, "CSV or JSONL loss sample")->required();
    dia->add_option("--format", dia_format, "auto|csv|jsonl (default auto)");
    dia->add_option("--column", dia_column, "CSV column index (default 0)");
    dia->add_option("--lower-bound", dia_lower, "Lower bound L")->required();
    dia->add_option("--upper-bound", dia_upper, "Finite upper bound H")->required();
    dia->add_option("--output", dia_output, "Output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (fit->parsed()) {
            return run_fit(fit_input, fit_format, fit_column, fit_lower, fit_upper,
                           fit_thr, fit_thrq, fit_var, fit_es, fit_hgrid, fit_seed,
                           fit_output);
        }
        if (rep->parsed()) {
            return run_report(rep_path, rep_var, rep_es, rep_hgrid, rep_output);
        }
        if (cmp->parsed()) {
            return run_compare(cmp_flags, cmp_curve, cmp_output);
        }
        if (sim->parsed()) {
            return run_simulate(sim_flags, sim_n, sim_seed, sim_censor, sim_experiment,
                                sim_replicates, sim_level, sim_threads, sim_output);
        }
        if (dia->parsed()) {
            return run_diagnose(dia_input, dia_format, dia_column, dia_lower, dia_upper,
                                dia_output);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
