#include "tailrisk/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <stdexcept>
#include <string>

#include "tailrisk/dual.hpp"
#include "tailrisk/errors.hpp"
#include "tailrisk/rng.hpp"

namespace tailrisk::simulate {

namespace {

double shadow_draw(const shadow::Model& m, double w) {
    double y = m.u - (m.H - m.u) * std::expm1(-w / m.H);
    // the mathematical draw is strictly inside (u, H); keep it there in floats
    if (y >= m.H) y = std::nextafter(m.H, m.u);
    if (y <= m.u) y = std::nextafter(m.u, m.H);
    return y;
}

double interp_quantile(const std::vector<double>& sorted, double q) {
    const double h = q * static_cast<double>(sorted.size() - 1);
    const std::size_t i = static_cast<std::size_t>(h);
    if (i + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(i);
    return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

}  // namespace

std::vector<double> sample_gpd(const gpd::Params& params, const Config& cfg) {
    if (cfg.n == 0) {
        throw std::invalid_argument("sample_gpd: n must be >= 1");
    }
    rng::Stream stream(cfg.seed, 0);
    std::vector<double> out(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        out[i] = gpd::quantile(params, stream.uniform(i));
    }
    return out;
}

Sample sample_shadow_y(const shadow::Model& m, const Config& cfg) {
    if (cfg.n == 0) {
        throw std::invalid_argument("sample_shadow_y: n must be >= 1");
    }
    if (cfg.censor_at && !(*cfg.censor_at > m.L && *cfg.censor_at < m.H)) {
        throw std::invalid_argument("sample_shadow_y: censor_at must lie in (L, H)");
    }
    const gpd::Params dual_params{1.0 / m.alpha, m.sigma};
    rng::Stream stream(cfg.seed, 0);
    Sample out;
    out.n_generated = cfg.n;
    out.values.reserve(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        const double y = shadow_draw(m, gpd::quantile(dual_params, stream.uniform(i)));
        if (cfg.censor_at && y > *cfg.censor_at) continue;
        out.values.push_back(y);
    }
    return out;
}

ApparentTailResult apparent_tail_experiment(const shadow::Model& m, const Config& cfg) {
    if (!cfg.censor_at) {
        throw std::invalid_argument("apparent_tail_experiment: censor_at is required");
    }
    const double M = *cfg.censor_at;
    if (!(M <= m.H / 10.0)) {
        throw std::invalid_argument(
            "apparent_tail_experiment: censoring level must satisfy M <= H/10");
    }
    const Sample sample = sample_shadow_y(m, cfg);
    if (sample.values.size() < 30) {
        throw InsufficientDataError(
            "apparent_tail_experiment: fewer than 30 censored draws exceed u");
    }
    const dual::Transform t(m.L, m.H);
    const double zu = dual::phi(t, m.u);
    std::vector<double> y_excess, z_excess;
    y_excess.reserve(sample.values.size());
    z_excess.reserve(sample.values.size());
    for (double y : sample.values) {
        y_excess.push_back(y - m.u);
        z_excess.push_back(dual::phi(t, y) - zu);
    }
    ApparentTailResult out;
    out.naive = gpd::fit_mle(std::move(y_excess), m.u);
    out.dual = gpd::fit_mle(std::move(z_excess), zu);
    out.n_kept = sample.values.size();
    return out;
}

BootstrapCi bootstrap_shadow_mean(std::span<const double> sample, double L, double H,
                                  double u, double level, std::size_t replicates,
                                  std::uint64_t seed, unsigned threads) {
    if (replicates < 100) {
        throw std::invalid_argument("bootstrap_shadow_mean: need >= 100 replicates");
    }
    if (!(level > 0.0) || !(level < 1.0)) {
        throw std::invalid_argument("bootstrap_shadow_mean: level must lie in (0, 1)");
    }
    const dual::Transform t(L, H);
    const double zu = dual::phi(t, u);
    std::vector<double> w;  // transformed exceedances, sorted for determinism
    for (double y : sample) {
        if (y > u) w.push_back(dual::phi(t, y) - zu);
    }
    if (w.size() < 30) {
        throw InsufficientDataError(
            "bootstrap_shadow_mean: need at least 30 exceedances of the threshold");
    }
    std::sort(w.begin(), w.end());

    auto shadow_mean_of = [&](std::vector<double> excesses) {
        const gpd::Fit fit = gpd::fit_mle(std::move(excesses), zu);
        if (!(fit.params.xi > 0.0)) {
            throw DataError("refit produced a non-positive shape");
        }
        return shadow::mean(
            shadow::Model(1.0 / fit.params.xi, fit.params.sigma, L, H, u));
    };

    BootstrapCi out;
    out.level = level;
    out.replicates = replicates;
    out.point = shadow_mean_of(w);

    const std::size_t n = w.size();
    std::vector<double> estimates(replicates,
                                  std::numeric_limits<double>::quiet_NaN());
    auto run_block = [&](std::size_t first, std::size_t last) {
        std::vector<double> resample(n);
        for (std::size_t r = first; r < last; ++r) {
            const rng::Stream stream(seed, r + 1);
            for (std::size_t j = 0; j < n; ++j) {
                auto idx = static_cast<std::size_t>(stream.uniform(j) *
                                                    static_cast<double>(n));
                if (idx >= n) idx = n - 1;
                resample[j] = w[idx];
            }
            try {
                estimates[r] = shadow_mean_of(resample);
            } catch (const std::exception&) {
                // dropped and counted below
            }
        }
    };

    if (threads <= 1) {
        run_block(0, replicates);
    } else {
        // each replicate only touches its own slot and stream, so the
        // partitioning cannot change the result
        const std::size_t chunk = (replicates + threads - 1) / threads;
        std::vector<std::future<void>> futures;
        for (std::size_t first = 0; first < replicates; first += chunk) {
            const std::size_t last = std::min(replicates, first + chunk);
            futures.push_back(
                std::async(std::launch::async, run_block, first, last));
        }
        for (auto& f : futures) f.get();
    }

    std::vector<double> ok;
    ok.reserve(replicates);
    for (double e : estimates) {
        if (!std::isnan(e)) ok.push_back(e);
    }
    out.refit_failures = replicates - ok.size();
    if (out.refit_failures * 10 > replicates) {
        throw DataError("bootstrap_shadow_mean: more than 10% of replicates failed to refit (" +
                        std::to_string(out.refit_failures) + "/" +
                        std::to_string(replicates) + ")");
    }
    std::sort(ok.begin(), ok.end());
    out.lower = interp_quantile(ok, 0.5 * (1.0 - level));
    out.upper = interp_quantile(ok, 0.5 * (1.0 + level));
    // keep the reported triple ordered even for strongly skewed replicates
    out.lower = std::min(out.lower, out.point);
    out.upper = std::max(out.upper, out.point);
    return out;
}

}  // namespace tailrisk::simulate
