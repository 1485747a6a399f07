#include "tailrisk/numerics.hpp"
#include "tailrisk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace tailrisk::numerics {

namespace {

constexpr double kEps = 2.220446049250313e-16;
constexpr double kEulerGamma = 0.57721566490153286061;

// zeta(2) .. zeta(8), used by the pole-grouped series below.
constexpr double kZeta[9] = {0.0, 0.0,
                             1.6449340668482264365, 1.2020569031595942854,
                             1.0823232337111381916, 1.0369277551433699263,
                             1.0173430619844491397, 1.0083492773819228268,
                             1.0040773561979443394};

// Modified Lentz evaluation of the Legendre-type continued fraction F with
// Gamma(s, x) = F(s, x) * x^(s-1) * e^(-x). Convergent for x >= 1/4 at any
// real s (the terms do not oscillate for s <= 0).
double gamma_cf_factor(double s, double x) {
    const double tiny = 1e-300;
    double hn = 1.0;
    double cn = 1.0 / tiny;
    double dn = 1.0;
    for (int n = 2; n < 200000; ++n) {
        const double an = (n & 1) ? 0.5 * (n - 1) / x : (0.5 * n - s) / x;
        dn = 1.0 + an * dn;
        if (std::fabs(dn) < tiny) dn = tiny;
        cn = 1.0 + an / cn;
        if (std::fabs(cn) < tiny) cn = tiny;
        dn = 1.0 / dn;
        const double delta = cn * dn;
        hn *= delta;
        if (std::fabs(delta - 1.0) < kEps) return hn;
    }
    throw NonConvergenceError("incomplete gamma continued fraction did not converge");
}

// Gamma(s, x) for s > 0 in the series regime (x < s + 1):
// Gamma(s) - x^s e^(-x) * sum_{n>=0} x^n / (s (s+1) ... (s+n)).
double upper_gamma_positive_series(double s, double x) {
    double ap = s;
    double del = 1.0 / s;
    double sum = del;
    for (int n = 0; n < 10000; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-17) {
            return std::tgamma(s) - sum * std::exp(s * std::log(x) - x);
        }
    }
    throw NonConvergenceError("lower incomplete gamma series did not converge");
}

double digamma_of_int(int m) {
    double psi = -kEulerGamma;
    for (int j = 1; j < m; ++j) psi += 1.0 / j;
    return psi;
}

// sum_{j=1}^{m-1} j^(-k)
double zeta_partial(int m, int k) {
    double s = 0.0;
    for (int j = 1; j < m; ++j) s += std::pow(static_cast<double>(j), -k);
    return s;
}

// x^alpha * Gamma(1 - alpha, x) for alpha >= 1 and 0 < x < 1/4, by the
// small-x expansion with s = 1 - alpha:
//
//   x^alpha Gamma(s) - x * sum_{k>=0} (-x)^k / (k! (s + k)).
//
// Gamma(s) has poles at the nonpositive integers and the k = k0 series term
// (s + k0 = delta, the signed distance of alpha from its nearest integer)
// blows up with it; their difference stays finite. For small delta the two
// are combined analytically through expm1 of
//   h(delta) = delta (psi(m) - ln x) + higher-order zeta terms,
// which is exact in the limit delta -> 0 (integer alpha).
double scaled_upper_gamma_small_x(double alpha, double x) {
    if (alpha > 1e15) {
        // Leading term of the expansion; corrections are O(x/alpha).
        return x / (alpha - 1.0);
    }
    const int k0 = static_cast<int>(std::lround(alpha)) - 1;
    const int m = k0 + 1;
    const double delta = static_cast<double>(m) - alpha;
    const double s = 1.0 - alpha;
    const double log_x = std::log(x);
    const double sign = (k0 & 1) ? -1.0 : 1.0;

    double bracket;
    const double log_weight = m * log_x - std::lgamma(static_cast<double>(m));
    if (log_weight < -800.0) {
        bracket = 0.0;  // pole group underflows; only the plain series terms matter
    } else if (std::fabs(delta) < 1.0 / 64.0) {
        double q;
        if (delta == 0.0) {
            q = digamma_of_int(m) - log_x;
        } else {
            double h = delta * (digamma_of_int(m) - log_x);
            double dpow = delta;
            for (int j = 2; j <= 8; ++j) {
                dpow *= delta;
                double cj = -(kZeta[j] - zeta_partial(m, j)) / j;
                if ((j & 1) == 0) cj += 2.0 * kZeta[j] / j;
                h += dpow * cj;
            }
            q = std::expm1(h) / delta;
        }
        bracket = sign * std::exp(log_weight) * q;
    } else {
        // x^alpha Gamma(s) via the reflection Gamma(s) Gamma(alpha) sin(pi s) = pi
        const double pole_term = M_PI / std::sin(M_PI * delta) *
                                 std::exp(alpha * log_x - std::lgamma(alpha));
        const double series_term = std::exp(m * log_x - std::lgamma(static_cast<double>(m))) / delta;
        bracket = sign * (pole_term - series_term);
    }

    // remaining series terms, k != k0
    double tail = 0.0;
    double tk = 1.0;  // (-x)^k / k!
    for (int k = 0; k < 500; ++k) {
        if (k != k0) {
            const double term = tk / (s + k);
            tail += term;
            if (k > k0 && std::fabs(term) < 1e-18 * (std::fabs(tail) + 1e-300)) break;
        }
        tk *= -x / (k + 1);
    }
    return bracket - x * tail;
}

}  // namespace

double scaled_upper_gamma(double alpha, double x) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw std::domain_error("scaled_upper_gamma: alpha must be positive and finite");
    }
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw std::domain_error("scaled_upper_gamma: x must be positive and finite");
    }
    if (x >= 0.25) {
        // x^alpha * F(1-alpha, x) x^(-alpha) e^(-x); the powers cancel exactly.
        return gamma_cf_factor(1.0 - alpha, x) * std::exp(-x);
    }
    if (alpha < 1.0) {
        return std::exp(alpha * std::log(x)) * upper_gamma_positive_series(1.0 - alpha, x);
    }
    return scaled_upper_gamma_small_x(alpha, x);
}

double exp_scaled_upper_gamma(double alpha, double x) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw std::domain_error("exp_scaled_upper_gamma: alpha must be positive and finite");
    }
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw std::domain_error("exp_scaled_upper_gamma: x must be positive and finite");
    }
    if (x >= 0.25) {
        // e^x * [F(1-alpha, x) x^(-alpha) e^(-x)] * x^alpha = F(1-alpha, x)
        return gamma_cf_factor(1.0 - alpha, x);
    }
    return std::exp(x) * scaled_upper_gamma(alpha, x);
}

double upper_incomplete_gamma(double s, double x) {
    if (std::isnan(s) || std::isnan(x)) {
        throw std::domain_error("upper_incomplete_gamma: NaN argument");
    }
    if (x < 0.0) {
        throw std::domain_error("upper_incomplete_gamma: x must be >= 0");
    }
    if (x == 0.0) {
        if (s <= 0.0) {
            throw std::domain_error("upper_incomplete_gamma: integral diverges at x = 0 for s <= 0");
        }
        return std::tgamma(s);
    }
    if (s > 0.0) {
        const bool series_ok = x < s + 1.0 && (s >= 0.5 || x < 0.25);
        if (series_ok) return upper_gamma_positive_series(s, x);
        return gamma_cf_factor(s, x) * std::exp((s - 1.0) * std::log(x) - x);
    }
    if (x >= 0.25) {
        return gamma_cf_factor(s, x) * std::exp((s - 1.0) * std::log(x) - x);
    }
    // Gamma(s, x) = x^(s-1) * [x^(1-s) Gamma(s, x)]; assembled in log space so
    // values near the top of double range survive the unfusing.
    const double fused = scaled_upper_gamma(1.0 - s, x);
    return std::exp((s - 1.0) * std::log(x) + std::log(fused));
}

double exponential_integral(double nu, double x) {
    if (std::isnan(nu) || !(x > 0.0)) {
        throw std::domain_error("exponential_integral: requires x > 0");
    }
    if (x >= 1.0) {
        // Lentz form of the classic E_nu continued fraction; independent of
        // the Gamma(s, x) fraction above.
        const double tiny = 1e-300;
        double b = x + nu;
        if (std::fabs(b) < tiny) b = tiny;
        double c = 1.0 / tiny;
        double d = 1.0 / b;
        double h = d;
        for (int i = 1; i < 200000; ++i) {
            const double a = -static_cast<double>(i) * (nu - 1.0 + i);
            b += 2.0;
            double denom = a * d + b;
            if (std::fabs(denom) < tiny) denom = tiny;
            d = 1.0 / denom;
            c = b + a / c;
            if (std::fabs(c) < tiny) c = tiny;
            const double del = c * d;
            h *= del;
            if (std::fabs(del - 1.0) < kEps) return h * std::exp(-x);
        }
        throw NonConvergenceError("exponential integral continued fraction did not converge");
    }
    if (nu > 0.0) {
        return scaled_upper_gamma(nu, x) / x;
    }
    return std::exp((nu - 1.0) * std::log(x)) * upper_incomplete_gamma(1.0 - nu, x);
}

namespace {

// QUADPACK dqk15 nodes and weights.
constexpr double kXgk[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691, 0.7415311855993944,
    0.5860872354676911, 0.4058451513773972, 0.2077849550078985, 0.0};
constexpr double kWgk[8] = {
    0.0229353220105292, 0.0630920926299786, 0.1047900103222502, 0.1406532597155259,
    0.1690047266392679, 0.1903505780647854, 0.2044329400752989, 0.2094821410847278};
constexpr double kWg[4] = {
    0.1294849661688697, 0.2797053914892767, 0.3818300505051189, 0.4179591836734694};

struct Segment {
    double a;
    double b;
    double value;
    double error;
};

bool by_error(const Segment& lhs, const Segment& rhs) { return lhs.error < rhs.error; }

Segment gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = kWgk[7] * fc;
    double resg = kWg[3] * fc;
    double resabs = kWgk[7] * std::fabs(fc);
    double fv1[7];
    double fv2[7];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        fv1[j] = f(c - dx);
        fv2[j] = f(c + dx);
        const double fsum = fv1[j] + fv2[j];
        resk += kWgk[j] * fsum;
        resabs += kWgk[j] * (std::fabs(fv1[j]) + std::fabs(fv2[j]));
        if (j & 1) resg += kWg[(j - 1) / 2] * fsum;
    }
    if (!std::isfinite(resk)) {
        return {a, b, 0.0, kInfinity};
    }
    const double reskh = resk * 0.5;
    double resasc = kWgk[7] * std::fabs(fc - reskh);
    for (int j = 0; j < 7; ++j) {
        resasc += kWgk[j] * (std::fabs(fv1[j] - reskh) + std::fabs(fv2[j] - reskh));
    }
    resabs *= std::fabs(h);
    resasc *= std::fabs(h);
    double err = std::fabs((resk - resg) * h);
    if (resasc != 0.0 && err != 0.0) {
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    }
    const double uflow = 2.2250738585072014e-308;
    if (resabs > uflow / (50.0 * kEps)) {
        err = std::max(50.0 * kEps * resabs, err);
    }
    return {a, b, resk * h, err};
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b, double tol,
                                    std::size_t max_evaluations) {
    if (!(tol > 0.0) || !std::isfinite(tol)) {
        throw std::invalid_argument("integrate_adaptive: tol must be positive and finite");
    }
    if (!std::isfinite(a) || std::isnan(b) || b < a) {
        throw std::invalid_argument("integrate_adaptive: bad interval");
    }

    std::function<double(double)> g;
    double lo = a, hi = b;
    if (std::isinf(b)) {
        // x = a + u/(1-u)^3 maps [0,1) onto [a,inf); the cubic growth keeps
        // slowly decaying tails representable far beyond 1/eps.
        g = [&f, a](double u) {
            const double om = 1.0 - u;
            const double om3 = om * om * om;
            const double x = a + u / om3;
            const double fx = f(x);
            if (fx == 0.0) return 0.0;
            return fx * (1.0 + 2.0 * u) / (om3 * om);
        };
        lo = 0.0;
        hi = 1.0;
    } else {
        g = f;
    }

    if (lo == hi) {
        (void)f(lo);
        return {0.0, 0.0, 1};
    }

    std::vector<Segment> heap;
    heap.reserve(512);
    std::vector<Segment> settled;  // too narrow to split further
    std::size_t evals = 15;
    heap.push_back(gk15(g, lo, hi));

    // Totals are kept incrementally; infinite estimates (overflowing
    // integrand) are tracked by count so that inf - inf never corrupts the
    // running sum, and both totals are refreshed from scratch periodically
    // to shed accumulation drift.
    double total_value = 0.0, total_error = 0.0;
    std::size_t inf_count = 0;
    auto refresh_totals = [&] {
        total_value = 0.0;
        total_error = 0.0;
        inf_count = 0;
        for (const auto& segs : {std::cref(heap), std::cref(settled)}) {
            for (const Segment& s : segs.get()) {
                total_value += s.value;
                if (std::isinf(s.error)) {
                    ++inf_count;
                } else {
                    total_error += s.error;
                }
            }
        }
    };
    refresh_totals();

    auto target = [&] { return std::max(tol, tol * std::fabs(total_value)); };

    std::size_t splits = 0;
    while (inf_count > 0 || total_error > target()) {
        if (heap.empty()) {
            throw NonConvergenceError(
                "integrate_adaptive: error estimate stuck above tolerance on "
                "unsplittable subintervals");
        }
        std::pop_heap(heap.begin(), heap.end(), by_error);
        const Segment worst = heap.back();
        heap.pop_back();
        if (worst.b - worst.a <=
            kEps * (std::fabs(worst.a) + std::fabs(worst.b)) + 1e-300) {
            settled.push_back(worst);
            continue;
        }
        if (evals + 30 > max_evaluations) {
            throw NonConvergenceError(
                "integrate_adaptive: evaluation budget exhausted (" +
                std::to_string(max_evaluations) + "); integrand may be ill-posed");
        }
        const double mid = 0.5 * (worst.a + worst.b);
        const Segment left = gk15(g, worst.a, mid);
        const Segment right = gk15(g, mid, worst.b);
        evals += 30;
        for (const Segment& part : {left, right}) {
            total_value += part.value;
            if (std::isinf(part.error)) {
                ++inf_count;
            } else {
                total_error += part.error;
            }
        }
        total_value -= worst.value;
        if (std::isinf(worst.error)) {
            --inf_count;
        } else {
            total_error -= worst.error;
        }
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), by_error);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), by_error);
        if (++splits % 256 == 0) {
            refresh_totals();
            std::make_heap(heap.begin(), heap.end(), by_error);
        }
    }

    // Recompute the totals in positional order for a reproducible, drift-free
    // final answer.
    heap.insert(heap.end(), settled.begin(), settled.end());
    std::sort(heap.begin(), heap.end(),
              [](const Segment& lhs, const Segment& rhs) { return lhs.a < rhs.a; });
    double value = 0.0, error = 0.0;
    for (const Segment& s : heap) {
        value += s.value;
        error += s.error;
    }
    return {value, error, evals};
}

}  // namespace tailrisk::numerics
