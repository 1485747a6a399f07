#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

namespace tailrisk::detail {

struct NelderMeadResult {
    std::array<double, 2> x{};
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Two-dimensional Nelder-Mead minimization. Out-of-domain points are
// handled by the objective returning +inf.
inline NelderMeadResult nelder_mead_2d(
    const std::function<double(const std::array<double, 2>&)>& f,
    std::array<double, 2> start, std::array<double, 2> step,
    double ftol = 1e-12, double xtol = 1e-9, int max_iter = 600) {
    using Point = std::array<double, 2>;
    std::array<Point, 3> v{start,
                           Point{start[0] + step[0], start[1]},
                           Point{start[0], start[1] + step[1]}};
    std::array<double, 3> fv{f(v[0]), f(v[1]), f(v[2])};

    auto order = [&] {
        if (fv[0] > fv[1]) { std::swap(fv[0], fv[1]); std::swap(v[0], v[1]); }
        if (fv[1] > fv[2]) { std::swap(fv[1], fv[2]); std::swap(v[1], v[2]); }
        if (fv[0] > fv[1]) { std::swap(fv[0], fv[1]); std::swap(v[0], v[1]); }
    };

    NelderMeadResult out;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        order();
        const double fspread = std::fabs(fv[2] - fv[0]);
        const double xspread = std::max(
            std::max(std::fabs(v[1][0] - v[0][0]), std::fabs(v[2][0] - v[0][0])),
            std::max(std::fabs(v[1][1] - v[0][1]), std::fabs(v[2][1] - v[0][1])));
        if (fspread <= ftol * (1.0 + std::fabs(fv[0])) &&
            xspread <= xtol * (1.0 + std::fabs(v[0][0]) + std::fabs(v[0][1]))) {
            out.converged = true;
            break;
        }
        const Point centroid{0.5 * (v[0][0] + v[1][0]), 0.5 * (v[0][1] + v[1][1])};
        auto along = [&](double coef) {
            return Point{centroid[0] + coef * (centroid[0] - v[2][0]),
                         centroid[1] + coef * (centroid[1] - v[2][1])};
        };
        const Point xr = along(1.0);
        const double fr = f(xr);
        if (fr < fv[0]) {
            const Point xe = along(2.0);
            const double fe = f(xe);
            if (fe < fr) { v[2] = xe; fv[2] = fe; }
            else { v[2] = xr; fv[2] = fr; }
        } else if (fr < fv[1]) {
            v[2] = xr;
            fv[2] = fr;
        } else {
            const Point xc = fr < fv[2] ? along(0.5) : along(-0.5);
            const double fc = f(xc);
            if (fc < std::min(fr, fv[2])) {
                v[2] = xc;
                fv[2] = fc;
            } else {
                for (int i = 1; i < 3; ++i) {
                    v[i][0] = v[0][0] + 0.5 * (v[i][0] - v[0][0]);
                    v[i][1] = v[0][1] + 0.5 * (v[i][1] - v[0][1]);
                    fv[i] = f(v[i]);
                }
            }
        }
    }
    order();
    out.x = v[0];
    out.f = fv[0];
    out.iterations = iter;
    return out;
}

}  // namespace tailrisk::detail
