#include "tailrisk/dual.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tailrisk::dual {

Transform::Transform(double L, double H) : lower(L), upper(H) {
    if (!std::isfinite(L) || !std::isfinite(H) || !(L < H)) {
        throw std::domain_error("dual::Transform requires finite bounds with L < H");
    }
}

double phi(const Transform& t, double y) {
    if (!(y >= t.lower) || y >= t.upper) {
        throw std::domain_error("phi: y must lie in [L, H); got y = " + std::to_string(y));
    }
    // log((H-y)/(H-L)) written as log1p so tail points with H - y << H keep
    // full precision.
    return t.lower - t.upper * std::log1p((t.lower - y) / (t.upper - t.lower));
}

double phi_inverse(const Transform& t, double z) {
    if (!(z >= t.lower)) {
        throw std::domain_error("phi_inverse: z must be >= L; got z = " + std::to_string(z));
    }
    // L - (H-L) expm1((L-z)/H): exact at z = L, full precision near both ends
    double y = t.lower - (t.upper - t.lower) * std::expm1((t.lower - z) / t.upper);
    if (y >= t.upper) {
        y = std::nextafter(t.upper, t.lower);  // the map never attains H
    }
    return y;
}

double phi_derivative(const Transform& t, double y) {
    if (!(y >= t.lower) || y >= t.upper) {
        throw std::domain_error("phi_derivative: y must lie in [L, H)");
    }
    return t.upper / (t.upper - y);
}

}  // namespace tailrisk::dual
