#pragma once

namespace tailrisk::dual {

/// The (L, H) pair defining the smooth map between the bounded variable
/// Y on [L, H] and its unbounded dual Z on [L, inf).
struct Transform {
    double lower = 0.0;  // L
    double upper = 0.0;  // H, finite

    Transform(double L, double H);
};

/// z = phi(y) = L - H log((H - y)/(H - L)); strictly increasing, phi(L) = L.
/// Domain [L, H); y >= H is a domain error rather than +inf.
double phi(const Transform& t, double y);

/// y = phi^-1(z) = H - (H - L) e^((L - z)/H); strictly increasing, never
/// reaches H. Domain [L, inf).
double phi_inverse(const Transform& t, double z);

/// d phi / dy = H / (H - y); the Jacobian relating dual-space and
/// original-space densities.
double phi_derivative(const Transform& t, double y);

}  // namespace tailrisk::dual
