#pragma once

#include <cmath>
#include <stdexcept>
#include <tuple>

namespace blowup {

struct ProfileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace profiles {

// ---- explicit steady-state families -------------------------------------

// Rescaled Riccati steady states (1 + c z^2)^{-1}, c > 0.
inline double riccati(double z, double c) {
    if (!(c > 0.0)) throw ProfileError("riccati profile: c must be positive");
    return 1.0 / (1.0 + c * z * z);
}

// Inviscid rescaled-heat profile (1 + z^2/8)^{-1}.
inline double heat(double z) { return 1.0 / (1.0 + z * z / 8.0); }

// High-order-vanishing profile (1 + c y^{2m})^{-1}, m integer > 1.
inline double high_order(double y, int m, double c) {
    if (m < 2) throw ProfileError("high-order profile: m must exceed 1");
    if (!(c > 0.0)) throw ProfileError("high-order profile: c must be positive");
    return 1.0 / (1.0 + c * std::pow(y * y, m));
}

// Smooth steady state of the weak-advection system: (u, omega, psi) = sin x.
inline std::tuple<double, double, double> houli_smooth(double x) {
    double s = std::sin(x);
    return {s, s, s};
}

// ---- residual evaluators (analytic derivatives, no discretization) ------

// -U - (1/2) z U_z + U^2 for the Riccati/heat steady equation.
inline double riccati_residual(double z, double c) {
    double U = riccati(z, c);
    double Uz = -2.0 * c * z * U * U;
    return -U - 0.5 * z * Uz + U * U;
}

inline double heat_residual(double z) { return riccati_residual(z, 0.125); }

// -U - (1/2m) y U_y + U^2 for the m-th order vanishing equation.
inline double high_order_residual(double y, int m, double c) {
    double U = high_order(y, m, c);
    double p = std::pow(y * y, m);  // y^{2m}
    double Uy = (y == 0.0) ? 0.0 : -c * 2.0 * m * p / y * U * U;
    return -U - 0.5 / m * y * Uy + U * U;
}

// Inviscid a = 1 rescaled weak-advection RHS at the sin steady state with
// c_u = 0; both components coincide and cancel termwise.
inline std::tuple<double, double> houli_smooth_residual(double x) {
    double s = std::sin(x), cx = std::cos(x);
    double ru = -2.0 * s * cx + 2.0 * s * cx;
    double rw = -2.0 * s * cx + 2.0 * s * cx;
    return {ru, rw};
}

// ---- implicit self-similar Burgers profile -------------------------------

// Root of G(U) = U + C sgn(U)|U|^{1+1/lam} = -y.  G is strictly increasing,
// so bisection from the seed bracket [-(1+|y|), 1+|y|] always converges.
// The signed power keeps U odd in y for non-integer exponents.
inline double burgers_profile(double y, double lam, double C) {
    if (!(lam > 0.0) || !(C > 0.0))
        throw ProfileError("burgers profile: lambda and C must be positive");
    const double p = 1.0 + 1.0 / lam;
    auto G = [&](double U) {
        return U + C * (U < 0 ? -std::pow(-U, p) : std::pow(U, p));
    };
    double lo = -(1.0 + std::fabs(y)), hi = 1.0 + std::fabs(y);
    double target = -y;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (G(mid) < target)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-16 * (1.0 + std::fabs(mid))) break;
    }
    return 0.5 * (lo + hi);
}

// dU/dy by implicit differentiation of y + U + C sgn(U)|U|^{1+1/lam} = 0.
inline double burgers_slope(double U, double lam, double C) {
    return -1.0 / (1.0 + C * (1.0 + 1.0 / lam) * std::pow(std::fabs(U), 1.0 / lam));
}

// Residual of the profile equation -lam U + ((1+lam) y + U) U_y.
inline double burgers_residual(double lam, double C, double y) {
    double U = burgers_profile(y, lam, C);
    double Uy = burgers_slope(U, lam, C);
    return -lam * U + ((1.0 + lam) * y + U) * Uy;
}

}  // namespace profiles
}  // namespace blowup
