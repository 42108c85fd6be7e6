#pragma once

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "blowup/spline.hpp"

namespace blowup {

enum class ModelFamily { riccati, heat, houli };

struct ModelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateAnchor : ModelError {
    using ModelError::ModelError;
};
struct ParityViolation : ModelError {
    using ModelError::ModelError;
};

// Which rescaled PDE is evolved and which normalization rule closes it.
struct ModelSpec {
    ModelFamily family = ModelFamily::heat;
    int dim = 1;          // heat only, 1 or 2
    double a = 1.0;       // advection strength (houli)
    double nu = 0.0;      // viscosity
    double alpha = 1.0;   // Hoelder exponent; 1 = smooth variant

    void validate() const {
        if (dim != 1 && dim != 2) throw ModelError("model: dim must be 1 or 2");
        if (family == ModelFamily::houli) {
            if (!(a > 0.0 && a <= 1.0)) throw ModelError("model: a must lie in (0, 1]");
            if (nu < 0.0) throw ModelError("model: nu must be nonnegative");
            if (!(alpha > 0.875 && alpha <= 1.0))
                throw ModelError("model: alpha must lie in (7/8, 1]");
        }
    }
};

namespace models {

constexpr double kAnchorGuard = 1e-12;

// ---- Riccati ------------------------------------------------------------

// -u - (1/2) z u_z + u^2 from node values and first derivatives.
inline std::vector<double> riccati_rhs(const std::vector<double>& z,
                                       const std::vector<double>& u,
                                       const std::vector<double>& uz) {
    std::vector<double> r(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        r[i] = -u[i] - 0.5 * z[i] * uz[i] + u[i] * u[i];
    return r;
}

inline std::vector<double> riccati_rhs(const SplineField& u) {
    return riccati_rhs(u.grid().nodes, u.values(), u.nodal_derivative(1));
}

// ---- semilinear heat ----------------------------------------------------

// 1D rescaled RHS c_u u - c_l z u_z + u^2 + lambda u_zz.
inline std::vector<double> heat_rhs(const std::vector<double>& z,
                                    const std::vector<double>& u,
                                    const std::vector<double>& uz,
                                    const std::vector<double>& uzz, double c_u,
                                    double c_l, double lambda) {
    std::vector<double> r(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        r[i] = c_u * u[i] - c_l * z[i] * uz[i] + u[i] * u[i] + lambda * uzz[i];
    return r;
}

inline std::vector<double> heat_rhs(const SplineField& u, double c_u, double c_l,
                                    double lambda) {
    return heat_rhs(u.grid().nodes, u.values(), u.nodal_derivative(1),
                    u.nodal_derivative(2), c_u, c_l, lambda);
}

// Pointwise 2D combination; the caller supplies tensor-grid derivative arrays.
inline double heat_rhs_2d_point(double u, double x, double y, double ux, double uy,
                                double uxx, double uyy, double c_u, double c_l1,
                                double c_l2, double lam1, double lam2) {
    return c_u * u - c_l1 * x * ux - c_l2 * y * uy + u * u + lam1 * uxx + lam2 * uyy;
}

// Normalization constants that freeze u(0) and the axis second derivatives.
// 1D:  c_u = -u(0) - lam u_zz(0)/u(0),
//      c_l = c_u/2 + u(0) + lam u_zzzz(0) / (2 u_zz(0)).
inline std::pair<double, double> heat_normalization(double u0, double u2, double u4,
                                                    double lambda) {
    if (std::fabs(u0) < kAnchorGuard)
        throw DegenerateAnchor("heat normalization: |u(0)| below guard");
    if (std::fabs(u2) < kAnchorGuard)
        throw DegenerateAnchor("heat normalization: |u_zz(0)| below guard");
    double c_u = -u0 - lambda * u2 / u0;
    double c_l = 0.5 * c_u + u0 + lambda * u4 / (2.0 * u2);
    return {c_u, c_l};
}

// 2D three-constant version with the mixed derivative u_xxyy(0,0).
struct HeatRates2D {
    double c_u, c_l1, c_l2;
};
inline HeatRates2D heat_normalization_2d(double u0, double uxx0, double uyy0,
                                         double uxxxx0, double uxxyy0, double uyyyy0,
                                         double lam1, double lam2) {
    if (std::fabs(u0) < kAnchorGuard)
        throw DegenerateAnchor("heat normalization: |u(0,0)| below guard");
    if (std::fabs(uxx0) < kAnchorGuard || std::fabs(uyy0) < kAnchorGuard)
        throw DegenerateAnchor("heat normalization: axis second derivative below guard");
    HeatRates2D r;
    r.c_u = -u0 - (lam1 * uxx0 + lam2 * uyy0) / u0;
    r.c_l1 = 0.5 * r.c_u + u0 + (lam1 * uxxxx0 + lam2 * uxxyy0) / (2.0 * uxx0);
    r.c_l2 = 0.5 * r.c_u + u0 + (lam1 * uxxyy0 + lam2 * uyyyy0) / (2.0 * uyy0);
    return r;
}

// ---- periodic Biot-Savart ----------------------------------------------

namespace detail {

// Cached FFTW halfcomplex plans, one pair per transform size.
struct FftPlans {
    fftw_plan fwd = nullptr, inv = nullptr;
    std::vector<double> in, out;
};

inline FftPlans& plans_for(std::size_t n) {
    thread_local std::map<std::size_t, FftPlans> cache;
    auto& p = cache[n];
    if (!p.fwd) {
        p.in.resize(n);
        p.out.resize(n);
        p.fwd = fftw_plan_r2r_1d(static_cast<int>(n), p.in.data(), p.out.data(),
                                 FFTW_R2HC, FFTW_ESTIMATE);
        p.inv = fftw_plan_r2r_1d(static_cast<int>(n), p.in.data(), p.out.data(),
                                 FFTW_HC2R, FFTW_ESTIMATE);
    }
    return p;
}

}  // namespace detail

// Sine coefficients B_k (f = sum B_k sin kx) of samples on the uniform
// periodic grid; throws if the even (cosine) content exceeds the tolerance.
inline std::vector<double> sine_coefficients(const std::vector<double>& f,
                                             double parity_tol = 1e-10) {
    const std::size_t n = f.size();
    auto& p = detail::plans_for(n);
    std::copy(f.begin(), f.end(), p.in.begin());
    fftw_execute(p.fwd);
    double even_max = std::fabs(p.out[0]) / n;
    for (std::size_t k = 1; k <= n / 2; ++k)
        even_max = std::max(even_max, 2.0 * std::fabs(p.out[k]) / n);
    if (even_max > parity_tol)
        throw ParityViolation("biot-savart: even-component contamination in odd field");
    std::vector<double> b(n / 2, 0.0);  // b[k] for k = 1 .. n/2-1
    for (std::size_t k = 1; k < n / 2; ++k) b[k] = -2.0 * p.out[n - k] / n;
    return b;
}

// Samples of sum B_k sin kx on the uniform periodic grid.
inline std::vector<double> from_sine_coefficients(const std::vector<double>& b,
                                                  std::size_t n) {
    auto& p = detail::plans_for(n);
    std::fill(p.in.begin(), p.in.end(), 0.0);
    for (std::size_t k = 1; k < n / 2 && k < b.size(); ++k) p.in[n - k] = -0.5 * n * b[k];
    fftw_execute(p.inv);
    std::vector<double> out(p.out.begin(), p.out.end());
    for (double& v : out) v /= n;
    return out;
}

struct BiotSavartResult {
    std::vector<double> psi;      // stream function at nodes
    double psi_x0_series;         // sum B_k / k from the sine series
    double psi_x0_quadrature;     // -(1/2pi) integral of y w(y) dy
};

namespace detail {

// Composite quadrature of samples on [0, 2pi) extended periodically is not
// appropriate for y*w(y) (the integrand is not periodic), so use closed
// Newton-Cotes on [0, 2pi]: Boole when 4 | n, otherwise Simpson.
inline double moment_quadrature(const std::vector<double>& w) {
    const std::size_t n = w.size();
    const double h = 2.0 * M_PI / n;
    auto g = [&](std::size_t j) {  // y * w(y), with the wrap node at y = 2pi
        return (j == n) ? 2.0 * M_PI * w[0] : (h * j) * w[j];
    };
    double s = 0.0;
    if (n % 4 == 0) {
        for (std::size_t j = 0; j < n; j += 4)
            s += (2.0 * h / 45.0) *
                 (7.0 * g(j) + 32.0 * g(j + 1) + 12.0 * g(j + 2) + 32.0 * g(j + 3) +
                  7.0 * g(j + 4));
    } else if (n % 2 == 0) {
        for (std::size_t j = 0; j < n; j += 2)
            s += (h / 3.0) * (g(j) + 4.0 * g(j + 1) + g(j + 2));
    } else {
        for (std::size_t j = 0; j < n; ++j) s += 0.5 * h * (g(j) + g(j + 1));
    }
    return -s / (2.0 * M_PI);
}

}  // namespace detail

// Solves -psi_xx = w for odd periodic w via the discrete sine transform and
// reports psi_x(0) both from the series and from the moment quadrature.
inline BiotSavartResult biot_savart(const std::vector<double>& w) {
    auto b = sine_coefficients(w);
    std::vector<double> bp(b.size(), 0.0);
    double slope = 0.0;
    for (std::size_t k = 1; k < b.size(); ++k) {
        bp[k] = b[k] / static_cast<double>(k * k);
        slope += b[k] / static_cast<double>(k);
    }
    BiotSavartResult r;
    r.psi = from_sine_coefficients(bp, w.size());
    r.psi_x0_series = slope;
    r.psi_x0_quadrature = detail::moment_quadrature(w);
    return r;
}

inline BiotSavartResult biot_savart(const SplineField& w) {
    if (w.grid().kind != GridKind::periodic)
        throw ModelError("biot-savart: periodic grid required");
    return biot_savart(w.values());
}

// ---- weak-advection (Hou-Li) system ------------------------------------

// u_t = -2a psi u_x + 2 u psi_x + c_u u + nu C_u u_xx
// w_t = -2a psi w_x + (u^2)_x + c_u w + nu C_u w_xx
inline std::pair<std::vector<double>, std::vector<double>> houli_rhs(
    const std::vector<double>& u, const std::vector<double>& w,
    const std::vector<double>& psi, const std::vector<double>& ux,
    const std::vector<double>& wx, const std::vector<double>& psix, double a,
    double c_u, double nuCu = 0.0, const std::vector<double>* uxx = nullptr,
    const std::vector<double>* wxx = nullptr) {
    const std::size_t n = u.size();
    std::vector<double> ru(n), rw(n);
    for (std::size_t i = 0; i < n; ++i) {
        ru[i] = -2.0 * a * psi[i] * ux[i] + 2.0 * u[i] * psix[i] + c_u * u[i];
        rw[i] = -2.0 * a * psi[i] * wx[i] + 2.0 * u[i] * ux[i] + c_u * w[i];
        if (nuCu != 0.0) {
            ru[i] += nuCu * (*uxx)[i];
            rw[i] += nuCu * (*wxx)[i];
        }
    }
    return {std::move(ru), std::move(rw)};
}

// Full-field normalization: smooth variants use c_u = 2(a-1) psi_x(0) with the
// viscous correction -nu C_u u_xxx(0)/u_x(0); the Hoelder variant anchors only
// the (smooth) stream-function slope via c_u = (alpha-1) psi_x(0).
inline double houli_normalization(double psi_x0, double a, double nu, double Cu,
                                  double u_x0 = 1.0, double u_xxx0 = 0.0,
                                  double alpha = 1.0) {
    if (alpha < 1.0) return (alpha - 1.0) * psi_x0;
    double c_u = 2.0 * (a - 1.0) * psi_x0;
    if (nu != 0.0) {
        if (std::fabs(u_x0) < kAnchorGuard)
            throw DegenerateAnchor("houli normalization: |u_x(0)| below guard");
        c_u -= nu * Cu * u_xxx0 / u_x0;
    }
    return c_u;
}

// ---- Hoelder-continuous approximate steady state ------------------------

struct AlphaSteadyState {
    std::vector<double> omega, u, psi;
    double psi_x0;
};

// omega = sgn|sin|^alpha, u = sgn|sin|^{(1+alpha)/2} on the periodic grid;
// psi integrates the vorticity twice:
//   psi(x) = int_0^x (y - x) omega(y) dy + x psi_x(0),
//   psi_x(0) = -(1/2pi) int_0^{2pi} y omega(y) dy.
inline AlphaSteadyState alpha_steady_state(double alpha, const Grid1D& grid) {
    if (!(alpha > 0.875 && alpha <= 1.0))
        throw ModelError("alpha steady state: alpha must lie in (7/8, 1]");
    if (grid.kind != GridKind::periodic)
        throw ModelError("alpha steady state: periodic grid required");
    const std::size_t n = grid.size();
    AlphaSteadyState s;
    s.omega.resize(n);
    s.u.resize(n);
    s.psi.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sx = std::sin(grid.nodes[i]);
        double sgn = (sx > 0) - (sx < 0);
        s.omega[i] = sgn * std::pow(std::fabs(sx), alpha);
        s.u[i] = sgn * std::pow(std::fabs(sx), 0.5 * (1.0 + alpha));
    }
    s.psi_x0 = detail::moment_quadrature(s.omega);
    // Cumulative trapezoid of omega and y*omega gives the double integral.
    double iw = 0.0, iyw = 0.0;
    s.psi[0] = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        double h = grid.nodes[i] - grid.nodes[i - 1];
        iw += 0.5 * h * (s.omega[i] + s.omega[i - 1]);
        iyw += 0.5 * h *
               (grid.nodes[i] * s.omega[i] + grid.nodes[i - 1] * s.omega[i - 1]);
        s.psi[i] = iyw - grid.nodes[i] * iw + grid.nodes[i] * s.psi_x0;
    }
    return s;
}

}  // namespace models
}  // namespace blowup
