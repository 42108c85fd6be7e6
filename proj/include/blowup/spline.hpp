#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "blowup/grid.hpp"

namespace blowup {

enum class Parity { even, odd, none };

struct SplineError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Solves the natural-spline tridiagonal system for second derivatives.
// diag/lower/upper are the standard coefficients; rhs is overwritten.
inline std::vector<double> solve_tridiagonal(std::vector<double> lower,
                                             std::vector<double> diag,
                                             std::vector<double> upper,
                                             std::vector<double> rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> x(n);
    x[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
    return x;
}

}  // namespace detail

// Cubic-spline interpolant of node values.  Half-line grids are extended by
// parity reflection about 0 and closed with natural end conditions; periodic
// grids use the cyclic spline.  Evaluation supports derivative orders 0-2
// anywhere in the span; orders 3-4 are available only at the origin of
// half-line grids through a parity-constrained local polynomial fit.
class SplineField {
  public:
    SplineField() = default;

    SplineField(const Grid1D& grid, std::vector<double> values, Parity parity)
        : grid_(grid), values_(std::move(values)), parity_(parity) {
        if (values_.size() != grid_.size())
            throw SplineError("build_spline: value count does not match node count");
        for (double v : values_)
            if (!std::isfinite(v)) throw SplineError("build_spline: non-finite value");
        if (grid_.kind == GridKind::periodic) {
            build_periodic();
        } else {
            if (parity_ == Parity::none)
                throw SplineError("build_spline: half-line grids need even or odd parity");
            if (parity_ == Parity::odd && values_[0] != 0.0)
                throw SplineError("build_spline: odd parity requires value 0 at the origin");
            build_reflected();
        }
    }

    const Grid1D& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    Parity parity() const { return parity_; }

    double eval(double x, int order = 0) const {
        if (order < 0 || order > 4) throw SplineError("eval: unsupported derivative order");
        if (order >= 3) {
            if (grid_.kind == GridKind::periodic || x != 0.0)
                throw SplineError("eval: orders 3-4 supported only at the origin of half-line grids");
            return origin_fit_derivative(order);
        }
        if (grid_.kind == GridKind::periodic) {
            double p = grid_.period;
            x -= p * std::floor(x / p);
        } else if (x < x_[0] || x > x_.back()) {
            throw SplineError("eval: point outside grid span");
        }
        return piece_eval(x, order);
    }

    // Spline derivatives at the stored (half-line or periodic) nodes; cheaper
    // than repeated eval() because no interval search is needed.
    std::vector<double> nodal_derivative(int order) const {
        if (order < 1 || order > 2) throw SplineError("nodal_derivative: order must be 1 or 2");
        const std::size_t n = grid_.size();
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j = offset_ + i;  // index in extended arrays
            if (order == 2) {
                out[i] = m_[j];
                continue;
            }
            std::size_t p = (j + 1 < x_.size()) ? j : j - 1;  // piece to the right, else left
            double h = x_[p + 1] - x_[p];
            double df = (y_[p + 1] - y_[p]) / h;
            out[i] = (j == p) ? df - (2.0 * m_[p] + m_[p + 1]) * h / 6.0
                              : df + (m_[p] + 2.0 * m_[p + 1]) * h / 6.0;
        }
        return out;
    }

  private:
    Grid1D grid_;
    std::vector<double> values_;
    Parity parity_ = Parity::none;
    std::vector<double> x_, y_, m_;  // extended nodes, values, second derivatives
    std::size_t offset_ = 0;         // index of grid node 0 within the extended arrays

    void build_reflected() {
        const std::size_t n = grid_.size();
        offset_ = n - 1;
        x_.resize(2 * n - 1);
        y_.resize(2 * n - 1);
        double sign = (parity_ == Parity::even) ? 1.0 : -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            x_[offset_ + i] = grid_.nodes[i];
            y_[offset_ + i] = values_[i];
            x_[offset_ - i] = -grid_.nodes[i];
            y_[offset_ - i] = sign * values_[i];
        }
        natural_second_derivatives();
    }

    void build_periodic() {
        // Close the period with the wrap-around node so pieces cover [0, period].
        const std::size_t n = grid_.size();
        offset_ = 0;
        x_ = grid_.nodes;
        x_.push_back(grid_.period);
        y_ = values_;
        y_.push_back(values_[0]);
        cyclic_second_derivatives();
    }

    void natural_second_derivatives() {
        const std::size_t n = x_.size();
        m_.assign(n, 0.0);
        if (n < 3) return;
        std::size_t k = n - 2;  // interior unknowns
        std::vector<double> lo(k), di(k), up(k), rhs(k);
        for (std::size_t i = 0; i < k; ++i) {
            double hl = x_[i + 1] - x_[i], hr = x_[i + 2] - x_[i + 1];
            lo[i] = hl / 6.0;
            di[i] = (hl + hr) / 3.0;
            up[i] = hr / 6.0;
            rhs[i] = (y_[i + 2] - y_[i + 1]) / hr - (y_[i + 1] - y_[i]) / hl;
        }
        auto sol = detail::solve_tridiagonal(lo, di, up, rhs);
        for (std::size_t i = 0; i < k; ++i) m_[i + 1] = sol[i];
    }

    void cyclic_second_derivatives() {
        // Periodic closure via the Sherman-Morrison correction of the
        // tridiagonal system for m_0 .. m_{n-1}, with m_n = m_0.
        const std::size_t n = x_.size() - 1;
        m_.assign(n + 1, 0.0);
        std::vector<double> h(n);
        for (std::size_t i = 0; i < n; ++i) h[i] = x_[i + 1] - x_[i];
        auto hm = [&](std::size_t i) { return h[(i + n - 1) % n]; };
        std::vector<double> lo(n), di(n), up(n), rhs(n);
        for (std::size_t i = 0; i < n; ++i) {
            lo[i] = hm(i) / 6.0;
            di[i] = (hm(i) + h[i]) / 3.0;
            up[i] = h[i] / 6.0;
            double yp = (i == 0) ? y_[n - 1] : y_[i - 1];
            rhs[i] = (y_[i + 1] - y_[i]) / h[i] - (y_[i] - yp) / hm(i);
        }
        // Corner entries lo[0] and up[n-1] couple first and last unknowns.
        double alpha = lo[0], beta = up[n - 1];
        double gamma = -di[0];
        std::vector<double> dmod = di;
        dmod[0] -= gamma;
        dmod[n - 1] -= alpha * beta / gamma;
        std::vector<double> u(n, 0.0);
        u[0] = gamma;
        u[n - 1] = beta;
        auto lo1 = lo, up1 = up;
        lo1[0] = 0.0;
        up1[n - 1] = 0.0;
        auto ysol = detail::solve_tridiagonal(lo1, dmod, up1, rhs);
        auto qsol = detail::solve_tridiagonal(lo1, dmod, up1, u);
        double fact = (ysol[0] + alpha * ysol[n - 1] / gamma) /
                      (1.0 + qsol[0] + alpha * qsol[n - 1] / gamma);
        for (std::size_t i = 0; i < n; ++i) m_[i] = ysol[i] - fact * qsol[i];
        m_[n] = m_[0];
    }

    double piece_eval(double x, int order) const {
        std::size_t hi = static_cast<std::size_t>(
            std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
        hi = std::clamp<std::size_t>(hi, 1, x_.size() - 1);
        std::size_t lo = hi - 1;
        double h = x_[hi] - x_[lo];
        double a = (x_[hi] - x) / h, b = (x - x_[lo]) / h;
        switch (order) {
            case 0:
                return a * y_[lo] + b * y_[hi] +
                       ((a * a * a - a) * m_[lo] + (b * b * b - b) * m_[hi]) * h * h / 6.0;
            case 1:
                return (y_[hi] - y_[lo]) / h +
                       ((3.0 * b * b - 1.0) * m_[hi] - (3.0 * a * a - 1.0) * m_[lo]) * h / 6.0;
            default:
                return a * m_[lo] + b * m_[hi];
        }
    }

    // Degree-6 parity-constrained least-squares fit on the 8 nodes nearest
    // the origin.  Even fields use powers {0,2,4,6}, odd fields {1,3,5};
    // the cubic spline cannot supply a 4th derivative (it vanishes piecewise),
    // so high-order origin data comes from this local fit.
    double origin_fit_derivative(int order) const {
        const std::size_t pts = std::min<std::size_t>(8, grid_.size());
        const bool even = parity_ == Parity::even;
        if (even && order == 3) return 0.0;
        if (!even && order == 4) return 0.0;
        const double scale = grid_.nodes[pts - 1];
        const int ncoef = even ? 4 : 3;
        Eigen::MatrixXd A(pts, ncoef);
        Eigen::VectorXd b(pts);
        for (std::size_t i = 0; i < pts; ++i) {
            double t = grid_.nodes[i] / scale;
            double t2 = t * t;
            if (even) {
                A(i, 0) = 1.0;
                A(i, 1) = t2;
                A(i, 2) = t2 * t2;
                A(i, 3) = t2 * t2 * t2;
            } else {
                A(i, 0) = t;
                A(i, 1) = t * t2;
                A(i, 2) = t * t2 * t2;
            }
            b(i) = values_[i];
        }
        Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
        if (even)  // p = c0 + c2 t^2 + c4 t^4 + c6 t^6, order-4 term 24 c4
            return 24.0 * coef(2) / (scale * scale * scale * scale);
        return 6.0 * coef(1) / (scale * scale * scale);  // odd, order-3 term
    }
};

inline SplineField build_spline(const Grid1D& grid, std::vector<double> values, Parity parity) {
    return SplineField(grid, std::move(values), parity);
}

inline double eval_derivative(const SplineField& f, double x, int order) {
    return f.eval(x, order);
}

}  // namespace blowup
