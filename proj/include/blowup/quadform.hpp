#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "blowup/models.hpp"

namespace blowup {

using Rational = boost::multiprecision::cpp_rational;

struct CertError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Finitely supported coefficient sequences (a_k, c_k), k >= 1.  Index 0 of the
// storage corresponds to k = 1.
struct WeightedCoefficients {
    std::vector<double> a, c;

    std::size_t max_support() const { return std::max(a.size(), c.size()); }
    double ak(std::size_t k) const { return (k >= 1 && k <= a.size()) ? a[k - 1] : 0.0; }
    double ck(std::size_t k) const { return (k >= 1 && k <= c.size()) ? c[k - 1] : 0.0; }
};

// Symmetric 2N x 2N matrix of the linear-damping quadratic form, stored as
// exact rationals with index order (a_1..a_N, c_1..c_N).
struct TruncatedQuadraticForm {
    std::size_t N = 0;
    std::vector<Rational> M;  // row-major, dimension 2N

    const Rational& at(std::size_t i, std::size_t j) const { return M[i * 2 * N + j]; }
    Rational& at(std::size_t i, std::size_t j) { return M[i * 2 * N + j]; }
};

namespace quadform {

// Assembles the truncated matrix.  The margin constant 0.84 enters exactly as
// 21/25.  Coefficient families (k >= 1, indices kept while <= N):
//   diag a_k:          21/25 + 1/k^2 - 1/(k-1)^2   (last term 0 at k = 1)
//   diag c_k:          21/25 + 1/(k(k+1))
//   (a_k, a_{k+1}):    1/(k+1)^2
//   (a_k, a_j), j>k+1: 1/j^2 - 1/(j-1)^2
//   (a_k, c_k):        (1+2k-k^2) / (2k^2(k+1))
//   (a_{k+1}, c_k):    (k^2-k-1) / (2k^2(k+1)^2)
//   (a_{k+2}, c_k):    -(k+2) / (2(k+1)^2)
//   (a_k, c_j), j>k:   1/(j(j+1))
inline TruncatedQuadraticForm build_F(std::size_t N) {
    if (N < 2) throw CertError("build_F: truncation order must be at least 2");
    TruncatedQuadraticForm f;
    f.N = N;
    f.M.assign(4 * N * N, Rational(0));
    const Rational margin(21, 25);
    using boost::multiprecision::cpp_int;
    auto ai = [&](std::size_t k) { return k - 1; };      // matrix index of a_k
    auto ci = [&](std::size_t k) { return N + k - 1; };  // matrix index of c_k
    for (std::size_t k = 1; k <= N; ++k) {
        cpp_int kk = k;
        Rational da = margin + Rational(1, kk * kk);
        if (k > 1) da -= Rational(1, (kk - 1) * (kk - 1));
        f.at(ai(k), ai(k)) = da;
        f.at(ci(k), ci(k)) = margin + Rational(1, kk * (kk + 1));
        if (k + 1 <= N) {
            Rational v(1, (kk + 1) * (kk + 1));
            f.at(ai(k), ai(k + 1)) = v;
            f.at(ai(k + 1), ai(k)) = v;
        }
        for (std::size_t j = k + 2; j <= N; ++j) {
            cpp_int jj = j;
            Rational v = Rational(1, jj * jj) - Rational(1, (jj - 1) * (jj - 1));
            f.at(ai(k), ai(j)) = v;
            f.at(ai(j), ai(k)) = v;
        }
        {
            cpp_int num = 1 + 2 * kk - kk * kk;
            Rational v(num, 2 * kk * kk * (kk + 1));
            f.at(ai(k), ci(k)) = v;
            f.at(ci(k), ai(k)) = v;
        }
        if (k + 1 <= N) {
            cpp_int num = kk * kk - kk - 1;
            Rational v(num, 2 * kk * kk * (kk + 1) * (kk + 1));
            f.at(ai(k + 1), ci(k)) = v;
            f.at(ci(k), ai(k + 1)) = v;
        }
        if (k + 2 <= N) {
            Rational v = -Rational(kk + 2, 2 * (kk + 1) * (kk + 1));
            f.at(ai(k + 2), ci(k)) = v;
            f.at(ci(k), ai(k + 2)) = v;
        }
        for (std::size_t j = k + 1; j <= N; ++j) {
            cpp_int jj = j;
            Rational v(1, jj * (jj + 1));
            f.at(ai(k), ci(j)) = v;
            f.at(ci(j), ai(k)) = v;
        }
    }
    return f;
}

// x^T M x in double arithmetic for a coefficient vector restricted to [1, N].
inline double eval_F_matrix(const TruncatedQuadraticForm& f,
                            const WeightedCoefficients& x) {
    const std::size_t N = f.N;
    std::vector<double> v(2 * N, 0.0);
    for (std::size_t k = 1; k <= N; ++k) {
        v[k - 1] = x.ak(k);
        v[N + k - 1] = x.ck(k);
    }
    double s = 0.0;
    for (std::size_t i = 0; i < 2 * N; ++i) {
        if (v[i] == 0.0) continue;
        for (std::size_t j = 0; j < 2 * N; ++j) {
            if (v[j] == 0.0) continue;
            s += static_cast<double>(f.at(i, j)) * v[i] * v[j];
        }
    }
    return s;
}

// Term-by-term evaluation of the quadratic form from the coefficient
// formulas, without assembling any matrix.  Support may exceed N; terms with
// any index beyond `cutoff` are dropped (pass the full support to evaluate
// the untruncated form on finitely supported data).
inline double eval_F_series(const WeightedCoefficients& x, std::size_t cutoff) {
    double s = 0.0;
    for (std::size_t k = 1; k <= cutoff; ++k) {
        double kd = static_cast<double>(k);
        double akv = x.ak(k), ckv = x.ck(k);
        double da = 21.0 / 25.0 + 1.0 / (kd * kd);
        if (k > 1) da -= 1.0 / ((kd - 1.0) * (kd - 1.0));
        s += da * akv * akv;
        s += (21.0 / 25.0 + 1.0 / (kd * (kd + 1.0))) * ckv * ckv;
        if (k + 1 <= cutoff)
            s += 2.0 / ((kd + 1.0) * (kd + 1.0)) * akv * x.ak(k + 1);
        for (std::size_t j = k + 2; j <= cutoff; ++j) {
            double jd = static_cast<double>(j);
            if (x.ak(j) == 0.0) continue;
            s += 2.0 * (1.0 / (jd * jd) - 1.0 / ((jd - 1.0) * (jd - 1.0))) * akv * x.ak(j);
        }
        s += (1.0 + 2.0 * kd - kd * kd) / (kd * kd * (kd + 1.0)) * akv * ckv;
        if (k + 1 <= cutoff)
            s += (kd * kd - kd - 1.0) / (kd * kd * (kd + 1.0) * (kd + 1.0)) * x.ak(k + 1) * ckv;
        if (k + 2 <= cutoff)
            s -= (kd + 2.0) / ((kd + 1.0) * (kd + 1.0)) * x.ak(k + 2) * ckv;
        for (std::size_t j = k + 1; j <= cutoff; ++j) {
            double jd = static_cast<double>(j);
            if (x.ck(j) == 0.0) continue;
            s += 2.0 / (jd * (jd + 1.0)) * akv * x.ck(j);
        }
    }
    return s;
}

// Evaluates the series on support limited to [1, N] (throws otherwise).
inline double eval_F_direct(const WeightedCoefficients& x, std::size_t N) {
    for (std::size_t k = N + 1; k <= x.max_support(); ++k)
        if (x.ak(k) != 0.0 || x.ck(k) != 0.0)
            throw CertError("eval_F_direct: support outside truncation");
    return eval_F_series(x, N);
}

// b_i = sum_{k >= i} c_k / (k(k+1)) - c_{i-1} / i, with c_0 = 0.  The result
// has one more potentially nonzero index than c.
template <class Scalar>
inline std::vector<Scalar> b_from_c(const std::vector<Scalar>& c) {
    const std::size_t K = c.size();
    std::vector<Scalar> b(K + 1, Scalar(0));
    Scalar tail(0);
    for (std::size_t i = K + 1; i >= 1; --i) {
        if (i <= K) tail += c[i - 1] / Scalar(static_cast<long>(i) * (static_cast<long>(i) + 1));
        Scalar prev = (i >= 2 && i - 1 <= K) ? c[i - 2] / Scalar(static_cast<long>(i)) : Scalar(0);
        b[i - 1] = tail - prev;
        if (i == 1) break;
    }
    return b;
}

struct TailCheck {
    double lhs, rhs;
    bool holds;
};

// F(a,c) - F_N(a,c) >= -(2/N) sum_{k<=N}(a^2+c^2) + (21/25 - 3/N) sum_{k>N}(a^2+c^2).
inline TailCheck tail_remainder_check(std::size_t N, const WeightedCoefficients& x) {
    std::size_t full = std::max(x.max_support(), N);
    double F_full = eval_F_series(x, full);
    double F_trunc = eval_F_series(x, N);
    double head = 0.0, tail = 0.0;
    for (std::size_t k = 1; k <= x.max_support(); ++k) {
        double t = x.ak(k) * x.ak(k) + x.ck(k) * x.ck(k);
        (k <= N ? head : tail) += t;
    }
    TailCheck r;
    r.lhs = F_full - F_trunc;
    r.rhs = -(2.0 / N) * head + (21.0 / 25.0 - 3.0 / N) * tail;
    double scale = 1.0 + head + tail;
    r.holds = r.lhs >= r.rhs - 1e-12 * scale;
    return r;
}

// ---- singular weight, orthonormal bases, weighted energy -----------------

// rho = 1 / (2 pi (1 - cos x)).
inline double rho(double x) { return 1.0 / (2.0 * M_PI * (1.0 - std::cos(x))); }

// Orthonormal bases of the odd/even sectors of L^2(rho):
//   o^k = sin kx - sin (k-1)x,   e^k = cos kx - cos (k+1)x.
inline double basis_o(int k, double x) { return std::sin(k * x) - std::sin((k - 1) * x); }
inline double basis_e(int k, double x) { return std::cos(k * x) - std::cos((k + 1) * x); }

// (f, g rho) over the period by the rectangle rule on n uniform nodes; the
// node at x = 0 uses the analytic limit f'(0) g'(0) / pi of the integrand.
// Requires f(0) = g(0) = 0 so the integrand is bounded.
template <class F, class G>
inline double weighted_inner(F&& ff, G&& gg, std::size_t n = 4096) {
    double h = 2.0 * M_PI / n;
    double eps = 1e-6;
    double fp = (ff(eps) - ff(-eps)) / (2.0 * eps);
    double gp = (gg(eps) - gg(-eps)) / (2.0 * eps);
    double s = fp * gp / M_PI;
    for (std::size_t j = 1; j < n; ++j) {
        double x = h * j;
        s += ff(x) * gg(x) * rho(x);
    }
    return s * h;
}

// E^2 = ((u_x^2, rho) + (w^2, rho)) / 2 for odd periodic node data on the
// uniform grid.  u_x comes from the sine series; the origin node contributes
// w_x(0)^2 / pi (the u_x part vanishes there because u_x(0) = 0 is enforced).
inline double weighted_energy(const std::vector<double>& u, const std::vector<double>& w,
                              double ux0_tol = 1e-8) {
    const std::size_t n = u.size();
    if (w.size() != n) throw CertError("weighted_energy: field size mismatch");
    auto bu = models::sine_coefficients(u);
    auto bw = models::sine_coefficients(w);
    double ux0 = 0.0, wx0 = 0.0;
    for (std::size_t k = 1; k < bu.size(); ++k) {
        ux0 += bu[k] * k;
        wx0 += bw[k] * k;
    }
    if (std::fabs(ux0) > ux0_tol)
        throw CertError("weighted_energy: u_x(0) anchor violated, integrand singular");
    // u_x at nodes from the cosine series sum k b_k cos kx.
    std::vector<double> ux(n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        double x = 2.0 * M_PI * j / n, s = 0.0;
        for (std::size_t k = 1; k < bu.size(); ++k) s += bu[k] * k * std::cos(k * x);
        ux[j] = s;
    }
    double h = 2.0 * M_PI / n;
    double acc = wx0 * wx0 / M_PI;  // origin limit; u_x part is O(x^2) there
    for (std::size_t j = 1; j < n; ++j) {
        double x = h * j;
        acc += (ux[j] * ux[j] + w[j] * w[j]) * rho(x);
    }
    return std::sqrt(0.5 * acc * h);
}

}  // namespace quadform
}  // namespace blowup
