#pragma once

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "blowup/quadform.hpp"

namespace blowup {
namespace certify {

using boost::multiprecision::cpp_int;

// Exact dyadic number m * 2^e.  Every double converts losslessly, and sums
// and products of dyadics stay dyadic, so the eigendecomposition residual
// below carries no rounding error at all.
struct Dyadic {
    cpp_int m{0};
    long e = 0;

    Dyadic() = default;
    explicit Dyadic(double d) {
        if (d == 0.0) return;
        if (!std::isfinite(d)) throw CertError("dyadic: non-finite input");
        int ex = 0;
        double fr = std::frexp(d, &ex);          // fr in [0.5, 1), exact
        double scaled = std::ldexp(fr, 53);      // integer-valued, exact
        m = cpp_int(static_cast<long long>(scaled));
        e = ex - 53;
    }

    Dyadic operator*(const Dyadic& o) const {
        Dyadic r;
        r.m = m * o.m;
        r.e = e + o.e;
        return r;
    }
    Dyadic operator+(const Dyadic& o) const {
        if (m == 0) return o;
        if (o.m == 0) return *this;
        Dyadic r;
        if (e >= o.e) {
            r.m = (m << static_cast<unsigned>(e - o.e)) + o.m;
            r.e = o.e;
        } else {
            r.m = m + (o.m << static_cast<unsigned>(o.e - e));
            r.e = e;
        }
        return r;
    }
    Rational to_rational() const {
        if (e >= 0) return Rational(m << static_cast<unsigned>(e));
        return Rational(m, cpp_int(1) << static_cast<unsigned>(-e));
    }
};

struct Certificate {
    std::size_t n = 0;          // truncation order (matrix dimension is 2n)
    double threshold = 0.0;     // lower bound being certified
    double shift = 0.0;         // spectral shift, must exceed threshold
    double diag_min = 0.0;      // smallest entry of the factored diagonal
    double residual_entry_max = 0.0;
    double residual_norm_bound = 0.0;  // 2n * residual_entry_max
    double margin = 0.0;               // (shift - threshold) - norm bound
    bool verified = false;
    std::string verdict() const { return verified ? "VERIFIED" : "FAILED"; }

    nlohmann::json to_json() const {
        return {{"n", n},
                {"threshold", threshold},
                {"shift", shift},
                {"diag_min", diag_min},
                {"residual_entry_max", residual_entry_max},
                {"residual_norm_bound", residual_norm_bound},
                {"margin", margin},
                {"verdict", verdict()}};
    }
};

// Certifies x^T M x >= threshold |x|^2 for the truncated matrix:
//   1. diagonalize M - shift*I in floating point: V D V^T;
//   2. form the residual R = (M - shift*I) - V D V^T in exact arithmetic
//      (matrix entries are rationals, V and D entries exact dyadics);
//   3. accept iff every D_ii > 0 and 2n * max|R_ij| < shift - threshold,
//      which pins the spectrum of M above threshold.
// Step 2 never rounds, so a VERIFIED verdict is sound regardless of how
// accurate the floating-point eigensolve was; inaccuracy only loses margin.
inline Certificate certify_positive(const TruncatedQuadraticForm& f, double threshold,
                                    double shift) {
    if (!(shift > threshold))
        throw CertError("certify: shift must exceed the threshold");
    const std::size_t dim = 2 * f.N;
    Certificate cert;
    cert.n = f.N;
    cert.threshold = threshold;
    cert.shift = shift;

    Eigen::MatrixXd A(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            A(i, j) = static_cast<double>(f.at(i, j)) - (i == j ? shift : 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    if (es.info() != Eigen::Success) throw CertError("certify: eigensolver failed");
    const Eigen::MatrixXd& V = es.eigenvectors();
    const Eigen::VectorXd& D = es.eigenvalues();

    cert.diag_min = D.minCoeff();
    bool diag_positive = cert.diag_min > 0.0;

    // P = V * diag(D) exactly, then R' = P V^T row by row.
    std::vector<Dyadic> Vd(dim * dim), Pd(dim * dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) {
            Vd[i * dim + j] = Dyadic(V(i, j));
            Pd[i * dim + j] = Dyadic(V(i, j)) * Dyadic(D(j));
        }
    const Rational shift_r(shift);
    Rational max_abs(0);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = i; j < dim; ++j) {  // residual is symmetric
            Dyadic acc;
            for (std::size_t k = 0; k < dim; ++k)
                acc = acc + Pd[i * dim + k] * Vd[j * dim + k];
            Rational r = f.at(i, j) - (i == j ? shift_r : Rational(0)) - acc.to_rational();
            if (r < 0) r = -r;
            if (r > max_abs) max_abs = r;
        }
    }
    cert.residual_entry_max = static_cast<double>(max_abs);
    cert.residual_norm_bound = static_cast<double>(Rational(dim) * max_abs);
    cert.margin = shift - threshold - cert.residual_norm_bound;
    bool residual_small = Rational(dim) * max_abs < Rational(shift) - Rational(threshold);
    cert.verified = diag_positive && residual_small;
    return cert;
}

}  // namespace certify
}  // namespace blowup
