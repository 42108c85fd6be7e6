#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "blowup/quadform.hpp"

using namespace blowup;

TEST_CASE("order-2 truncation matches hand-computed entries") {
    auto F = quadform::build_F(2);
    // index order (a1, a2, c1, c2)
    CHECK(F.at(0, 0) == Rational(46, 25));   // 1.84
    CHECK(F.at(0, 1) == Rational(1, 4));
    CHECK(F.at(0, 2) == Rational(1, 2));
    CHECK(F.at(0, 3) == Rational(1, 6));
    CHECK(F.at(1, 1) == Rational(9, 100));   // 0.09
    CHECK(F.at(1, 2) == Rational(-1, 8));
    CHECK(F.at(1, 3) == Rational(1, 24));
    CHECK(F.at(2, 2) == Rational(67, 50));   // 1.34
    CHECK(F.at(2, 3) == Rational(0));
    CHECK(F.at(3, 3) == Rational(151, 150)); // 1.00667
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < i; ++j) CHECK(F.at(i, j) == F.at(j, i));

    Eigen::Matrix4d M;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) M(i, j) = static_cast<double>(F.at(i, j));
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(M);
    const double expected[4] = {0.0235939, 0.935480, 1.139631, 2.177962};
    for (int i = 0; i < 4; ++i)
        CHECK(es.eigenvalues()(i) == doctest::Approx(expected[i]).epsilon(1e-5));

    CHECK_THROWS_AS(quadform::build_F(1), CertError);
}

TEST_CASE("matrix and series evaluations agree") {
    const std::size_t N = 40;
    auto F = quadform::build_F(N);
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> val(-2.0, 2.0);
    std::uniform_int_distribution<std::size_t> idx(0, N - 1);
    for (int trial = 0; trial < 100; ++trial) {
        WeightedCoefficients x;
        x.a.assign(N, 0.0);
        x.c.assign(N, 0.0);
        for (int s = 0; s < 8; ++s) {
            x.a[idx(rng)] = val(rng);
            x.c[idx(rng)] = val(rng);
        }
        double m = quadform::eval_F_matrix(F, x);
        double d = quadform::eval_F_direct(x, N);
        CHECK(std::fabs(m - d) <= 1e-12 * (1.0 + std::fabs(d)));
    }
    WeightedCoefficients outside;
    outside.a.assign(N + 3, 0.0);
    outside.a.back() = 1.0;
    CHECK_THROWS_AS(quadform::eval_F_direct(outside, N), CertError);
}

TEST_CASE("velocity coefficients from vorticity coefficients") {
    auto b1 = quadform::b_from_c<double>({1.0});
    REQUIRE(b1.size() == 2);
    CHECK(b1[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(b1[1] == doctest::Approx(-0.5).epsilon(1e-15));
    auto b2 = quadform::b_from_c<double>({0.0, 1.0});
    REQUIRE(b2.size() == 3);
    CHECK(b2[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(b2[1] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(b2[2] == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
    // exact rational variant gives the same values
    auto br = quadform::b_from_c<Rational>({Rational(0), Rational(1)});
    CHECK(br[0] == Rational(1, 6));
    CHECK(br[1] == Rational(1, 6));
    CHECK(br[2] == Rational(-1, 3));
}

TEST_CASE("tail remainder bound on random finite sequences") {
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    std::uniform_int_distribution<std::size_t> idx(0, 79);
    const std::size_t N = 40;
    for (int trial = 0; trial < 200; ++trial) {
        WeightedCoefficients x;
        x.a.assign(80, 0.0);
        x.c.assign(80, 0.0);
        for (int s = 0; s < 10; ++s) {
            x.a[idx(rng)] = val(rng);
            x.c[idx(rng)] = val(rng);
        }
        auto t = quadform::tail_remainder_check(N, x);
        CHECK(t.holds);
    }
}

TEST_CASE("weighted bases are orthonormal") {
    for (int k = 1; k <= 12; ++k) {
        for (int j = 1; j <= 12; ++j) {
            double oo = quadform::weighted_inner(
                [&](double x) { return quadform::basis_o(k, x); },
                [&](double x) { return quadform::basis_o(j, x); });
            double ee = quadform::weighted_inner(
                [&](double x) { return quadform::basis_e(k, x); },
                [&](double x) { return quadform::basis_e(j, x); });
            double target = (k == j) ? 1.0 : 0.0;
            CHECK(std::fabs(oo - target) <= 1e-8);
            CHECK(std::fabs(ee - target) <= 1e-8);
        }
    }
}

TEST_CASE("weighted energy of node data") {
    const std::size_t n = 512;
    std::vector<double> u(n, 0.0), w(n);
    // w = sin x is the first odd basis element: (w, w rho) = 1, E = sqrt(1/2)
    for (std::size_t i = 0; i < n; ++i) w[i] = std::sin(2.0 * M_PI * i / n);
    CHECK(quadform::weighted_energy(u, w) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-10));

    // u with u_x(0) = 0: E^2 = (u_x, u_x rho)/2 computed independently
    std::vector<double> u2(n), w0(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double x = 2.0 * M_PI * i / n;
        u2[i] = std::sin(2.0 * x) - 2.0 * std::sin(x);
    }
    double ref = quadform::weighted_inner(
        [](double x) { return 2.0 * std::cos(2.0 * x) - 2.0 * std::cos(x); },
        [](double x) { return 2.0 * std::cos(2.0 * x) - 2.0 * std::cos(x); });
    CHECK(quadform::weighted_energy(u2, w0) ==
          doctest::Approx(std::sqrt(0.5 * ref)).epsilon(1e-7));

    // violating the u_x(0) anchor makes the integrand singular
    std::vector<double> bad(n);
    for (std::size_t i = 0; i < n; ++i) bad[i] = std::sin(2.0 * M_PI * i / n);
    CHECK_THROWS_AS(quadform::weighted_energy(bad, w0), CertError);
}
