#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "blowup/grid.hpp"
#include "blowup/models.hpp"
#include "blowup/profiles.hpp"

using namespace blowup;

namespace {

std::vector<double> sample_periodic(std::size_t n, double (*f)(double)) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = f(2.0 * M_PI * i / n);
    return v;
}

}  // namespace

TEST_CASE("steady-state RHS vanishes on analytic derivatives") {
    auto g = build_grid(GridKind::half_line_even, 512, 40.0, 3.0);
    std::vector<double> u(g.size()), uz(g.size()), uzz(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        double z = g.nodes[i];
        double U = profiles::heat(z);
        u[i] = U;
        uz[i] = -2.0 * 0.125 * z * U * U;
        uzz[i] = -0.25 * U * U + 2.0 * 0.25 * 0.125 * z * z * U * U * U;
    }
    auto r = models::riccati_rhs(g.nodes, u, uz);
    for (double v : r) CHECK(std::fabs(v) <= 1e-12);
    // inviscid heat RHS with the profile rates coincides with the riccati one
    auto rh = models::heat_rhs(g.nodes, u, uz, uzz, -1.0, 0.5, 0.0);
    for (double v : rh) CHECK(std::fabs(v) <= 1e-12);
}

TEST_CASE("heat normalization formulas") {
    auto [cu, cl] = models::heat_normalization(1.0, -0.25, 0.375, 0.2);
    CHECK(cu == doctest::Approx(-0.95).epsilon(1e-14));
    CHECK(cl == doctest::Approx(0.375).epsilon(1e-14));
    // at the profile with lambda = 0 the rates reduce to (-1, 1/2)
    auto [cu0, cl0] = models::heat_normalization(1.0, -0.25, 0.375, 0.0);
    CHECK(cu0 == doctest::Approx(-1.0));
    CHECK(cl0 == doctest::Approx(0.5));
    CHECK_THROWS_AS(models::heat_normalization(1e-14, -0.25, 0.0, 0.1), DegenerateAnchor);
    CHECK_THROWS_AS(models::heat_normalization(1.0, 1e-14, 0.0, 0.1), DegenerateAnchor);

    // radially symmetric 2D data: c_u = -1 - 0.2(-0.25-0.25) = -0.9 and
    // c_l = -0.45 + 1 + 0.2(0.375+0.125)/(2(-0.25)) = 0.35 on both axes
    auto r2 = models::heat_normalization_2d(1.0, -0.25, -0.25, 0.375, 0.125, 0.375, 0.2, 0.2);
    CHECK(r2.c_u == doctest::Approx(-0.9).epsilon(1e-14));
    CHECK(r2.c_l1 == doctest::Approx(0.35).epsilon(1e-14));
    CHECK(r2.c_l1 == doctest::Approx(r2.c_l2).epsilon(1e-14));
}

TEST_CASE("sine transform round trip and parity guard") {
    const std::size_t n = 128;
    std::vector<double> b(n / 2, 0.0);
    b[1] = 0.7;
    b[5] = -0.2;
    b[40] = 0.05;
    auto f = models::from_sine_coefficients(b, n);
    auto b2 = models::sine_coefficients(f);
    REQUIRE(b2.size() == b.size());
    for (std::size_t k = 1; k < b.size(); ++k)
        CHECK(b2[k] == doctest::Approx(b[k]).epsilon(1e-12));
    auto even = sample_periodic(n, +[](double x) { return std::cos(x); });
    CHECK_THROWS_AS(models::sine_coefficients(even), ParityViolation);
}

TEST_CASE("biot-savart eigenfunctions and slope consistency") {
    const std::size_t n = 256;
    for (int k : {1, 2, 7}) {
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) w[i] = std::sin(k * 2.0 * M_PI * i / n);
        auto r = models::biot_savart(w);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(r.psi[i] ==
                  doctest::Approx(std::sin(k * 2.0 * M_PI * i / n) / (k * k)).epsilon(1e-12));
        CHECK(r.psi_x0_series == doctest::Approx(1.0 / k).epsilon(1e-12));
        CHECK(r.psi_x0_quadrature == doctest::Approx(1.0 / k).epsilon(1e-8));
    }
    // mixed smooth field: the two psi_x(0) routes agree
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = 2.0 * M_PI * i / n;
        w[i] = std::sin(x) - 0.3 * std::sin(2.0 * x) + 0.05 * std::sin(5.0 * x);
    }
    auto r = models::biot_savart(w);
    CHECK(std::fabs(r.psi_x0_series - r.psi_x0_quadrature) <= 1e-8);
}

TEST_CASE("weak-advection RHS vanishes at the steady state and preserves parity") {
    const std::size_t n = 256;
    std::vector<double> u(n), ux(n), psix(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = 2.0 * M_PI * i / n;
        u[i] = std::sin(x);
        ux[i] = std::cos(x);
        psix[i] = std::cos(x);
    }
    auto [ru, rw] = models::houli_rhs(u, u, u, ux, ux, psix, 1.0, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(std::fabs(ru[i]) <= 1e-12);
        CHECK(std::fabs(rw[i]) <= 1e-12);
    }
    // odd data -> odd RHS (sampled at +-x pairs), generic a and c_u
    std::vector<double> u2(n), w2(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = 2.0 * M_PI * i / n;
        u2[i] = std::sin(x) + 0.2 * std::sin(3.0 * x);
        w2[i] = std::sin(2.0 * x) - 0.1 * std::sin(x);
    }
    auto bs = models::biot_savart(w2);
    std::vector<double> u2x(n), w2x(n), px(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = 2.0 * M_PI * i / n;
        u2x[i] = std::cos(x) + 0.6 * std::cos(3.0 * x);
        w2x[i] = 2.0 * std::cos(2.0 * x) - 0.1 * std::cos(x);
        px[i] = 0.5 * std::cos(2.0 * x) - 0.1 * std::cos(x);
    }
    auto [pu, pw] = models::houli_rhs(u2, w2, bs.psi, u2x, w2x, px, 0.95, -0.07);
    for (std::size_t i = 1; i < n - i; ++i) {
        CHECK(pu[n - i] == doctest::Approx(-pu[i]).epsilon(1e-12));
        CHECK(pw[n - i] == doctest::Approx(-pw[i]).epsilon(1e-12));
    }
}

TEST_CASE("weak-advection normalization reductions") {
    // at the profile psi_x(0) = 1
    CHECK(models::houli_normalization(1.0, 1.0, 0.0, 1.0) == doctest::Approx(0.0));
    CHECK(models::houli_normalization(1.0, 0.95, 0.0, 1.0) ==
          doctest::Approx(2.0 * (0.95 - 1.0)).epsilon(1e-14));
    // viscous correction at u = sin: u_x(0) = 1, u_xxx(0) = -1
    double nu = 0.01, Cu = 2.0;
    CHECK(models::houli_normalization(1.0, 1.0, nu, Cu, 1.0, -1.0) ==
          doctest::Approx(nu * Cu).epsilon(1e-14));
    // Hoelder variant only anchors the stream-function slope
    CHECK(models::houli_normalization(0.8, 1.0, 0.0, 1.0, 1.0, 0.0, 0.95) ==
          doctest::Approx((0.95 - 1.0) * 0.8).epsilon(1e-14));
    CHECK_THROWS_AS(models::houli_normalization(1.0, 1.0, 0.01, 1.0, 0.0, 1.0),
                    DegenerateAnchor);
}

TEST_CASE("Hoelder approximate steady state") {
    auto g = build_grid(GridKind::periodic, 512, 2.0 * M_PI);
    auto s = models::alpha_steady_state(0.95, g);
    CHECK(s.omega[128] == doctest::Approx(1.0).epsilon(1e-12));  // x = pi/2
    CHECK(s.u[0] == 0.0);
    // -psi_xx = omega away from the kinks, by second differences
    double h = 2.0 * M_PI / 512;
    for (std::size_t i = 40; i < 200; i += 13) {
        double d2 = (s.psi[i + 1] - 2.0 * s.psi[i] + s.psi[i - 1]) / (h * h);
        CHECK(-d2 == doctest::Approx(s.omega[i]).epsilon(2e-3));
    }
    CHECK_THROWS_AS(models::alpha_steady_state(0.5, g), ModelError);
}
