#include <cmath>
#include <random>

#include "doctest.h"
#include "drawdown/closed_form.hpp"
#include "drawdown/controller_stopper.hpp"
#include "test_common.hpp"

using namespace drawdown;
using testutil::Frozen;

TEST_SUITE_BEGIN("controller_stopper");

namespace {
const MarketParams p1 = testutil::set1();
const DerivedConstants k1 = derive_constants(p1);
const MarketParams p2 = testutil::set2();
const DerivedConstants k2 = derive_constants(p2);

// Residual of the defining equation of x(m); an independent oracle for the
// solver output.
double x_residual(double x, double m, const DerivedConstants& k, const MarketParams& p) {
    const double cr = k.safe_level, bd = k.b1 - k.b2;
    return (cr - m) * ((1.0 - k.b2) / bd * std::pow(x, k.b1 - 1.0) +
                       (k.b1 - 1.0) / bd * std::pow(x, k.b2 - 1.0)) - (cr - p.alpha * m);
}
}  // namespace

TEST_CASE("x(m): endpoint, reference value, monotonicity and divergence") {
    CHECK(solve_x(0.0, k1, p1) == 1.0);
    const double x = solve_x(12.5, k1, p1);
    CHECK(x == doctest::Approx(Frozen::set1_x_12_5).epsilon(1e-10));
    CHECK(std::fabs(x_residual(x, 12.5, k1, p1)) <= 1e-12 * (25.0 - 0.5 * 12.5));
    double prev = 1.0;
    for (int i = 1; i <= 200; ++i) {
        const double m = 25.0 * i / 201.0;
        const double xi_ = solve_x(m, k1, p1);
        CHECK(xi_ > prev);
        prev = xi_;
    }
    // x(m) exceeds any bound once m is close enough to c/r
    CHECK(solve_x(25.0 * (1.0 - 1e-9), k1, p1) > 1e3);
}

TEST_CASE("m_hat: reference values and its two characterizations") {
    const double mh1 = m_hat(k1, p1);
    const double mh2 = m_hat(k2, p2);
    CHECK(mh1 == doctest::Approx(Frozen::set1_m_hat).epsilon(1e-10));
    CHECK(mh2 == doctest::Approx(Frozen::set2_m_hat).epsilon(1e-10));

    for (auto [k, p, mh] : {std::tuple{k1, p1, mh1}, std::tuple{k2, p2, mh2}}) {
        // the upper dual boundary crosses lam/(c(1-alpha)) exactly at m_hat
        const double target = p.lam / (p.c * (1.0 - p.alpha));
        CHECK(y_boundaries(mh, k, p).y_alpha_m == doctest::Approx(target).epsilon(1e-9));
        // and x(m_hat)^(B1-1) = alpha B1 + (c/r)(1-alpha)/(c/r - m_hat)
        const double x = solve_x(mh, k, p);
        const double rhs = p.alpha * k.b1 + k.safe_level * (1.0 - p.alpha) / (k.safe_level - mh);
        CHECK(std::pow(x, k.b1 - 1.0) == doctest::Approx(rhs).epsilon(1e-9));
    }
    CHECK(p1.lam / (p1.c * (1.0 - p1.alpha)) == doctest::Approx(0.08).epsilon(1e-15));
}

TEST_CASE("dual boundaries: invariants, limits, monotonicity") {
    for (double m : {0.5, 5.0, 12.5, 20.0, 24.0}) {
        const auto b = y_boundaries(m, k1, p1);
        CHECK(b.y_m > 0.0);
        CHECK(b.y_alpha_m > b.y_m);
        CHECK(b.x > 1.0);
        CHECK(b.y_alpha_m == doctest::Approx(b.x * b.y_m).epsilon(1e-12));
    }
    // limits of the upper boundary: lam/c at 0+, and the explicit value at (c/r)-
    CHECK(y_boundaries(1e-8, k1, p1).y_alpha_m == doctest::Approx(0.04).epsilon(1e-4));
    CHECK(y_boundaries(25.0 * (1.0 - 1e-9), k1, p1).y_alpha_m ==
          doctest::Approx(Frozen::set1_y_alm_limit).epsilon(1e-6));
    double prev = 0.0;
    for (int i = 1; i <= 1000; ++i) {
        const double m = 25.0 * i / 1001.0;
        const double y = y_boundaries(m, k1, p1).y_alpha_m;
        CHECK(y > prev);
        prev = y;
    }
}

TEST_CASE("phi_hat satisfies its free-boundary conditions and the dual ODE") {
    for (double m : {3.0, 8.0, 14.0}) {
        const auto b = y_boundaries(m, k1, p1);
        CHECK(phi_hat(b.y_alpha_m, m, k1, p1) ==
              doctest::Approx(1.0 + p1.alpha * m * b.y_alpha_m).epsilon(1e-12));
        CHECK(phi_hat_y(b.y_alpha_m, m, k1, p1) == doctest::Approx(p1.alpha * m).epsilon(1e-12));
        CHECK(phi_hat_y(b.y_m, m, k1, p1) == doctest::Approx(m).epsilon(1e-12));
        CHECK(std::fabs(phi_hat_yy(b.y_m, m, k1, p1)) <= 1e-12);
        // dual ODE: delta y^2 f_yy - (r - lam) y f_y - lam f + c y = 0
        for (int i = 1; i < 100; ++i) {
            const double y = b.y_m + (b.y_alpha_m - b.y_m) * i / 100.0;
            const double f = phi_hat(y, m, k1, p1);
            const double fy = phi_hat_y(y, m, k1, p1);
            const double fyy = phi_hat_yy(y, m, k1, p1);
            const double resid = k1.delta * y * y * fyy - (p1.r - p1.lam) * y * fy - p1.lam * f + p1.c * y;
            const double scale = std::fabs(p1.lam * f) + std::fabs(p1.c * y) + 1e-30;
            CHECK(std::fabs(resid) <= 1e-8 * scale);
        }
        // increasing and strictly concave inside the band
        double prev_f = phi_hat(b.y_m, m, k1, p1), prev_fy = phi_hat_y(b.y_m, m, k1, p1);
        for (int i = 1; i <= 60; ++i) {
            const double y = b.y_m + (b.y_alpha_m - b.y_m) * i / 60.0;
            CHECK(phi_hat(y, m, k1, p1) > prev_f);
            CHECK(phi_hat_y(y, m, k1, p1) < prev_fy);
            prev_f = phi_hat(y, m, k1, p1);
            prev_fy = phi_hat_y(y, m, k1, p1);
        }
    }
    CHECK_THROWS_AS(phi_hat(1e-6, 5.0, k1, p1), std::domain_error);
    // linear continuation above the stopping boundary
    const auto b5 = y_boundaries(5.0, k1, p1);
    CHECK(phi_hat_extended(2.0 * b5.y_alpha_m, 5.0, k1, p1) ==
          doctest::Approx(1.0 + p1.alpha * 5.0 * 2.0 * b5.y_alpha_m).epsilon(1e-12));
}

TEST_CASE("Legendre transform: boundary values and the reference point") {
    CHECK(legendre_phi(2.5, 5.0, k1, p1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(legendre_phi(3.0, 5.0, k1, p1) == doctest::Approx(Frozen::set1_phi_3_5).epsilon(1e-10));
    // at w = m the maximizer sits at the lower dual boundary; no investment
    const auto b = y_boundaries(5.0, k1, p1);
    CHECK(dual_variable_restricted(5.0, 5.0, k1, p1) == doctest::Approx(b.y_m).epsilon(1e-12));
    CHECK(std::fabs(pi_star_restricted(5.0, 5.0, k1, p1)) <= 1e-10);
    // convex and non-increasing in w
    double prev = 2.0;
    for (int i = 0; i <= 50; ++i) {
        const double w = 2.5 + 2.5 * i / 50.0;
        const double v = legendre_phi(w, 5.0, k1, p1);
        CHECK(v <= prev + 1e-14);
        prev = v;
    }
}

TEST_CASE("Legendre consistency: Phi_w = -y* against central differences") {
    for (double m : {4.0, 9.0, 14.5}) {
        for (int i = 1; i < 20; ++i) {
            const double w = p1.alpha * m + (m - p1.alpha * m) * i / 20.0;
            const double y = dual_variable_restricted(w, m, k1, p1);
            const double dw = 1e-5 * 25.0;
            if (w - dw <= p1.alpha * m || w + dw >= m) continue;
            const double fd = (legendre_phi(w + dw, m, k1, p1) - legendre_phi(w - dw, m, k1, p1)) / (2 * dw);
            CHECK(std::fabs(fd + y) <= 1e-6);
        }
    }
}

TEST_CASE("restricted strategy matches the finite-difference identity") {
    const double w = 2.6, m = 5.0;
    const double dw = 1e-5 * 25.0;  // balances truncation against roundoff in the second difference
    const double pw = (legendre_phi(w + dw, m, k1, p1) - legendre_phi(w - dw, m, k1, p1)) / (2 * dw);
    const double pww = (legendre_phi(w + dw, m, k1, p1) - 2 * legendre_phi(w, m, k1, p1) +
                        legendre_phi(w - dw, m, k1, p1)) / (dw * dw);
    const double fd_pi = -p1.merton_ratio() * pw / pww;
    const double pi = pi_star_restricted(w, m, k1, p1);
    CHECK(pi == doctest::Approx(fd_pi).epsilon(1e-5));
    CHECK(pi > 0.0);
    CHECK(pi < pi_ruin(w, k1, p1));
}

TEST_CASE("diagonal m-derivative changes sign exactly at m_hat") {
    const double mh = m_hat(k1, p1);
    auto diag_deriv = [&](double m) {
        const double s = 1e-6 * 25.0;
        return (legendre_phi(m, m + s, k1, p1) - legendre_phi(m, m, k1, p1)) / s;
    };
    for (double m : {5.0, 12.0, mh * 0.99}) CHECK(diag_deriv(m) > 0.0);
    for (double m : {mh * 1.01, 20.0, 24.0}) CHECK(diag_deriv(m) < 0.0);
}

TEST_CASE("strategy propositions on the restricted band") {
    for (double m : {2.0, 7.0, 12.0}) {
        double prev_pi = 1e300, prev_gap = -1e300;
        for (int i = 1; i <= 200; ++i) {
            const double w = p1.alpha * m + (m - p1.alpha * m) * i / 201.0;
            const double pi = pi_star_restricted(w, m, k1, p1);
            const double gap = pi_ruin(w, k1, p1) - pi;
            CHECK(pi >= 0.0);
            CHECK(gap > 0.0);
            CHECK(pi < prev_pi);
            CHECK(gap > prev_gap);
            prev_pi = pi;
            prev_gap = gap;
        }
    }
    // increasing in m at fixed wealth
    for (double w : {2.0, 4.0, 6.0}) {
        double prev = -1.0;
        for (double m : {w + 0.5, w + 2.0, w + 4.0}) {
            if (p1.alpha * m >= w) continue;
            const double pi = pi_star_restricted(w, m, k1, p1);
            CHECK(pi > prev);
            prev = pi;
        }
    }
}

TEST_CASE("evaluation just outside the wealth band clamps to the boundary") {
    const double m = 5.0;
    CHECK(legendre_phi(m * (1.0 + 1e-13), m, k1, p1) ==
          doctest::Approx(legendre_phi(m, m, k1, p1)).epsilon(1e-12));
    CHECK_THROWS_AS(legendre_phi(5.1, m, k1, p1), std::domain_error);
    CHECK_THROWS_AS(legendre_phi(2.0, m, k1, p1), std::domain_error);
}

TEST_SUITE_END();
