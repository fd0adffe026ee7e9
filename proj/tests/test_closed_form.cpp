#include <cmath>
#include <random>

#include "doctest.h"
#include "drawdown/closed_form.hpp"
#include "drawdown/verification.hpp"
#include "test_common.hpp"

using namespace drawdown;
using testutil::Frozen;

TEST_SUITE_BEGIN("closed_form");

namespace {
const MarketParams p1 = testutil::set1();
const DerivedConstants k1 = derive_constants(p1);
}  // namespace

TEST_CASE("boundary values and the interior reference point") {
    CHECK(phi_above_safe(12.5, 25.0, k1, p1) == 1.0);
    CHECK(phi_above_safe(25.0, 25.0, k1, p1) == 0.0);
    CHECK(phi_above_safe(18.75, 25.0, k1, p1) ==
          doctest::Approx(Frozen::set1_phi_18_75).epsilon(1e-12));
}

TEST_CASE("strategy values at the reference points") {
    CHECK(pi_ruin(25.0, k1, p1) == 0.0);
    CHECK(pi_ruin(12.5, k1, p1) == doctest::Approx(Frozen::set1_pi_ruin_12_5).epsilon(1e-12));
    const auto p2 = testutil::set2();
    const auto k2 = derive_constants(p2);
    CHECK(pi_ruin(12.5, k2, p2) == doctest::Approx(Frozen::set2_pi_ruin_12_5).epsilon(1e-12));
    // strictly decreasing in w, vanishing only at the safe level
    double prev = pi_ruin(12.5, k1, p1);
    for (double w = 13.0; w < 25.0; w += 0.5) {
        const double v = pi_ruin(w, k1, p1);
        CHECK(v < prev);
        CHECK(v > 0.0);
        prev = v;
    }
}

TEST_CASE("value is non-increasing and convex in w") {
    const double m = 25.0, lo = 12.5, hi = 25.0;
    const int n = 1000;
    const double dw = (hi - lo) / (n + 1);
    for (int i = 1; i <= n - 1; ++i) {
        const double w = lo + i * dw;
        const double a = phi_above_safe(w - dw, m, k1, p1);
        const double b = phi_above_safe(w, m, k1, p1);
        const double c = phi_above_safe(w + dw, m, k1, p1);
        CHECK(c <= b + 1e-14);
        CHECK((a - 2 * b + c) / (dw * dw) >= -1e-8);
    }
}

TEST_CASE("generator vanishes at the reported strategy and is positive elsewhere") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> un(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double w = 12.6 + 12.3 * un(rng);
        const double h = phi_above_safe(w, 25.0, k1, p1);
        const double hw = phi_above_safe_dw(w, 25.0, k1, p1);
        const double hww = phi_above_safe_dww(w, 25.0, k1, p1);
        const double beta = pi_ruin(w, k1, p1);
        CHECK(std::fabs(l_beta(h, hw, hww, w, beta, p1)) <= 1e-8);
        CHECK(beta == doctest::Approx(l_beta_minimizer(hw, hww, p1)).epsilon(1e-12));
        for (int j = 0; j < 100; ++j) {
            const double off = (un(rng) - 0.5) * 30.0;
            if (std::fabs(off) < 1e-3) continue;
            CHECK(l_beta(h, hw, hww, w, beta + off, p1) >= -1e-8);
        }
    }
}

TEST_CASE("alpha = 0 reduces to the lifetime ruin value, independent of m") {
    const auto p0 = testutil::set1_ruin();
    const auto k0 = derive_constants(p0);
    for (double w : {1.0, 10.0, 20.0, 24.0}) {
        const double base = phi_above_safe(w, 25.0, k0, p0);
        for (double m : {25.0, 30.0, 100.0}) {
            CHECK(phi_above_safe(w, m, k0, p0) == doctest::Approx(base).epsilon(1e-15));
        }
    }
}

TEST_CASE("round-off just above the safe level clamps to zero") {
    CHECK(phi_above_safe(25.0 * (1.0 + 1e-13), 25.0, k1, p1) == 0.0);
    CHECK_THROWS_AS(phi_above_safe(25.1, 25.0, k1, p1), std::domain_error);
    CHECK_THROWS_AS(phi_above_safe(12.0, 25.0, k1, p1), std::domain_error);
    CHECK_THROWS_AS(phi_above_safe(20.0, 24.0, k1, p1), std::domain_error);
}

TEST_SUITE_END();
