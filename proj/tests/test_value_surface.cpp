#include <cmath>
#include <thread>
#include <vector>

#include "doctest.h"
#include "drawdown/closed_form.hpp"
#include "drawdown/controller_stopper.hpp"
#include "drawdown/value_surface.hpp"
#include "test_common.hpp"

using namespace drawdown;

TEST_SUITE_BEGIN("value_surface");

namespace {
const MarketParams p1 = testutil::set1();
const DerivedConstants k1 = derive_constants(p1);
}  // namespace

TEST_CASE("drawdown boundary value is one in every regime") {
    const auto& s = testutil::surface1();
    for (int i = 1; i <= 100; ++i) {
        const double m = 30.0 * i / 100.0;
        CHECK(std::fabs(s.phi(p1.alpha * m, m) - 1.0) <= 1e-8);
    }
}

TEST_CASE("value vanishes approaching the safe level along the diagonal") {
    const auto& s = testutil::surface1();
    CHECK(std::fabs(s.phi(25.0 * (1 - 1e-6), 25.0 * (1 - 1e-6))) <= 1e-8);
    CHECK(std::fabs(s.phi(25.0 * (1 - 1e-9), 25.0 * (1 - 1e-9))) <= 1e-8);
}

TEST_CASE("strategy at the high-water mark: zero at m* and c/r, positive between") {
    const auto& s = testutil::surface1();
    const double ms = s.m_star();
    CHECK(std::fabs(s.pi_star(ms, ms)) <= 1e-5);
    CHECK(std::fabs(s.pi_star(25.0, 25.0)) <= 1e-12);
    for (double f : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double m = ms + f * (25.0 - ms);
        CHECK(s.pi_star(m, m) > 1e-3);
    }
    // and below m* the restricted strategy keeps the maximum flat
    for (double f : {0.3, 0.6, 0.9}) {
        CHECK(std::fabs(s.pi_star(f * ms, f * ms)) <= 1e-10);
    }
}

TEST_CASE("the two dual constructions agree at the critical mark") {
    for (const ValueSurface* sp : {&testutil::surface1(), &testutil::surface2()}) {
        const auto& s = *sp;
        const auto& p = s.params();
        const double ms = s.m_star();
        for (int i = 1; i < 30; ++i) {
            const double w = p.alpha * ms + (ms - p.alpha * ms) * i / 30.0;
            const double via_curve = s.phi(w, ms);
            const double via_game = legendre_phi(w, ms, s.constants(), p);
            CHECK(std::fabs(via_curve - via_game) <= 1e-6);
            CHECK(std::fabs(s.pi_star(w, ms) - pi_star_restricted(w, ms, s.constants(), p)) <= 1e-6);
        }
    }
}

TEST_CASE("regimes agree where they meet the safe level") {
    const auto& s = testutil::surface1();
    const double m_lo = 25.0 * (1.0 - 1e-7);
    for (int i = 1; i < 30; ++i) {
        const double w = p1.alpha * m_lo + (m_lo - p1.alpha * m_lo) * i / 30.0;
        CHECK(std::fabs(s.phi(w, m_lo) - phi_above_safe(w, 25.0, k1, p1)) <= 1e-5);
        CHECK(std::fabs(s.pi_star(w, m_lo) - pi_ruin(w, k1, p1)) <= 1e-5);
    }
}

TEST_CASE("dual inversion: boundary values and strict monotonicity in w") {
    const auto& s = testutil::surface1();
    for (double m : {8.0, s.m_star(), 20.0}) {
        const double y_hi = s.invert_dual(p1.alpha * m, m);
        const double y_lo = s.invert_dual(m, m);
        CHECK(y_lo < y_hi);
        CHECK(s.eta(m) == doctest::Approx(y_lo / y_hi).epsilon(1e-9));
        double prev = y_hi;
        for (int i = 1; i <= 40; ++i) {
            const double w = p1.alpha * m + (m - p1.alpha * m) * i / 40.0;
            const double y = s.invert_dual(w, m);
            CHECK(y < prev);
            prev = y;
        }
    }
}

TEST_CASE("eta is continuous at the critical mark and equals 1/x below it") {
    const auto& s = testutil::surface1();
    const double ms = s.m_star();
    CHECK(std::fabs(s.eta(ms * (1.0 - 1e-9)) - s.eta(ms)) <= 1e-6);
    for (double m : {2.0, 8.0, 14.0}) {
        CHECK(s.eta(m) == doctest::Approx(1.0 / solve_x(m, k1, p1)).epsilon(1e-12));
    }
    CHECK(s.eta(1e-8) == doctest::Approx(1.0).epsilon(1e-5));
}

TEST_CASE("the m-derivative of the value jumps downward across m*") {
    const auto& s = testutil::surface1();
    const double ms = s.m_star();
    const double dm = 1e-5 * 25.0;
    for (double wf : {0.999, 0.9, 0.7}) {
        const double w = wf * ms;
        const double left = (s.phi(w, ms) - s.phi(w, ms - dm)) / dm;
        const double right = (s.phi(w, ms + dm) - s.phi(w, ms)) / dm;
        CHECK(left - right > 1e-4);  // jump observed: ~1.7e-3 at the diagonal, decaying inward
    }
}

TEST_CASE("alpha = 0 reproduces the lifetime-ruin closed form") {
    const auto& s = testutil::surface_ruin();
    const auto p0 = testutil::set1_ruin();
    const auto k0 = derive_constants(p0);
    CHECK(s.m_star() == 0.0);
    for (double m : {2.0, 5.0, 10.0, 15.0, 20.0, 24.0}) {
        CHECK(s.regime(m) == Regime::free_boundary);
        for (int i = 1; i < 16; ++i) {
            const double w = m * i / 16.0;
            CHECK(std::fabs(s.phi(w, m) - phi_above_safe(w, 25.0, k0, p0)) <= 1e-8);
            CHECK(std::fabs(s.pi_star(w, m) - pi_ruin(w, k0, p0)) <= 1e-6);
        }
    }
}

TEST_CASE("domain violations carry the offending bound; round-off clamps") {
    const auto& s = testutil::surface1();
    CHECK_THROWS_AS(s.phi(2.0, 5.0), std::domain_error);
    CHECK_THROWS_AS(s.phi(5.2, 5.0), std::domain_error);
    CHECK_THROWS_AS(s.phi(1.0, -1.0), std::domain_error);
    CHECK(s.phi(5.0 * (1.0 + 1e-13), 5.0) == doctest::Approx(s.phi(5.0, 5.0)).epsilon(1e-12));
}

TEST_CASE("concurrent evaluation is bit-identical to serial") {
    const auto& s = testutil::surface1();
    const int n = 400;
    std::vector<double> serial(n), parallel(n);
    auto point = [&](int i, double& w, double& m) {
        m = 0.5 + 24.2 * i / (n - 1.0);
        w = p1.alpha * m + (std::min(m, 25.0) - p1.alpha * m) * ((i * 7919) % 97 + 1) / 99.0;
    };
    for (int i = 0; i < n; ++i) {
        double w, m;
        point(i, w, m);
        serial[i] = s.phi(w, m) + 0.5 * s.pi_star(w, m);
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < 4; ++t) {
        pool.emplace_back([&, t] {
            for (int i = t; i < n; i += 4) {
                double w, m;
                point(i, w, m);
                parallel[i] = s.phi(w, m) + 0.5 * s.pi_star(w, m);
            }
        });
    }
    for (auto& th : pool) th.join();
    for (int i = 0; i < n; ++i) CHECK(serial[i] == parallel[i]);
}

TEST_CASE("evaluate() is consistent with the individual accessors") {
    const auto& s = testutil::surface1();
    for (auto [w, m] : {std::pair{12.0, 20.0}, std::pair{3.0, 5.0}, std::pair{18.75, 25.0}}) {
        const Evaluation e = s.evaluate(w, m);
        CHECK(e.phi == s.phi(w, m));
        CHECK(e.pi == s.pi_star(w, m));
        CHECK(e.regime == s.regime(m));
    }
}

TEST_SUITE_END();
