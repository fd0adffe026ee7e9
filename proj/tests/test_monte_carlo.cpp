#include <cmath>
#include <mutex>

#include "doctest.h"
#include "drawdown/closed_form.hpp"
#include "drawdown/monte_carlo.hpp"
#include "test_common.hpp"

using namespace drawdown;
using testutil::Frozen;

TEST_SUITE_BEGIN("monte_carlo");

namespace {
const MarketParams p1 = testutil::set1();
const DerivedConstants k1 = derive_constants(p1);

SimConfig fast_cfg(std::int64_t paths, double dt, double horizon) {
    SimConfig c;
    c.n_paths = paths;
    c.dt = dt;
    c.horizon = horizon;
    c.master_seed = 424242ULL;
    return c;
}
}  // namespace

TEST_CASE("degenerate starting points") {
    // at the drawdown line the game is over immediately
    SimResult r = simulate(ZeroStrategy{}, 12.5, 25.0, p1, fast_cfg(100, 1e-2, 10.0));
    CHECK(r.estimate == 1.0);
    CHECK(r.n_drawdown == 100);
    // at the safe level with no investment, drawdown never happens
    r = simulate(ZeroStrategy{}, 25.0, 25.0, p1, fast_cfg(100, 1e-2, 10.0));
    CHECK(r.estimate == 0.0);
}

TEST_CASE("no investment depletes wealth deterministically") {
    // from w the pure consumption flow reaches alpha*m after 25*ln 2 years,
    // so the estimator equals exp(-lam tau) = 1/2 up to the Euler drift error
    SimResult r = simulate(ZeroStrategy{}, 18.75, 25.0, p1, fast_cfg(8, 1e-3, 30.0));
    CHECK(r.estimate == doctest::Approx(0.5).epsilon(2e-3));
    CHECK(r.std_error <= 1e-12);  // identical paths
    CHECK(r.n_drawdown == 8);
}

TEST_CASE("results are bit-identical for any worker count") {
    SimConfig c1 = fast_cfg(5000, 1e-2, 50.0);
    c1.threads = 1;
    SimConfig c3 = c1;
    c3.threads = 3;
    const SimResult a = simulate(make_ruin_strategy(k1, p1), 18.75, 25.0, p1, c1);
    const SimResult b = simulate(make_ruin_strategy(k1, p1), 18.75, 25.0, p1, c3);
    CHECK(a.estimate == b.estimate);
    CHECK(a.std_error == b.std_error);
    CHECK(a.n_drawdown == b.n_drawdown);
}

TEST_CASE("estimator approaches the closed form under the safe-level strategy") {
    const double target = phi_above_safe(18.75, 25.0, k1, p1);
    const SimResult r = simulate(make_ruin_strategy(k1, p1), 18.75, 25.0, p1,
                                 fast_cfg(20000, 1e-2, 150.0));
    // loose sanity bound: 3 se plus an allowance for the coarse-step
    // barrier-monitoring bias and the horizon truncation
    CHECK(std::fabs(r.estimate - target) <= 3.0 * r.std_error + 0.012);
    CHECK(r.truncation_bound == doctest::Approx(std::exp(-0.04 * 150.0)));
}

TEST_CASE("halving the step moves the estimate by less than two standard errors") {
    const SimResult coarse = simulate(make_ruin_strategy(k1, p1), 18.75, 25.0, p1,
                                      fast_cfg(20000, 4e-3, 200.0));
    const SimResult fine = simulate(make_ruin_strategy(k1, p1), 18.75, 25.0, p1,
                                    fast_cfg(20000, 2e-3, 200.0));
    CHECK(std::fabs(coarse.estimate - fine.estimate) <=
          2.0 * std::hypot(coarse.std_error, fine.std_error));
}

TEST_CASE("restricted strategy keeps the maximum pinned up to discretization dust") {
    // The diffusion vanishes like sqrt(m - w) at the running maximum, so the
    // continuous process never crosses it. Euler steps do ratchet it up by a
    // small amount that shrinks with dt; what must not happen is growth of
    // order one toward the safe level (the ruin strategy exhibits that).
    const auto& s = testutil::surface1();
    const double m0 = 8.0;
    REQUIRE(m0 < s.m_star());
    const TabulatedStrategy opt(s);
    auto overshoot_at = [&](double dt) {
        double max_m = m0;
        FunctionStrategy probe{[&](double w, double m) {
            max_m = std::max(max_m, m);
            return opt(w, m);
        }};
        SimConfig cfg = fast_cfg(800, dt, 30.0);
        cfg.threads = 1;
        simulate(probe, 6.0, m0, p1, cfg);
        return max_m - m0;
    };
    const double coarse = overshoot_at(1e-3);
    const double fine = overshoot_at(5e-5);
    CHECK(coarse <= 0.05 * m0);
    CHECK(fine <= 0.025 * m0);
    CHECK(fine < coarse);
}

TEST_CASE("common random numbers: the optimal strategy is not beaten") {
    const auto& s = testutil::surface1();
    const TabulatedStrategy opt(s);
    auto rows = compare_strategies({{"opt", opt},
                                    {"hi", opt.scaled(1.4)},
                                    {"ruin", make_ruin_strategy(k1, p1)}},
                                   6.0, 8.0, p1, fast_cfg(30000, 1e-2, 120.0));
    const double base = rows[0].second.estimate;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double margin = 3.0 * std::hypot(rows[0].second.std_error, rows[i].second.std_error);
        CHECK(rows[i].second.estimate >= base - margin);
    }
    // identical seeds give identical repeat runs
    auto again = compare_strategies({{"opt", opt}}, 6.0, 8.0, p1, fast_cfg(30000, 1e-2, 120.0));
    CHECK(again[0].second.estimate == base);
}

TEST_CASE("pathological strategies abort and are reported") {
    FunctionStrategy bad{[](double, double) { return std::nan(""); }};
    CHECK_THROWS_AS(simulate(bad, 18.75, 25.0, p1, fast_cfg(100, 1e-2, 5.0)), SolverError);
}

TEST_CASE("result serialization carries the run description") {
    const SimResult r = simulate(ZeroStrategy{}, 18.75, 25.0, p1, fast_cfg(16, 1e-2, 20.0));
    const std::string j = r.to_json();
    for (const char* field : {"estimate", "std_error", "n_paths", "dt", "horizon", "aborted",
                              "truncation_bound"}) {
        CHECK(j.find(field) != std::string::npos);
    }
}

TEST_CASE("invalid runs are rejected") {
    CHECK_THROWS_AS(simulate(ZeroStrategy{}, 2.0, 5.0, p1, fast_cfg(10, 1e-2, 5.0)),
                    std::domain_error);
    SimConfig c = fast_cfg(0, 1e-2, 5.0);
    CHECK_THROWS_AS(simulate(ZeroStrategy{}, 4.0, 5.0, p1, c), std::invalid_argument);
}

TEST_SUITE_END();
