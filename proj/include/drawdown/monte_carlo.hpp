#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "drawdown/market.hpp"
#include "drawdown/value_surface.hpp"

namespace drawdown {

// Euler-Maruyama simulation of the wealth SDE under a feedback strategy,
// estimating the lifetime drawdown probability through E[e^{-lam tau}].
// Mortality is integrated analytically (the discount factor at the hitting
// time); paths are independent streams keyed by (master_seed, path index),
// so results are bit-identical for any worker count.

struct SimConfig {
    double dt = 1e-3;
    double horizon = 400.0;     // truncation time; bias bounded by e^{-lam T}
    std::int64_t n_paths = 100000;
    std::uint64_t master_seed = 0x5eed5eed5eedULL;
    int threads = 0;            // 0: DRAWDOWN_THREADS env var, else hardware
};

struct SimResult {
    double estimate = 0.0;
    double std_error = 0.0;
    std::int64_t n_paths = 0;
    std::int64_t n_drawdown = 0;
    std::int64_t aborted = 0;
    double truncation_bound = 0.0;
    double dt = 0.0;
    double horizon = 0.0;
    std::string to_json() const;
};

// Feedback strategies. The closed set below keeps the per-step dispatch
// out of the hot loop; FunctionStrategy covers ad-hoc cases.
struct RuinStrategy {        // the safe-level strategy: slope * (c/r - w)
    double slope;
    double safe_level;
    double operator()(double w, double) const { return slope * (safe_level - w); }
};

struct ZeroStrategy {
    double operator()(double, double) const { return 0.0; }
};

// Bilinear table of pi*(w, m) built from a ValueSurface, with an optional
// multiplicative scale (for perturbed-strategy comparisons). Above the
// safe level the closed form is used directly.
class TabulatedStrategy {
  public:
    TabulatedStrategy(const ValueSurface& s, int n_w = 384, int n_m = 384, double scale = 1.0);
    double operator()(double w, double m) const;
    double scale() const { return scale_; }
    TabulatedStrategy scaled(double factor) const;

  private:
    double alpha_, cr_, m_lo_, m_hi_;
    double ruin_slope_;
    int n_w_, n_m_;
    double scale_;
    std::vector<double> table_;  // row-major [i_m][i_w]
};

struct FunctionStrategy {
    std::function<double(double, double)> fn;
    double operator()(double w, double m) const { return fn(w, m); }
};

using SimStrategy = std::variant<RuinStrategy, ZeroStrategy, TabulatedStrategy, FunctionStrategy>;

RuinStrategy make_ruin_strategy(const DerivedConstants& k, const MarketParams& p);

SimResult simulate(const SimStrategy& strategy, double w0, double m0, const MarketParams& p,
                   const SimConfig& cfg);

// Runs each named strategy under common random numbers (same per-path
// streams) and returns the results in input order.
std::vector<std::pair<std::string, SimResult>> compare_strategies(
    const std::vector<std::pair<std::string, SimStrategy>>& strategies, double w0, double m0,
    const MarketParams& p, const SimConfig& cfg);

}  // namespace drawdown
