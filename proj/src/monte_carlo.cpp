#include "drawdown/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "drawdown/closed_form.hpp"
#include "drawdown/root_find.hpp"

namespace drawdown {

std::string SimResult::to_json() const {
    nlohmann::json j;
    j["estimate"] = estimate;
    j["std_error"] = std_error;
    j["n_paths"] = n_paths;
    j["n_drawdown"] = n_drawdown;
    j["aborted"] = aborted;
    j["truncation_bound"] = truncation_bound;
    j["dt"] = dt;
    j["horizon"] = horizon;
    return j.dump();
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("DRAWDOWN_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

// One path; returns e^{-lam tau} (0 if no drawdown before the horizon or
// the safe level), or -1 on numerical failure.
template <typename S>
double run_path(const S& strat, double w0, double m0, const MarketParams& p, const SimConfig& cfg,
                std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    const double cr = p.safe_level();
    const double dt = cfg.dt, sdt = std::sqrt(dt);
    const double mu_r = p.mu - p.r;
    const std::int64_t n_steps = static_cast<std::int64_t>(cfg.horizon / dt + 0.5);

    double W = w0, M = m0;
    if (W <= p.alpha * M) return 1.0;  // drawdown at time zero
    if (W >= cr) return 0.0;
    double barrier = p.alpha * M;
    for (std::int64_t s = 0; s < n_steps; ++s) {
        const double pi = strat(W, M);
        W += (p.r * W + mu_r * pi - p.c) * dt + p.sigma * pi * sdt * normal(rng);
        if (!std::isfinite(W)) return -1.0;
        if (W > M) {
            M = W;
            barrier = p.alpha * M;
        }
        if (W <= barrier) return std::exp(-p.lam * static_cast<double>(s + 1) * dt);
        if (W >= cr) return 0.0;
    }
    return 0.0;
}

template <typename S>
SimResult simulate_typed(const S& strat, double w0, double m0, const MarketParams& p,
                         const SimConfig& cfg) {
    validate(p);
    if (!(cfg.dt > 0.0) || !(cfg.n_paths >= 1)) {
        throw std::invalid_argument("simulate: require dt > 0 and n_paths >= 1");
    }
    if (!(m0 > 0.0) || w0 < p.alpha * m0 - 1e-12 || w0 > std::min(m0, p.safe_level()) + 1e-12) {
        throw std::domain_error("simulate: (w0, m0) outside the admissible domain");
    }
    const std::int64_t n = cfg.n_paths;
    std::vector<double> vals(static_cast<std::size_t>(n));
    const int n_threads = std::min<std::int64_t>(resolve_threads(cfg.threads), n);

    auto worker = [&](std::int64_t lo, std::int64_t hi) {
        for (std::int64_t i = lo; i < hi; ++i) {
            const std::uint64_t seed = splitmix64(cfg.master_seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(i + 1)));
            vals[static_cast<std::size_t>(i)] = run_path(strat, w0, m0, p, cfg, seed);
        }
    };
    if (n_threads <= 1) {
        worker(0, n);
    } else {
        std::vector<std::thread> pool;
        const std::int64_t chunk = (n + n_threads - 1) / n_threads;
        for (int t = 0; t < n_threads; ++t) {
            const std::int64_t lo = t * chunk, hi = std::min<std::int64_t>(n, lo + chunk);
            if (lo < hi) pool.emplace_back(worker, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    // reduction in path order: identical result for any worker count
    SimResult res;
    double sum = 0.0, sumsq = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        double v = vals[static_cast<std::size_t>(i)];
        if (v < 0.0) {
            ++res.aborted;
            v = 0.0;
        } else if (v > 0.0) {
            ++res.n_drawdown;
        }
        sum += v;
        sumsq += v * v;
    }
    res.n_paths = n;
    res.estimate = sum / static_cast<double>(n);
    const double var = std::max(0.0, sumsq / static_cast<double>(n) - res.estimate * res.estimate);
    res.std_error = std::sqrt(var / static_cast<double>(n));
    res.truncation_bound = std::exp(-p.lam * cfg.horizon);
    res.dt = cfg.dt;
    res.horizon = cfg.horizon;
    if (res.aborted * 10000 > n) {
        throw SolverError("simulate: " + std::to_string(res.aborted) + " of " + std::to_string(n) +
                          " paths aborted on NaN/overflow (limit 0.01%)");
    }
    return res;
}

}  // namespace

TabulatedStrategy::TabulatedStrategy(const ValueSurface& s, int n_w, int n_m, double scale)
    : alpha_(s.params().alpha), cr_(s.constants().safe_level),
      ruin_slope_(s.params().merton_ratio() / (s.constants().gamma - 1.0)),
      n_w_(n_w), n_m_(n_m), scale_(scale) {
    m_lo_ = (s.params().alpha > 0.0) ? 1e-3 * cr_ : std::max(1e-3 * cr_, s.curve().m_min());
    m_hi_ = cr_ * (1.0 - 1e-9);
    table_.resize(static_cast<std::size_t>(n_m_) * n_w_);
    for (int i = 0; i < n_m_; ++i) {
        const double m = m_lo_ + (m_hi_ - m_lo_) * i / (n_m_ - 1.0);
        const double lo = alpha_ * m, hi = std::min(m, cr_);
        for (int j = 0; j < n_w_; ++j) {
            // nodes clustered toward w = m, where the profile is steepest
            const double u = j / (n_w_ - 1.0);
            const double w = lo + (hi - lo) * u * (2.0 - u);
            table_[static_cast<std::size_t>(i) * n_w_ + j] = s.pi_star(w, m);
        }
    }
}

double TabulatedStrategy::operator()(double w, double m) const {
    if (m >= cr_) {  // closed-form regime
        return scale_ * std::max(0.0, ruin_slope_ * (cr_ - w));
    }
    const double mc = std::clamp(m, m_lo_, m_hi_);
    const double fm = (mc - m_lo_) / (m_hi_ - m_lo_) * (n_m_ - 1.0);
    const int i = std::min(static_cast<int>(fm), n_m_ - 2);
    const double tm = fm - i;
    // One band-relative coordinate for both rows: the steep profile near
    // w = m stays aligned, so pi(m, m) interpolates to exactly zero.
    const double lo = alpha_ * m, hi = std::min(m, cr_);
    const double frac = std::clamp((w - lo) / (hi - lo), 0.0, 1.0);
    const double t = (1.0 - std::sqrt(1.0 - frac)) * (n_w_ - 1.0);  // invert the clustering map
    const int j = std::min(static_cast<int>(t), n_w_ - 2);
    const double tw = t - j;
    auto row_val = [&](int row) {
        const double* r = table_.data() + static_cast<std::size_t>(row) * n_w_;
        return (1.0 - tw) * r[j] + tw * r[j + 1];
    };
    return scale_ * ((1.0 - tm) * row_val(i) + tm * row_val(i + 1));
}

TabulatedStrategy TabulatedStrategy::scaled(double factor) const {
    TabulatedStrategy t = *this;
    t.scale_ = scale_ * factor;
    return t;
}

RuinStrategy make_ruin_strategy(const DerivedConstants& k, const MarketParams& p) {
    return RuinStrategy{p.merton_ratio() / (k.gamma - 1.0), k.safe_level};
}

SimResult simulate(const SimStrategy& strategy, double w0, double m0, const MarketParams& p,
                   const SimConfig& cfg) {
    return std::visit([&](const auto& s) { return simulate_typed(s, w0, m0, p, cfg); }, strategy);
}

std::vector<std::pair<std::string, SimResult>> compare_strategies(
    const std::vector<std::pair<std::string, SimStrategy>>& strategies, double w0, double m0,
    const MarketParams& p, const SimConfig& cfg) {
    std::vector<std::pair<std::string, SimResult>> out;
    out.reserve(strategies.size());
    for (const auto& [name, strat] : strategies) {
        out.emplace_back(name, simulate(strat, w0, m0, p, cfg));
    }
    return out;
}

}  // namespace drawdown
