#include "drawdown/verification.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

#include "drawdown/closed_form.hpp"
#include "drawdown/root_find.hpp"

namespace drawdown {

double l_beta(double h, double h_w, double h_ww, double w, double beta, const MarketParams& p) {
    return (p.r * w + (p.mu - p.r) * beta - p.c) * h_w + 0.5 * p.sigma * p.sigma * beta * beta * h_ww -
           p.lam * h;
}

double l_beta_minimizer(double h_w, double h_ww, const MarketParams& p) {
    if (!(h_ww > 0.0)) throw std::domain_error("l_beta_minimizer: requires h_ww > 0");
    return -p.merton_ratio() * h_w / h_ww;
}

double l_beta_min_value(double h, double h_w, double h_ww, double w, const MarketParams& p) {
    const double sharpe = (p.mu - p.r) / p.sigma;
    const double delta = 0.5 * sharpe * sharpe;
    return (p.r * w - p.c) * h_w - delta * h_w * h_w / h_ww - p.lam * h;
}

bool HjbReport::all_pass() const {
    for (const auto& c : conditions)
        if (!c.pass) return false;
    return true;
}

std::string HjbReport::to_json() const {
    nlohmann::json j;
    j["degenerate_points"] = degenerate_points;
    j["all_pass"] = all_pass();
    auto arr = nlohmann::json::array();
    for (const auto& c : conditions) {
        arr.push_back({{"name", c.name},
                       {"tolerance", c.tolerance},
                       {"worst_violation", c.worst_violation},
                       {"location", {{"w", c.at_w}, {"m", c.at_m}}},
                       {"pass", c.pass}});
    }
    j["conditions"] = arr;
    return j.dump(2);
}

namespace {

struct Worst {
    double violation = 0.0;
    double w = 0.0, m = 0.0;
    void update(double v, double ww, double mm) {
        if (v > violation) {
            violation = v;
            w = ww;
            m = mm;
        }
    }
};

ConditionReport make_report(const std::string& name, double tol, const Worst& worst) {
    return ConditionReport{name, tol, worst.violation, worst.w, worst.m, worst.violation <= tol};
}

}  // namespace

HjbReport check_theorem_3_1(const ValueSurface& s, const GridSpec& grid,
                            const std::function<double(double, double)>& surface_fn) {
    const MarketParams& p = s.params();
    const DerivedConstants& k = s.constants();
    const double cr = k.safe_level;
    const bool custom = static_cast<bool>(surface_fn);
    auto value = [&](double w, double m) { return custom ? surface_fn(w, m) : s.phi(w, m); };

    HjbReport rep;
    Worst monotone, convex, m_deriv_bounded, diag_mderiv, bc_drawdown, bc_safe, generator, strategy_match;
    int degenerate = 0;

    const double pad = grid.interior_pad;
    const double fd_w = 1e-5 * cr;  // step for finite differences in w
    const double fd_m = 1e-5 * cr;

    // m-grid spans both regimes below c/r plus a band above the safe level.
    for (int im = 0; im < grid.n_m; ++im) {
        const double t = (im + 0.5) / grid.n_m;
        const double m = cr * (pad + (1.25 - 2.0 * pad) * t);  // up to 1.25 c/r
        const double w_lo = p.alpha * m;
        const double w_hi = std::min(m, cr);
        if (w_hi - w_lo < 10 * fd_w) continue;

        // (iv) boundary value at the drawdown line
        bc_drawdown.update(std::fabs(value(w_lo, m) - 1.0), w_lo, m);
        // (v) zero at the safe level when m >= c/r
        if (m >= cr) bc_safe.update(std::fabs(value(cr, m)), cr, m);
        // (iii) diagonal m-derivative (one-sided; only defined for m < c/r)
        if (m < cr * (1.0 - 1e-3)) {
            const double hm = (value(m, m + fd_m) - value(m, m)) / fd_m;
            diag_mderiv.update(std::max(0.0, -hm) , m, m);
            if (m > s.m_star() * (1.0 + 1e-3) || p.alpha == 0.0) {
                // equality branch: h_m(m, m) = 0 where the maximum is allowed to grow
                diag_mderiv.update(std::fabs(hm), m, m);
            }
        }

        for (int iw = 0; iw < grid.n_w; ++iw) {
            const double u = (iw + 0.5) / grid.n_w;
            const double w = w_lo + (w_hi - w_lo) * (pad + (1.0 - 2.0 * pad) * u);
            if (w - w_lo < 2 * fd_w || w_hi - w < 2 * fd_w) continue;

            const double h0 = value(w, m);
            const double hp = value(w + fd_w, m);
            const double hm2 = value(w - fd_w, m);
            const double h_w = (hp - hm2) / (2 * fd_w);
            const double h_ww = (hp - 2 * h0 + hm2) / (fd_w * fd_w);

            // (i) non-increasing and convex in w
            monotone.update(h_w, w, m);
            convex.update(-h_ww - 1e-8, w, m);
            // (ii) bounded one-sided m-derivatives
            if (m < cr * (1.0 - 1e-3) && w < m * (1.0 - 1e-6)) {
                const double hmd = (value(w, m + fd_m) - h0) / fd_m;
                m_deriv_bounded.update(std::isfinite(hmd) ? 0.0 : 1.0, w, m);
            }
            // (vi) nonnegative generator, equality at the optimizer
            double aw, aww;
            if (!custom && m < cr) {
                aw = s.phi_w(w, m);
                aww = s.phi_ww(w, m);
            } else if (!custom) {
                aw = phi_above_safe_dw(w, m, k, p);
                aww = phi_above_safe_dww(w, m, k, p);
            } else {
                aw = h_w;
                aww = h_ww;
            }
            if (!(aww > 0.0)) {
                ++degenerate;
                continue;
            }
            const double lmin = l_beta_min_value(h0, aw, aww, w, p);
            generator.update(-lmin, w, m);
            if (!custom) {
                const double beta_star = l_beta_minimizer(aw, aww, p);
                const double pi = s.pi_star(w, m);
                const double scale = std::max(1.0, std::fabs(pi));
                strategy_match.update(std::fabs(beta_star - pi) / scale, w, m);
                strategy_match.update(std::fabs(l_beta(h0, aw, aww, w, pi, p)), w, m);
            }
        }
    }

    rep.conditions.push_back(make_report("i_nonincreasing_w", 1e-7, monotone));
    rep.conditions.push_back(make_report("i_convex_w", 1e-8, convex));
    rep.conditions.push_back(make_report("ii_bounded_m_derivatives", 0.0, m_deriv_bounded));
    rep.conditions.push_back(make_report("iii_diagonal_m_derivative", 1e-4, diag_mderiv));
    rep.conditions.push_back(make_report("iv_drawdown_value_one", 1e-8, bc_drawdown));
    rep.conditions.push_back(make_report("v_safe_level_value_zero", 1e-12, bc_safe));
    rep.conditions.push_back(make_report("vi_generator_nonnegative", 1e-5, generator));
    rep.conditions.push_back(make_report("vi_equality_at_optimum", 1e-5, strategy_match));
    rep.degenerate_points = degenerate;
    return rep;
}

namespace {

void thomas_solve(std::vector<double>& sub, std::vector<double>& dia, std::vector<double>& sup,
                  std::vector<double>& rhs, std::vector<double>& x) {
    const std::size_t n = dia.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = sub[i] / dia[i - 1];
        dia[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    x.resize(n);
    x[n - 1] = rhs[n - 1] / dia[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) {
        x[i] = (rhs[i] - sup[i] * x[i + 1]) / dia[i];
    }
}

}  // namespace

BvpSolution restricted_bvp_oracle(double m, const DerivedConstants& k, const MarketParams& p,
                                  int grid_size, BvpBoundary boundary, int max_iterations) {
    const double cr = k.safe_level;
    const bool reflect = (boundary == BvpBoundary::reflect_at_max);
    if (reflect && !(m > 0.0 && m < cr)) {
        throw std::domain_error("restricted_bvp_oracle: reflecting mode requires 0 < m < c/r");
    }
    const int N = grid_size;
    const double wl = p.alpha * m;
    const double wr = reflect ? m : cr;
    const double mr = p.merton_ratio();

    BvpSolution sol;
    sol.w.resize(N + 1);
    for (int i = 0; i <= N; ++i) {
        const double t = static_cast<double>(i) / N;
        sol.w[i] = wl + (wr - wl) * t * (2.0 - t);  // quadratic clustering at the right end
    }
    const std::vector<double>& w = sol.w;

    // policy cap: a loose multiple of the ruin-problem allocation scale
    std::vector<double> cap(N + 1), pol(N + 1);
    for (int i = 0; i <= N; ++i) {
        cap[i] = 3.0 * mr / (k.gamma - 1.0) * (cr - w[i]) + 1.0;
        pol[i] = std::min(mr * (cr - w[i]), cap[i]);
    }
    pol[N] = 0.0;

    std::vector<double> sub(N), dia(N), sup(N), rhs(N), hn, h;
    // 0 = central, 1 = upwind; the choice is frozen after the early
    // iterations so the value map stays a continuous function of the policy
    // (flipping stencils at the monotonicity threshold stalls convergence).
    std::vector<signed char> upwind(N + 1, 0);
    const int freeze_after = 50;
    int consecutive = 0;
    for (int it = 0; it < max_iterations; ++it) {
        // assemble rows for unknowns h_1..h_N (h_0 = 1 is folded into the rhs)
        for (int i = 1; i < N; ++i) {
            const double hl = w[i] - w[i - 1], hr = w[i + 1] - w[i];
            const double a = 0.5 * p.sigma * p.sigma * pol[i] * pol[i];
            const double b = p.r * w[i] - p.c + (p.mu - p.r) * pol[i];
            const double cl = 2.0 * a / (hl * (hl + hr));
            const double cu = 2.0 * a / (hr * (hl + hr));
            const double dl = -hr / (hl * (hl + hr));
            const double dm = (hr - hl) / (hl * hr);
            const double dr = hl / (hr * (hl + hr));
            double L = b * dl + cl, M = b * dm - (cl + cu), R = b * dr + cu;
            if (it <= freeze_after) upwind[i] = (L < 0.0 || R < 0.0) ? 1 : 0;
            if (upwind[i]) {
                if (b > 0.0) {
                    L = cl; M = -(cl + cu) - b / hr; R = cu + b / hr;
                } else {
                    L = cl - b / hl; M = -(cl + cu) + b / hl; R = cu;
                }
            }
            sub[i - 1] = -L;
            dia[i - 1] = p.lam - M;
            sup[i - 1] = -R;
            rhs[i - 1] = 0.0;
        }
        rhs[0] = -sub[0];
        sub[0] = 0.0;
        const double hN = w[N] - w[N - 1];
        if (reflect) {
            const double bN = p.r * wr - p.c;  // < 0 below the safe level
            sub[N - 1] = bN / hN;
            dia[N - 1] = p.lam - bN / hN;
        } else {
            sub[N - 1] = 0.0;
            dia[N - 1] = 1.0;
        }
        sup[N - 1] = 0.0;
        rhs[N - 1] = 0.0;

        thomas_solve(sub, dia, sup, rhs, hn);
        hn.insert(hn.begin(), 1.0);

        const double theta = (it < 10) ? 1.0 : 15.0 / (15.0 + it);
        for (int i = 1; i < N; ++i) {
            const double hl = w[i] - w[i - 1], hr = w[i + 1] - w[i];
            const double hw = (-hr / (hl * (hl + hr))) * hn[i - 1] + ((hr - hl) / (hl * hr)) * hn[i] +
                              (hl / (hr * (hl + hr))) * hn[i + 1];
            const double hww = 2.0 * hn[i - 1] / (hl * (hl + hr)) - 2.0 * hn[i] / (hl * hr) +
                               2.0 * hn[i + 1] / (hr * (hl + hr));
            if (hww > 1e-14 / (hl * hr)) {
                const double cand = std::clamp(-mr * hw / hww, 0.0, cap[i]);
                pol[i] = theta * cand + (1.0 - theta) * pol[i];
            }
        }
        pol[N] = 0.0;

        double dh = 0.0;
        if (!h.empty()) {
            for (int i = 0; i <= N; ++i) dh = std::max(dh, std::fabs(hn[i] - h[i]));
        } else {
            dh = 1.0;
        }
        h = hn;
        sol.iterations = it + 1;
        consecutive = (dh < 1e-10) ? consecutive + 1 : 0;
        if (consecutive >= 2) {
            sol.converged = true;
            break;
        }
    }
    if (!sol.converged) {
        throw SolverError("restricted_bvp_oracle: policy iteration did not converge at m=" +
                          std::to_string(m) + " after " + std::to_string(max_iterations) + " iterations");
    }
    sol.h = h;
    sol.policy = pol;
    return sol;
}

std::string PropositionReport::to_json() const {
    nlohmann::json j;
    j["hard"] = {{"pi_decreasing_in_w", pi_decreasing_in_w},
                 {"pi_below_ruin", pi_below_ruin},
                 {"gap_increasing_in_w", gap_increasing_in_w},
                 {"pi_increasing_in_m", pi_increasing_in_m},
                 {"all_pass", all_hard_pass()}};
    j["measured_above_mstar"] = {{"pi_decreasing_in_w", conj_pi_decreasing_in_w},
                                 {"pi_increasing_in_m", conj_pi_increasing_in_m},
                                 {"min_gap_to_ruin_strategy", min_gap_above_mstar}};
    return j.dump(2);
}

PropositionReport proposition_suite(const ValueSurface& s, int n_w, int n_m) {
    const MarketParams& p = s.params();
    const DerivedConstants& k = s.constants();
    const double cr = k.safe_level;
    const double ms = s.m_star();
    const double edge = 1e-6 * cr;

    PropositionReport rep;
    if (p.alpha == 0.0 || !(ms > 0.0)) {
        throw std::domain_error("proposition_suite: restricted regime is empty (alpha = 0)");
    }

    auto sweep = [&](double m, bool& dec_w, bool& below, bool& gap_inc, double& min_gap) {
        dec_w = below = gap_inc = true;
        min_gap = 1e300;
        double prev_pi = 0.0, prev_gap = 0.0;
        for (int i = 0; i < n_w; ++i) {
            const double w = p.alpha * m + edge + (m - p.alpha * m - 2 * edge) * i / (n_w - 1.0);
            const double pi = s.pi_star(w, m);
            const double ruin = pi_ruin(w, k, p);
            const double gap = ruin - pi;
            min_gap = std::min(min_gap, gap);
            if (gap <= 0.0) below = false;
            if (i > 0) {
                if (pi >= prev_pi + 1e-12) dec_w = false;
                if (gap <= prev_gap - 1e-12) gap_inc = false;
            }
            prev_pi = pi;
            prev_gap = gap;
        }
    };

    rep.pi_decreasing_in_w = rep.pi_below_ruin = rep.gap_increasing_in_w = true;
    rep.pi_increasing_in_m = true;
    for (int j = 0; j < n_m; ++j) {
        const double m = ms * (j + 1.0) / (n_m + 1.0);
        bool dw, bl, gi;
        double mg;
        sweep(m, dw, bl, gi, mg);
        rep.pi_decreasing_in_w &= dw;
        rep.pi_below_ruin &= bl;
        rep.gap_increasing_in_w &= gi;
    }
    // increasing in m at fixed w, sampled on the restricted band
    for (int j = 0; j + 1 < n_m; ++j) {
        const double m1 = ms * (j + 1.0) / (n_m + 1.0);
        const double m2 = ms * (j + 2.0) / (n_m + 1.0);
        const double w = 0.5 * (p.alpha * m2 + m1);
        if (w <= p.alpha * m2 + edge || w >= m1 - edge) continue;
        if (s.pi_star(w, m2) < s.pi_star(w, m1) - 1e-10) rep.pi_increasing_in_m = false;
    }

    // measured analogues on (m*, c/r)
    rep.conj_pi_decreasing_in_w = rep.conj_pi_increasing_in_m = true;
    rep.min_gap_above_mstar = 1e300;
    for (int j = 0; j < n_m; ++j) {
        const double m = ms + (cr - ms) * (j + 0.5) / n_m;
        if (m >= cr - edge) continue;
        bool dw, bl, gi;
        double mg;
        sweep(m, dw, bl, gi, mg);
        rep.conj_pi_decreasing_in_w &= dw;
        rep.min_gap_above_mstar = std::min(rep.min_gap_above_mstar, mg);
    }
    for (int j = 0; j + 1 < n_m; ++j) {
        const double m1 = ms + (cr - ms) * (j + 0.5) / n_m;
        const double m2 = ms + (cr - ms) * (j + 1.5) / n_m;
        if (m2 >= cr - edge) continue;
        const double w = 0.5 * (p.alpha * m2 + m1);
        if (w <= p.alpha * m2 + edge || w >= m1 - edge) continue;
        if (s.pi_star(w, m2) < s.pi_star(w, m1) - 1e-10) rep.conj_pi_increasing_in_m = false;
    }
    return rep;
}

}  // namespace drawdown
