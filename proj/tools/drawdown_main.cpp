#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "drawdown/closed_form.hpp"
#include "drawdown/controller_stopper.hpp"
#include "drawdown/figures.hpp"
#include "drawdown/free_boundary.hpp"
#include "drawdown/market.hpp"
#include "drawdown/monte_carlo.hpp"
#include "drawdown/value_surface.hpp"
#include "drawdown/verification.hpp"

namespace {

using namespace drawdown;

constexpr int kExitOk = 0;
constexpr int kExitAssertion = 1;
constexpr int kExitUsage = 2;
constexpr int kExitSolver = 3;

struct ParamFlags {
    std::string config_path;
    std::optional<double> mu, sigma, r, c, lambda, alpha;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "parameter JSON file");
        auto opt = [&](const char* name, std::optional<double>& slot, const char* desc) {
            cmd->add_option_function<double>(name, [&slot](double v) { slot = v; }, desc);
        };
        opt("--mu", mu, "risky asset drift (per year)");
        opt("--sigma", sigma, "volatility (per sqrt year)");
        opt("--r", r, "riskless rate (per year)");
        opt("--c", c, "consumption rate (per year)");
        opt("--lambda", lambda, "hazard rate (per year)");
        opt("--alpha", alpha, "drawdown fraction in [0,1)");
    }

    MarketParams resolve() const {
        MarketParams p{};
        bool have = false;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw std::invalid_argument("cannot read config file " + config_path);
            std::stringstream ss;
            ss << in.rdbuf();
            p = params_from_json(ss.str());
            have = true;
        }
        if (!have && !(mu && sigma && r && c && lambda && alpha)) {
            throw std::invalid_argument(
                "parameters required: pass --config FILE or all of --mu --sigma --r --c --lambda --alpha");
        }
        if (mu) p.mu = *mu;
        if (sigma) p.sigma = *sigma;
        if (r) p.r = *r;
        if (c) p.c = *c;
        if (lambda) p.lam = *lambda;
        if (alpha) p.alpha = *alpha;
        validate(p);
        return p;
    }
};

nlohmann::json constants_json(const DerivedConstants& k) {
    return {{"delta", k.delta}, {"gamma", k.gamma}, {"B1", k.b1}, {"B2", k.b2},
            {"safe_level", k.safe_level}};
}

int cmd_constants(const ParamFlags& pf) {
    const MarketParams p = pf.resolve();
    std::cout << constants_json(derive_constants(p)).dump(2) << "\n";
    return kExitOk;
}

int cmd_mstar(const ParamFlags& pf, const std::string& curve_out, std::vector<double> eps) {
    const MarketParams p = pf.resolve();
    const DerivedConstants k = derive_constants(p);
    nlohmann::json out;
    if (p.alpha == 0.0) {
        out["note"] = "free-boundary regime empty, ruin closed form applies";
        out["m_star"] = 0.0;
        out["m_hat"] = 0.0;
        std::cout << out.dump(2) << "\n";
        return kExitOk;
    }
    if (eps.empty()) eps = {1e-3, 1e-4, 1e-5};
    try {
        ShootResult res = shoot(k, p, eps);
        res.curve.write_csv(curve_out);
        out["m_star"] = res.curve.m_star();
        out["m_hat"] = res.curve.m_hat_value();
        out["eps"] = res.diagnostics.eps;
        out["crossings"] = res.diagnostics.crossings;
        out["aitken"] = res.diagnostics.aitken;
        out["curve_file"] = curve_out;
        out["nodes"] = res.curve.nodes().size();
        if (!(res.curve.m_star() < res.curve.m_hat_value())) {
            std::cout << out.dump(2) << "\n";
            std::cerr << "mstar: invariant m* < m_hat violated\n";
            return kExitAssertion;
        }
        std::cout << out.dump(2) << "\n";
        return kExitOk;
    } catch (const ShootError& e) {
        const std::string dump_path = curve_out + ".trajectory";
        std::ofstream dump(dump_path);
        dump << "m,z\n";
        char buf[80];
        for (const auto& n : e.trajectory) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", n.m, n.z);
            dump << buf;
        }
        std::cerr << "mstar: " << e.what() << "\n  trajectory dump: " << dump_path << "\n";
        return kExitSolver;
    }
}

int cmd_eval(const ParamFlags& pf, double w, double m) {
    const MarketParams p = pf.resolve();
    ValueSurface s(p);
    const Evaluation e = s.evaluate(w, m);
    nlohmann::json out{{"w", w},
                       {"m", m},
                       {"phi", e.phi},
                       {"pi_star", e.pi},
                       {"regime", regime_name(e.regime)}};
    if (e.regime != Regime::above_safe) out["y"] = e.y;
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_figures(const ParamFlags& pf, int which, const std::string& out_dir) {
    const MarketParams p = pf.resolve();
    ValueSurface s(p);
    std::vector<std::string> files;
    if (which == 0) {
        for (int i = 1; i <= 8; ++i) {
            auto f = write_figure_data(i, s, out_dir);
            files.insert(files.end(), f.begin(), f.end());
        }
    } else {
        files = write_figure_data(which, s, out_dir);
    }
    nlohmann::json out{{"files", files}};
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int cmd_verify(const ParamFlags& pf, int grid, int oracle_grid, bool with_mc) {
    const MarketParams p = pf.resolve();
    ValueSurface s(p);
    const DerivedConstants& k = s.constants();
    nlohmann::json out;
    bool ok = true;

    GridSpec gs;
    gs.n_w = grid;
    gs.n_m = grid;
    HjbReport hjb = check_theorem_3_1(s, gs);
    out["theorem_3_1"] = nlohmann::json::parse(hjb.to_json());
    ok = ok && hjb.all_pass();

    if (p.alpha > 0.0) {
        PropositionReport props = proposition_suite(s);
        out["propositions"] = nlohmann::json::parse(props.to_json());
        ok = ok && props.all_hard_pass() && props.min_gap_above_mstar > 0.0;

        nlohmann::json oracle = nlohmann::json::array();
        for (double f : {0.35, 0.7}) {
            const double m = f * s.m_star();
            BvpSolution sol = restricted_bvp_oracle(m, k, p, oracle_grid);
            double max_err = 0.0;
            for (std::size_t i = 0; i < sol.w.size(); ++i) {
                max_err = std::max(max_err, std::fabs(sol.h[i] - s.phi(sol.w[i], m)));
            }
            oracle.push_back({{"m", m}, {"grid", oracle_grid}, {"max_error", max_err},
                              {"iterations", sol.iterations}});
            ok = ok && max_err <= 1e-3;
        }
        out["restricted_oracle"] = oracle;
    }

    if (with_mc) {
        SimConfig cfg;
        cfg.n_paths = 100000;
        cfg.dt = 1e-2;
        cfg.horizon = 200.0;
        const double m0 = (p.alpha > 0.0) ? 0.6 * s.m_star() : 0.6 * k.safe_level;
        const double w0 = 0.5 * (p.alpha * m0 + m0);
        TabulatedStrategy opt(s);
        auto rows = compare_strategies({{"optimal", opt},
                                        {"scaled_1.2", opt.scaled(1.2)},
                                        {"ruin", make_ruin_strategy(k, p)}},
                                       w0, m0, p, cfg);
        nlohmann::json mc = nlohmann::json::array();
        for (auto& [name, r] : rows) mc.push_back({{"strategy", name}, {"result", nlohmann::json::parse(r.to_json())}});
        out["monte_carlo"] = mc;
        const double opt_est = rows[0].second.estimate;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const auto& r = rows[i].second;
            const double comb = 3.0 * std::hypot(rows[0].second.std_error, r.std_error);
            ok = ok && (r.estimate >= opt_est - comb);
        }
    }

    out["pass"] = ok;
    std::cout << out.dump(2) << "\n";
    return ok ? kExitOk : kExitAssertion;
}

SimStrategy parse_strategy(const std::string& name, const ValueSurface& s) {
    if (name == "optimal") return TabulatedStrategy(s);
    if (name == "ruin") return make_ruin_strategy(s.constants(), s.params());
    if (name == "zero") return ZeroStrategy{};
    if (name.rfind("scaled:", 0) == 0) {
        const double f = std::stod(name.substr(7));
        return TabulatedStrategy(s).scaled(f);
    }
    throw std::invalid_argument("unknown strategy \"" + name + "\" (optimal|ruin|zero|scaled:<f>)");
}

int cmd_simulate(const ParamFlags& pf, double w, double m, const std::string& strategy,
                 const std::vector<std::string>& compare, const SimConfig& cfg) {
    const MarketParams p = pf.resolve();
    ValueSurface s(p);
    if (compare.empty()) {
        const SimResult r = simulate(parse_strategy(strategy, s), w, m, p, cfg);
        std::cout << r.to_json() << "\n";
        return kExitOk;
    }
    std::vector<std::pair<std::string, SimStrategy>> list;
    for (const auto& nm : compare) list.emplace_back(nm, parse_strategy(nm, s));
    auto rows = compare_strategies(list, w, m, p, cfg);
    nlohmann::json out = nlohmann::json::array();
    for (auto& [nm, r] : rows) out.push_back({{"strategy", nm}, {"result", nlohmann::json::parse(r.to_json())}});
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"minimum lifetime drawdown probability: solver, verifier, simulator"};
    app.require_subcommand(1);

    ParamFlags pf;

    auto* c_const = app.add_subcommand("constants", "print derived model constants");
    pf.attach(c_const);

    auto* c_mstar = app.add_subcommand("mstar", "compute m*, m_hat and the z(m) curve");
    std::string curve_out = "curve.csv";
    std::vector<double> eps;
    pf.attach(c_mstar);
    c_mstar->add_option("--curve-out", curve_out, "output CSV for the curve nodes");
    c_mstar->add_option("--eps", eps, "epsilon sweep for the terminal offset");

    auto* c_eval = app.add_subcommand("eval", "evaluate phi(w,m) and pi*(w,m)");
    double ew = 0.0, em = 0.0;
    pf.attach(c_eval);
    c_eval->add_option("--w", ew, "current wealth")->required();
    c_eval->add_option("--m", em, "maximum wealth to date")->required();

    auto* c_fig = app.add_subcommand("figures", "write figure data CSV files");
    int which = 0;
    std::string out_dir = "figures";
    pf.attach(c_fig);
    c_fig->add_option("--which", which, "figure index 1..8 (0 = all)")->check(CLI::Range(0, 8));
    c_fig->add_option("--out-dir", out_dir, "output directory");

    auto* c_verify = app.add_subcommand("verify", "run the verification suites");
    int grid = 200, oracle_grid = 800;
    bool with_mc = false;
    pf.attach(c_verify);
    c_verify->add_option("--grid", grid, "grid points per axis for the generator checks");
    c_verify->add_option("--oracle-grid", oracle_grid, "grid size of the finite-difference oracle");
    c_verify->add_flag("--mc", with_mc, "include a Monte Carlo dominance check");

    auto* c_sim = app.add_subcommand("simulate", "Monte Carlo estimate of the drawdown probability");
    double sw = 0.0, sm = 0.0;
    std::string strategy = "optimal";
    std::vector<std::string> compare;
    SimConfig cfg;
    pf.attach(c_sim);
    c_sim->add_option("--w", sw, "initial wealth")->required();
    c_sim->add_option("--m", sm, "initial maximum wealth")->required();
    c_sim->add_option("--strategy", strategy, "optimal|ruin|zero|scaled:<f>");
    c_sim->add_option("--compare", compare, "strategies to compare under common random numbers");
    c_sim->add_option("--dt", cfg.dt, "Euler step (years)");
    c_sim->add_option("--horizon", cfg.horizon, "truncation horizon (years)");
    c_sim->add_option("--paths", cfg.n_paths, "number of paths");
    c_sim->add_option("--seed", cfg.master_seed, "master seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (c_const->parsed()) return cmd_constants(pf);
        if (c_mstar->parsed()) return cmd_mstar(pf, curve_out, eps);
        if (c_eval->parsed()) return cmd_eval(pf, ew, em);
        if (c_fig->parsed()) return cmd_figures(pf, which, out_dir);
        if (c_verify->parsed()) return cmd_verify(pf, grid, oracle_grid, with_mc);
        if (c_sim->parsed()) return cmd_simulate(pf, sw, sm, strategy, compare, cfg);
    } catch (const ShootError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitAssertion;
    }
    return kExitUsage;
}
