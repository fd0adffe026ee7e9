#include "drawdown/figures.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "drawdown/closed_form.hpp"
#include "drawdown/controller_stopper.hpp"
#include "drawdown/free_boundary.hpp"

namespace drawdown {

namespace {

class Csv {
  public:
    Csv(const std::string& path, const std::string& header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open " + path + " for writing");
        out_ << header << "\n";
    }
    void row(std::initializer_list<double> vals) {
        char buf[64];
        bool first = true;
        for (double v : vals) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            if (!first) out_ << ",";
            out_ << buf;
            first = false;
        }
        out_ << "\n";
    }
    void row(int id, std::initializer_list<double> vals) {
        out_ << id;
        char buf[64];
        for (double v : vals) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out_ << "," << buf;
        }
        out_ << "\n";
    }

  private:
    std::ofstream out_;
};

std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

}  // namespace

std::vector<std::string> write_figure_data(int which, const ValueSurface& s,
                                           const std::string& out_dir) {
    const MarketParams& p = s.params();
    const DerivedConstants& k = s.constants();
    const double cr = k.safe_level;
    const double ms = s.m_star();
    const double mh = s.m_hat_value();
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> files;

    switch (which) {
        case 1: {  // domain boundaries: z = 1/x(m) and m = xi(z)
            files.push_back(join(out_dir, "fig1_x_boundary.csv"));
            Csv bx(files.back(), "m,z_lower");
            const int n = 400;
            for (int i = 0; i <= n; ++i) {
                const double m = cr * i / (n + 1.0);
                bx.row({m, (m == 0.0) ? 1.0 : 1.0 / solve_x(m, k, p)});
            }
            files.push_back(join(out_dir, "fig1_xi_curve.csv"));
            Csv bxi(files.back(), "z,xi");
            for (int i = 1; i <= n; ++i) {
                const double z = static_cast<double>(i) / (n + 1.0);
                bxi.row({z, xi_curve(z, k, p)});
            }
            break;
        }
        case 2: {  // integral curves from the lower/right boundaries
            files.push_back(join(out_dir, "fig2_integral_curves.csv"));
            Csv out(files.back(), "curve,m,z");
            int id = 0;
            for (double z0 : {0.15, 0.3, 0.5, 0.7}) {
                Trajectory t = trace_integral_curve(cr, z0, k, p);
                for (const auto& nd : t.nodes) out.row(id, {nd.m, nd.z});
                ++id;
            }
            for (double f : {0.2, 0.4, 0.6, 0.8}) {
                const double m1 = mh + (cr - mh) * f;
                const double z1 = 1.0 / solve_x(m1, k, p);
                Trajectory t = trace_integral_curve(m1, z1, k, p);
                for (const auto& nd : t.nodes) out.row(id, {nd.m, nd.z});
                ++id;
            }
            break;
        }
        case 3: {  // the solution z(m) with z(c/r) = 0
            files.push_back(join(out_dir, "fig3_z_curve.csv"));
            Csv out(files.back(), "m,z");
            for (const auto& nd : s.curve().nodes()) out.row({nd.m, nd.z});
            break;
        }
        case 4: {  // pi*(m, m) on [m*, c/r]
            files.push_back(join(out_dir, "fig4_pi_at_high_water.csv"));
            Csv out(files.back(), "m,pi_star");
            const int n = 400;
            const double lo = (p.alpha > 0.0) ? ms : s.curve().m_min();
            for (int i = 0; i <= n; ++i) {
                const double m = lo + (cr * (1.0 - 1e-9) - lo) * i / static_cast<double>(n);
                out.row({m, s.pi_star(m, m)});
            }
            break;
        }
        case 5: {  // value surface samples over the feasible strip
            files.push_back(join(out_dir, "fig5_phi_surface.csv"));
            Csv out(files.back(), "m,w,phi");
            const int nm = 60, nw = 60;
            const double mlo = (p.alpha > 0.0) ? 0.02 * cr : s.curve().m_min();
            for (int i = 0; i <= nm; ++i) {
                const double m = mlo + (cr * (1.0 - 1e-6) - mlo) * i / static_cast<double>(nm);
                for (int j = 0; j <= nw; ++j) {
                    const double w = p.alpha * m + (m - p.alpha * m) * j / static_cast<double>(nw);
                    out.row({m, w, s.phi(w, m)});
                }
            }
            break;
        }
        case 6: {  // pi* against w at fixed m
            files.push_back(join(out_dir, "fig6_pi_vs_w.csv"));
            Csv out(files.back(), "m,w,pi_star");
            std::vector<double> mlist;
            if (p.alpha > 0.0) mlist = {0.5 * ms, 0.9 * ms, ms + 0.25 * (cr - ms), ms + 0.75 * (cr - ms)};
            else mlist = {0.3 * cr, 0.6 * cr, 0.9 * cr};
            for (double m : mlist) {
                const int n = 300;
                for (int j = 0; j <= n; ++j) {
                    const double w = p.alpha * m + (m - p.alpha * m) * (j + 0.001) / (n + 0.002);
                    out.row({m, w, s.pi_star(w, m)});
                }
            }
            break;
        }
        case 7: {  // pi* against m at fixed w
            files.push_back(join(out_dir, "fig7_pi_vs_m.csv"));
            Csv out(files.back(), "w,m,pi_star");
            for (double f : {0.2, 0.4, 0.6}) {
                const double w = f * cr;
                const double m_hi = (p.alpha > 0.0) ? std::min(w / p.alpha, cr) * (1.0 - 1e-9)
                                                    : cr * (1.0 - 1e-9);
                const int n = 300;
                for (int j = 0; j <= n; ++j) {
                    const double m = w + (m_hi - w) * j / static_cast<double>(n);
                    if (!(m > 0.0) || w < p.alpha * m || w > m) continue;
                    out.row({w, m, s.pi_star(w, m)});
                }
            }
            break;
        }
        case 8: {  // min over w of pi_ruin(w) - pi*(w, m)
            files.push_back(join(out_dir, "fig8_min_gap.csv"));
            Csv out(files.back(), "m,min_gap");
            const int nm = 120, nw = 400;
            const double mlo = (p.alpha > 0.0) ? 0.02 * cr : s.curve().m_min();
            // the gap vanishes in the limit m -> c/r; stop where it is still
            // resolvable above the curve interpolation error
            for (int i = 0; i <= nm; ++i) {
                const double m = mlo + (cr * (1.0 - 1e-4) - mlo) * i / static_cast<double>(nm);
                double gap = 1e300;
                for (int j = 0; j <= nw; ++j) {
                    const double w = p.alpha * m + (m - p.alpha * m) * (j + 0.5) / (nw + 1.0);
                    gap = std::min(gap, pi_ruin(w, k, p) - s.pi_star(w, m));
                }
                out.row({m, gap});
            }
            break;
        }
        default:
            throw std::invalid_argument("write_figure_data: figure index must be 1..8");
    }
    return files;
}

}  // namespace drawdown
