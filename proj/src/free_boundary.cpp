#include "drawdown/free_boundary.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "drawdown/controller_stopper.hpp"

namespace drawdown {

namespace {

struct Powers {
    double za, zb, zab, zb1, zb2;  // z^{B1-1}, z^{B2-1}, z^{B1+B2-2}, z^{B1}, z^{B2}
};

Powers powers(double z, const DerivedConstants& k) {
    Powers q;
    q.za = std::pow(z, k.b1 - 1.0);
    q.zb = std::pow(z, k.b2 - 1.0);
    q.zab = q.za * q.zb;
    q.zb1 = z * q.za;
    q.zb2 = z * q.zb;
    return q;
}

}  // namespace

namespace {

// No-domain-check core; out-of-range z yields NaN through pow, which the
// adaptive stepper treats as a rejected step.
OdeCoefficients ode_coefficients_raw(double z, const DerivedConstants& k, const MarketParams& p);

}  // namespace

OdeCoefficients ode_coefficients(double z, const DerivedConstants& k, const MarketParams& p) {
    // The working range is (0, 1]; a small overshoot is tolerated because
    // integrator stages may sample just past the upper boundary.
    if (!(z > 0.0 && z <= 1.0 + 1e-3)) {
        throw std::domain_error("ode_coefficients: z=" + std::to_string(z) + " outside (0,1]");
    }
    return ode_coefficients_raw(z, k, p);
}

namespace {

OdeCoefficients ode_coefficients_raw(double z, const DerivedConstants& k, const MarketParams& p) {
    const double b1 = k.b1, b2 = k.b2, cr = k.safe_level, al = p.alpha;
    const Powers q = powers(z, k);
    const double diff = q.zb2 - q.zb1;                                   // z^{B2} - z^{B1} > 0
    const double s1 = (b2 - 1.0) * q.za - (b1 - 1.0) * q.zb;             // < 0
    const double s2 = b1 - b2 + al * (b2 - 1.0) * q.za - al * (b1 - 1.0) * q.zb;
    const double s3 = (b1 - 1.0) * q.za - (b2 - 1.0) * q.zb - al * (b1 - b2) * q.zab;

    OdeCoefficients c;
    c.g0 = (1.0 - al) * cr * diff * s1;
    c.g1 = diff * (s2 + al * (b1 - 1.0) * (b2 - 1.0) * (q.za - q.zb));
    c.h0 = (1.0 - al) * (1.0 - al) * cr * cr * (b1 - b2) * q.zab * (-s1);
    c.h1 = (1.0 - al) * cr * (s1 * s3 - (b1 - b2) * q.zab * s2);
    c.h2 = s3 * s2;
    return c;
}

}  // namespace

double ode_numerator(double m, double z, const DerivedConstants& k, const MarketParams& p) {
    const OdeCoefficients c = ode_coefficients(z, k, p);
    return c.g1 * (k.safe_level - m) + c.g0;
}

double ode_denominator(double m, double z, const DerivedConstants& k, const MarketParams& p) {
    const OdeCoefficients c = ode_coefficients(z, k, p);
    const double u = k.safe_level - m;
    return c.h0 + u * (c.h1 + u * c.h2);
}

double xi_curve(double z, const DerivedConstants& k, const MarketParams& p) {
    const OdeCoefficients c = ode_coefficients(z, k, p);
    return c.g0 / c.g1 + k.safe_level;
}

double ode_rhs(double m, double z, const DerivedConstants& k, const MarketParams& p) {
    const OdeCoefficients c = ode_coefficients(z, k, p);
    const double u = k.safe_level - m;
    const double num = c.g1 * u + c.g0;
    const double den = c.h0 + u * (c.h1 + u * c.h2);
    const double scale = std::max({std::fabs(c.h0), std::fabs(u * c.h1), std::fabs(u * u * c.h2)});
    if (std::fabs(den) < 1e-14 * scale) {
        throw FormSwitch("ode_rhs: denominator vanishes at (m=" + std::to_string(m) + ", z=" +
                         std::to_string(z) + "); switch to Abel form");
    }
    return num / den;
}

double abel_rhs(double z, double m, const DerivedConstants& k, const MarketParams& p) {
    const OdeCoefficients c = ode_coefficients(z, k, p);
    const double u = k.safe_level - m;
    const double num = c.h0 + u * (c.h1 + u * c.h2);
    const double den = c.g1 * u + c.g0;
    const double scale = std::max(std::fabs(c.g0), std::fabs(u * c.g1));
    if (std::fabs(den) < 1e-14 * scale) {
        throw FormSwitch("abel_rhs: denominator vanishes at (m=" + std::to_string(m) + ", z=" +
                         std::to_string(z) + "); switch to z-form");
    }
    return num / den;
}

namespace {

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

double inv_x(double m, const DerivedConstants& k, const MarketParams& p) {
    const double cr = k.safe_level;
    if (m >= cr * (1.0 - 1e-15)) return 0.0;
    if (m <= 0.0) return 1.0;
    return 1.0 / solve_x(m, k, p);
}

double scaled_dist(double m, double z, double ms, double zs, double cr) {
    return std::hypot((m - ms) / cr, z - zs);
}

// Cash-Karp embedded 4(5) pair for a scalar ODE.
template <typename F>
void cash_karp(F&& f, double t, double y, double h, double& y5, double& err) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 3.0 / 5, c5 = 1.0, c6 = 7.0 / 8;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 3.0 / 10, a42 = -9.0 / 10, a43 = 6.0 / 5;
    static constexpr double a51 = -11.0 / 54, a52 = 5.0 / 2, a53 = -70.0 / 27, a54 = 35.0 / 27;
    static constexpr double a61 = 1631.0 / 55296, a62 = 175.0 / 512, a63 = 575.0 / 13824,
                            a64 = 44275.0 / 110592, a65 = 253.0 / 4096;
    static constexpr double b1 = 37.0 / 378, b3 = 250.0 / 621, b4 = 125.0 / 594, b6 = 512.0 / 1771;
    static constexpr double d1 = 2825.0 / 27648, d3 = 18575.0 / 48384, d4 = 13525.0 / 55296,
                            d5 = 277.0 / 14336, d6 = 1.0 / 4;
    const double k1 = f(t, y);
    const double k2 = f(t + c2 * h, y + h * a21 * k1);
    const double k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const double k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const double k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const double k6 = f(t + c6 * h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b6 * k6);
    const double y4 = y + h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6);
    err = std::fabs(y5 - y4);
}

enum class Mode { z_form, abel_form };

struct Stepper {
    const DerivedConstants& k;
    const MarketParams& p;
    const StepControl& ctrl;
    double cr;

    double raw_rhs_z(double m, double z) const {  // dz/dm without the degeneracy signal
        const OdeCoefficients c = ode_coefficients_raw(z, k, p);
        const double u = cr - m;
        return (c.g1 * u + c.g0) / (c.h0 + u * (c.h1 + u * c.h2));
    }
    double raw_rhs_abel(double z, double m) const {  // dm/dz
        const OdeCoefficients c = ode_coefficients_raw(z, k, p);
        const double u = cr - m;
        return (c.h0 + u * (c.h1 + u * c.h2)) / (c.g1 * u + c.g0);
    }

    // One adaptive step from (m, z) in the given mode with step magnitude h
    // and direction dir. Returns false on step-size underflow.
    bool step(Mode mode, double& m, double& z, double& h, double dir) const {
        const double cap = (mode == Mode::z_form) ? ctrl.max_m_step_rel * cr : ctrl.max_z_step;
        h = std::min(h, cap);
        double err = 0.0, tol = 0.0;
        for (;;) {
            double y5;
            if (mode == Mode::z_form) {
                cash_karp([this](double t, double y) { return raw_rhs_z(t, y); }, m, z, dir * h, y5, err);
                tol = ctrl.rtol * std::max(std::fabs(z), std::fabs(y5)) + ctrl.atol;
            } else {
                cash_karp([this](double t, double y) { return raw_rhs_abel(t, y); }, z, m, dir * h, y5, err);
                tol = ctrl.rtol * std::max(std::fabs(m), std::fabs(y5)) + ctrl.atol;
            }
            if (!std::isfinite(err) || !std::isfinite(y5)) {
                if (h <= 1e-16) return false;
                h *= 0.2;
                continue;
            }
            if (err <= tol) {
                if (mode == Mode::z_form) {
                    m += dir * h;
                    z = y5;
                } else {
                    z += dir * h;
                    m = y5;
                }
                const double grow = (err > 0.0) ? 0.9 * std::pow(tol / err, 0.2) : 5.0;
                h *= std::clamp(grow, 0.2, 5.0);
                return true;
            }
            if (h <= 1e-16) return false;
            h *= std::clamp(0.9 * std::pow(tol / err, 0.2), 0.2, 0.9);
        }
    }

    // Evaluate the same step at a fraction theta in [0,1] (for event bisection).
    void partial(Mode mode, double m, double z, double h_signed, double theta,
                 double& m2, double& z2) const {
        double y5, err;
        if (mode == Mode::z_form) {
            cash_karp([this](double t, double y) { return raw_rhs_z(t, y); }, m, z, h_signed * theta, y5, err);
            m2 = m + h_signed * theta;
            z2 = y5;
        } else {
            cash_karp([this](double t, double y) { return raw_rhs_abel(t, y); }, z, m, h_signed * theta, y5, err);
            z2 = z + h_signed * theta;
            m2 = y5;
        }
    }
};

enum class TraceStop { crossed, floor, ceiling, step_limit, spiral };

struct RawTrace {
    std::vector<CurveNode> nodes;
    std::vector<FreeBoundaryCurve::SegmentKind> kinds;
    TraceStop stop = TraceStop::step_limit;
    double m_cross = 0.0, z_cross = 0.0;
};

RawTrace trace_from(double m0, double z0, const DerivedConstants& k, const MarketParams& p,
                    const StepControl& ctrl, double mhat, double zhat) {
    const double cr = k.safe_level;
    const double m_floor = 1e-6 * cr;
    Stepper st{k, p, ctrl, cr};
    RawTrace out;
    double m = m0, z = z0;
    out.nodes.push_back({m, z});

    auto event = [&](double mm, double zz) { return zz - inv_x(mm, k, p); };

    Mode mode = Mode::z_form;
    {
        const double zp = st.raw_rhs_z(m, z);
        if (!std::isfinite(zp) || std::fabs(zp) > ctrl.switch_hi) mode = Mode::abel_form;
    }
    double h = ctrl.h_init;
    for (std::size_t it = 0; it < ctrl.max_steps; ++it) {
        const double zp = st.raw_rhs_z(m, z);
        if (mode == Mode::z_form && (!std::isfinite(zp) || std::fabs(zp) > ctrl.switch_hi)) {
            mode = Mode::abel_form;
            h = ctrl.h_init;
        } else if (mode == Mode::abel_form && std::isfinite(zp) && std::fabs(zp) < ctrl.switch_lo) {
            mode = Mode::z_form;
            h = ctrl.h_init;
        }
        double dir;
        if (mode == Mode::z_form) {
            dir = -1.0;  // m decreases
        } else {
            const OdeCoefficients c = ode_coefficients(z, k, p);
            const double g = c.g1 * (cr - m) + c.g0;
            dir = (g < 0.0) ? 1.0 : -1.0;  // dz sign along the decreasing-m orientation
        }
        const double m_prev = m, z_prev = z;
        if (!st.step(mode, m, z, h, dir)) {  // step underflow: squeezed into a corner
            out.stop = TraceStop::floor;
            return out;
        }

        const auto kind = (mode == Mode::z_form) ? FreeBoundaryCurve::SegmentKind::z_of_m
                                                 : FreeBoundaryCurve::SegmentKind::m_of_z;
        if (event(m, z) <= 0.0) {
            // crossing of z = 1/x(m): bisect the step fraction
            const double step_len = (mode == Mode::z_form) ? (m - m_prev) : (z - z_prev);
            double lo = 0.0, hi = 1.0;
            double mc = m, zc = z;
            for (int b = 0; b < 200; ++b) {
                const double mid = 0.5 * (lo + hi);
                double m2, z2;
                st.partial(mode, m_prev, z_prev, step_len, mid, m2, z2);
                if (event(m2, z2) <= 0.0) {
                    hi = mid;
                    mc = m2;
                    zc = z2;
                } else {
                    lo = mid;
                }
                double mlo, zlo;
                st.partial(mode, m_prev, z_prev, step_len, lo, mlo, zlo);
                if (std::fabs(mlo - mc) <= ctrl.bisect_tol_rel * cr && b > 10) break;
            }
            out.nodes.push_back({mc, zc});
            out.kinds.push_back(kind);
            out.stop = TraceStop::crossed;
            out.m_cross = mc;
            out.z_cross = zc;
            return out;
        }
        if (z >= 1.0 - 1e-9) {  // crept onto the invariant upper boundary
            out.stop = TraceStop::ceiling;
            return out;
        }
        out.nodes.push_back({m, z});
        out.kinds.push_back(kind);

        if (mhat > 0.0 && scaled_dist(m, z, mhat, zhat, cr) < ctrl.guard_radius) {
            out.stop = TraceStop::spiral;
            return out;
        }
        if (m <= m_floor) {
            out.stop = TraceStop::floor;
            return out;
        }
    }
    out.stop = TraceStop::step_limit;
    return out;
}

}  // namespace

Classification classify(double m, double z, const DerivedConstants& k, const MarketParams& p,
                        double guard_radius) {
    const double cr = k.safe_level;
    if (m < -1e-12 * cr || m > cr * (1.0 + 1e-12) || z < -1e-12 || z > 1.0 + 1e-12) {
        throw std::domain_error("classify: point (" + std::to_string(m) + ", " + std::to_string(z) +
                                ") outside [0, c/r] x [0, 1]");
    }
    m = std::clamp(m, 0.0, cr);
    z = std::clamp(z, 0.0, 1.0);
    const double mh = m_hat(k, p);
    const double zh = (mh > 0.0) ? inv_x(mh, k, p) : 1.0;

    Classification res{};
    res.f_sign = 0;
    if (z > 0.0 && z < 1.0 && m < cr) {
        const double g = ode_numerator(m, z, k, p);
        const double h = ode_denominator(m, z, k, p);
        res.f_sign = sign_of(h) * sign_of(g);
    }
    if (scaled_dist(m, z, mh, zh, cr) < guard_radius || scaled_dist(m, z, cr, 0.0, cr) < guard_radius) {
        res.tag = RegionTag::singular_point;
        return res;
    }
    if (z >= 1.0 - 1e-9) {
        res.tag = RegionTag::upper_boundary;
        return res;
    }
    if (m >= cr * (1.0 - 1e-9)) {
        res.tag = RegionTag::right_boundary;
        return res;
    }
    const double zx = inv_x(m, k, p);
    if (std::fabs(z - zx) <= 1e-9) {
        res.tag = (m > mh) ? RegionTag::lower_boundary : RegionTag::left_boundary;
        return res;
    }
    res.tag = (z > zx) ? RegionTag::interior : RegionTag::outside;
    return res;
}

double y_alpha_tilde(double m, double z_of_m, const DerivedConstants& k, const MarketParams& p) {
    const double cr = k.safe_level;
    if (z_of_m <= 0.0) {  // terminal limit z -> 0 as m -> c/r
        return k.b1 / ((k.b1 - 1.0) * (1.0 - p.alpha) * cr);
    }
    DualSlice s(z_of_m, m, k, p);
    return s.y_alpha_m();
}

FreeBoundaryCurve::FreeBoundaryCurve(std::vector<CurveNode> nodes, std::vector<SegmentKind> kinds,
                                     double m_star, double m_hat_value,
                                     const DerivedConstants& k, const MarketParams& p)
    : nodes_(std::move(nodes)), kinds_(std::move(kinds)), m_star_(m_star), m_hat_(m_hat_value),
      k_(k), p_(p) {
    if (nodes_.size() < 2 || kinds_.size() != nodes_.size() - 1) {
        throw std::invalid_argument("FreeBoundaryCurve: inconsistent node/segment arrays");
    }
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (!(nodes_[i].m > nodes_[i - 1].m)) {
            throw std::invalid_argument("FreeBoundaryCurve: nodes must be strictly increasing in m");
        }
    }
}

double FreeBoundaryCurve::slope_z_of_m(const CurveNode& n) const {
    return ode_numerator(n.m, n.z, k_, p_) / ode_denominator(n.m, n.z, k_, p_);
}

double FreeBoundaryCurve::slope_m_of_z(const CurveNode& n) const {
    return ode_denominator(n.m, n.z, k_, p_) / ode_numerator(n.m, n.z, k_, p_);
}

namespace {

double hermite(double x, double x0, double y0, double d0, double x1, double y1, double d1) {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 +
           (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1;
}

}  // namespace

double FreeBoundaryCurve::z(double m) const {
    const double cr = k_.safe_level;
    if (m >= cr) {
        if (m <= cr * (1.0 + 1e-12)) return nodes_.back().z;
        throw std::domain_error("FreeBoundaryCurve::z: m above c/r");
    }
    if (m < nodes_.front().m) {
        if (m >= nodes_.front().m - 1e-12 * cr) return nodes_.front().z;
        throw std::domain_error("FreeBoundaryCurve::z: m=" + std::to_string(m) +
                                " below the curve domain [" + std::to_string(nodes_.front().m) + ", c/r]");
    }
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), m,
                               [](double v, const CurveNode& n) { return v < n.m; });
    std::size_t i = static_cast<std::size_t>(it - nodes_.begin());
    if (i == 0) i = 1;
    if (i >= nodes_.size()) i = nodes_.size() - 1;
    const CurveNode& a = nodes_[i - 1];
    const CurveNode& b = nodes_[i];
    if (m == a.m) return a.z;
    if (m == b.m) return b.z;
    switch (kinds_[i - 1]) {
        case SegmentKind::linear:
            return a.z + (b.z - a.z) * (m - a.m) / (b.m - a.m);
        case SegmentKind::z_of_m:
            return hermite(m, a.m, a.z, slope_z_of_m(a), b.m, b.z, slope_z_of_m(b));
        case SegmentKind::m_of_z: {
            const double da = slope_m_of_z(a), db = slope_m_of_z(b);
            const double zlo = std::min(a.z, b.z), zhi = std::max(a.z, b.z);
            auto f = [&](double zz) { return hermite(zz, a.z, a.m, da, b.z, b.m, db) - m; };
            return brent(f, zlo, zhi, 1e-15);
        }
    }
    throw std::logic_error("FreeBoundaryCurve::z: unreachable");
}

double FreeBoundaryCurve::y_alpha_m(double m) const { return y_alpha_tilde(m, z(m), k_, p_); }

double FreeBoundaryCurve::y_m(double m) const { return z(m) * y_alpha_m(m); }

DualSlice FreeBoundaryCurve::slice(double m) const { return DualSlice(z(m), m, k_, p_); }

void FreeBoundaryCurve::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "m,z,y_m,y_alpha_m\n";
    char buf[128];
    for (const auto& n : nodes_) {
        const double yam = y_alpha_tilde(n.m, n.z, k_, p_);
        const double ym = n.z * yam;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", n.m, n.z, ym, yam);
        out << buf;
    }
}

Trajectory trace_integral_curve(double m0, double z0, const DerivedConstants& k,
                                const MarketParams& p, const StepControl& ctrl) {
    const double mh = m_hat(k, p);
    const double zh = (mh > 0.0) ? inv_x(mh, k, p) : 1.0;
    RawTrace raw = trace_from(m0, z0, k, p, ctrl, mh, zh);
    Trajectory t;
    t.nodes = std::move(raw.nodes);
    t.kinds = std::move(raw.kinds);
    t.crossed = (raw.stop == TraceStop::crossed);
    t.m_cross = raw.m_cross;
    return t;
}

ShootResult shoot(const DerivedConstants& k, const MarketParams& p,
                  const std::vector<double>& eps_list, const StepControl& ctrl) {
    if (eps_list.empty()) throw std::invalid_argument("shoot: empty epsilon list");
    const double cr = k.safe_level;
    const double mh = m_hat(k, p);
    const double zh = (mh > 0.0) ? inv_x(mh, k, p) : 1.0;

    std::vector<double> eps = eps_list;
    std::sort(eps.begin(), eps.end(), std::greater<>());
    ShootDiagnostics diag;
    diag.eps = eps;

    RawTrace final_trace;
    for (double e : eps) {
        if (!(e > 0.0 && e < 1.0)) throw std::invalid_argument("shoot: epsilon must lie in (0,1)");
        RawTrace t = trace_from(cr, e, k, p, ctrl, mh, zh);
        if (t.stop == TraceStop::spiral) {
            throw ShootError("shoot: trajectory entered the guard disc of the interior singular point "
                             "(spiral capture) at eps=" + std::to_string(e), std::move(t.nodes));
        }
        if (t.stop == TraceStop::step_limit) {
            throw ShootError("shoot: step limit exceeded at eps=" + std::to_string(e), std::move(t.nodes));
        }
        if (t.stop == TraceStop::crossed) {
            diag.crossings.push_back(t.m_cross);
        } else if (p.alpha > 0.0) {
            throw ShootError("shoot: no crossing of z = 1/x(m) before the domain floor at eps=" +
                             std::to_string(e), std::move(t.nodes));
        }
        final_trace = std::move(t);
    }

    if (diag.crossings.size() >= 2) {
        const double a = diag.crossings[diag.crossings.size() - 2];
        const double b = diag.crossings.back();
        if (std::fabs(a - b) > 1e-4 * cr) {
            throw ShootError("shoot: epsilon sweep inconsistent (crossings " + std::to_string(a) +
                             " and " + std::to_string(b) + " differ by more than 1e-4*c/r)",
                             std::move(final_trace.nodes));
        }
    }
    if (diag.crossings.size() >= 3) {
        const std::size_t n = diag.crossings.size();
        const double d1 = diag.crossings[n - 2] - diag.crossings[n - 3];
        const double d2 = diag.crossings[n - 1] - diag.crossings[n - 2];
        const double den = d2 - d1;
        diag.aitken = (std::fabs(den) > 1e-30) ? diag.crossings[n - 3] - d1 * d1 / den
                                               : diag.crossings.back();
    } else if (!diag.crossings.empty()) {
        diag.aitken = diag.crossings.back();
    }
    diag.steps = final_trace.nodes.size();

    // Assemble the curve from the smallest-eps trajectory: ascending in m,
    // crossing node snapped onto z = 1/x(m*), launch node replaced by the
    // extrapolated terminal value z(c/r) = 0.
    std::vector<CurveNode> raw_nodes(final_trace.nodes.rbegin(), final_trace.nodes.rend());
    std::vector<FreeBoundaryCurve::SegmentKind> raw_kinds(final_trace.kinds.rbegin(),
                                                          final_trace.kinds.rend());
    // Drop nodes whose m-advance is below resolution (degenerate Abel steps).
    std::vector<CurveNode> nodes;
    std::vector<FreeBoundaryCurve::SegmentKind> kinds;
    nodes.reserve(raw_nodes.size());
    kinds.reserve(raw_kinds.size());
    nodes.push_back(raw_nodes.front());
    for (std::size_t i = 1; i < raw_nodes.size(); ++i) {
        const bool last = (i + 1 == raw_nodes.size());
        if (raw_nodes[i].m > nodes.back().m + 1e-14 * cr) {
            nodes.push_back(raw_nodes[i]);
            kinds.push_back(raw_kinds[i - 1]);
        } else if (last && nodes.size() >= 2) {
            nodes.back() = raw_nodes[i];  // keep the endpoint
        }
    }
    if (nodes.size() < 2) {
        throw ShootError("shoot: degenerate trajectory", std::move(raw_nodes));
    }
    double m_star = 0.0;
    if (!diag.crossings.empty()) {
        m_star = diag.crossings.back();
        nodes.front().z = inv_x(nodes.front().m, k, p);
    }
    nodes.back() = CurveNode{cr, 0.0};
    if (!kinds.empty()) kinds.back() = FreeBoundaryCurve::SegmentKind::linear;

    return ShootResult{FreeBoundaryCurve(std::move(nodes), std::move(kinds), m_star, mh, k, p),
                       diag};
}

}  // namespace drawdown
