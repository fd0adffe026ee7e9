#include "drawdown/controller_stopper.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "drawdown/root_find.hpp"

namespace drawdown {

namespace {

double x_residual(double x, double m, const DerivedConstants& k, const MarketParams& p) {
    const double cr = k.safe_level;
    const double bd = k.b1 - k.b2;
    return (cr - m) * ((1.0 - k.b2) / bd * std::pow(x, k.b1 - 1.0) +
                       (k.b1 - 1.0) / bd * std::pow(x, k.b2 - 1.0)) - (cr - p.alpha * m);
}

void check_band(double y, const DualBoundaries& b, const char* who) {
    const double pad = 1e-12 * b.y_alpha_m;
    if (y < b.y_m - pad || y > b.y_alpha_m + pad) {
        throw std::domain_error(std::string(who) + ": y=" + std::to_string(y) + " outside [" +
                                std::to_string(b.y_m) + ", " + std::to_string(b.y_alpha_m) + "]");
    }
}

}  // namespace

double solve_x(double m, const DerivedConstants& k, const MarketParams& p) {
    const double cr = k.safe_level;
    if (!(m >= 0.0 && m < cr)) {
        throw std::domain_error("solve_x: m=" + std::to_string(m) + " outside [0, c/r)");
    }
    if (m == 0.0) return 1.0;
    auto f = [&](double x) { return x_residual(x, m, k, p); };
    const double f1 = f(1.0);  // = m*(alpha-1) < 0
    double hi = 2.0, fhi = f(hi);
    int doublings = 0;
    while (fhi < 0.0) {
        hi *= 2.0;
        fhi = f(hi);
        if (++doublings > 1100) {
            throw SolverError("solve_x: bracket doubling failed at m=" + std::to_string(m));
        }
    }
    const double x = brent(f, 1.0, hi, f1, fhi, 1e-15);
    const double resid = std::fabs(f(x)) / (cr - p.alpha * m);
    if (resid > 1e-12) {
        throw SolverError("solve_x: residual " + std::to_string(resid) + " above 1e-12 at m=" + std::to_string(m));
    }
    return x;
}

double m_hat(const DerivedConstants& k, const MarketParams& p) {
    if (p.alpha == 0.0) return 0.0;
    const double cr = k.safe_level;
    auto g = [&](double m) {
        const double q = cr * (1.0 - p.alpha) / (cr - m);
        const double lhs = std::pow(p.alpha * k.b1 + q, 1.0 / (k.b1 - 1.0));
        const double rhs = std::pow(p.alpha * k.b2 + q, -1.0 / (1.0 - k.b2));
        return lhs - rhs;
    };
    const double L = cr * (1.0 + (1.0 - p.alpha) / (p.alpha * k.b2));
    const double lo = std::max(0.0, L) + 1e-9 * cr;
    const double hi = cr * (1.0 - 1e-12);
    return brent(g, lo, hi, 1e-15);
}

DualBoundaries y_boundaries(double m, const DerivedConstants& k, const MarketParams& p) {
    const double cr = k.safe_level;
    if (!(m > 0.0 && m < cr)) {
        throw std::domain_error("y_boundaries: m=" + std::to_string(m) + " outside (0, c/r)");
    }
    const double x = solve_x(m, k, p);
    DualSlice s(1.0 / x, m, k, p);
    return DualBoundaries{s.y_m(), s.y_alpha_m(), x};
}

double phi_hat(double y, double m, const DerivedConstants& k, const MarketParams& p) {
    const auto b = y_boundaries(m, k, p);
    check_band(y, b, "phi_hat");
    const double cr = k.safe_level;
    const double q = cr - p.alpha * m;
    const double bd = k.b1 - k.b2;
    const double yam = b.y_alpha_m;
    const double d1 = -(k.b2 / bd) * std::pow(yam, -k.b1) - (1.0 - k.b2) / bd * q * std::pow(yam, 1.0 - k.b1);
    const double d2 = (k.b1 / bd) * std::pow(yam, -k.b2) - (k.b1 - 1.0) / bd * q * std::pow(yam, 1.0 - k.b2);
    return d1 * std::pow(y, k.b1) + d2 * std::pow(y, k.b2) + cr * y;
}

double phi_hat_y(double y, double m, const DerivedConstants& k, const MarketParams& p) {
    const auto b = y_boundaries(m, k, p);
    check_band(y, b, "phi_hat_y");
    const double cr = k.safe_level;
    const double bd = k.b1 - k.b2;
    const double v = y / b.y_m;
    return cr - (cr - m) * ((1.0 - k.b2) / bd * std::pow(v, k.b1 - 1.0) +
                            (k.b1 - 1.0) / bd * std::pow(v, k.b2 - 1.0));
}

double phi_hat_yy(double y, double m, const DerivedConstants& k, const MarketParams& p) {
    const auto b = y_boundaries(m, k, p);
    check_band(y, b, "phi_hat_yy");
    const double cr = k.safe_level;
    const double bd = k.b1 - k.b2;
    const double v = y / b.y_m;
    return -(cr - m) * (k.b1 - 1.0) * (1.0 - k.b2) / (bd * b.y_m) *
           (std::pow(v, k.b1 - 2.0) - std::pow(v, k.b2 - 2.0));
}

double phi_hat_extended(double y, double m, const DerivedConstants& k, const MarketParams& p) {
    const auto b = y_boundaries(m, k, p);
    if (y >= b.y_alpha_m) return 1.0 + p.alpha * m * y;
    if (y <= b.y_m) return phi_hat(b.y_m, m, k, p) - m * (b.y_m - y);
    return phi_hat(y, m, k, p);
}

namespace {

// Shared inversion: the dual variable solving phi_hat_y(y, m) = w.
double invert_hat(double w, double m, const DualBoundaries& b,
                  const DerivedConstants& k, const MarketParams& p) {
    const double lo = p.alpha * m, hi = m;
    const double pad = 1e-12 * (std::fabs(hi) + 1.0);
    if (w < lo - pad || w > hi + pad) {
        throw std::domain_error("restricted regime: w=" + std::to_string(w) + " outside [" +
                                std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    if (w >= hi) return b.y_m;
    if (w <= lo) return b.y_alpha_m;
    auto f = [&](double y) { return phi_hat_y(y, m, k, p) - w; };
    return brent(f, b.y_m, b.y_alpha_m, m - w, p.alpha * m - w, 1e-16);
}

}  // namespace

double legendre_phi(double w, double m, const DerivedConstants& k, const MarketParams& p) {
    const auto b = y_boundaries(m, k, p);
    const double y = invert_hat(w, m, b, k, p);
    return phi_hat(y, m, k, p) - w * y;
}

double pi_star_restricted(double w, double m, const DerivedConstants& k, const MarketParams& p) {
    const auto b = y_boundaries(m, k, p);
    const double y = invert_hat(w, m, b, k, p);
    return -p.merton_ratio() * y * phi_hat_yy(y, m, k, p);
}

double dual_variable_restricted(double w, double m, const DerivedConstants& k, const MarketParams& p) {
    const auto b = y_boundaries(m, k, p);
    return invert_hat(w, m, b, k, p);
}

DualSlice restricted_slice(double m, const DerivedConstants& k, const MarketParams& p) {
    return DualSlice(1.0 / solve_x(m, k, p), m, k, p);
}

}  // namespace drawdown
