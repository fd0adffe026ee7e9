#include "drawdown/value_surface.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "drawdown/closed_form.hpp"
#include "drawdown/controller_stopper.hpp"

namespace drawdown {

const char* regime_name(Regime r) {
    switch (r) {
        case Regime::above_safe: return "above_safe";
        case Regime::free_boundary: return "free_boundary";
        case Regime::restricted: return "restricted";
    }
    return "?";
}

ValueSurface::ValueSurface(const MarketParams& p, const std::vector<double>& eps_list,
                           const StepControl& ctrl)
    : p_(p), k_(derive_constants(p)) {
    ShootResult res = shoot(k_, p_, eps_list, ctrl);
    m_star_ = res.curve.m_star();
    m_hat_ = res.curve.m_hat_value();
    diag_ = res.diagnostics;
    curve_ = std::make_shared<const FreeBoundaryCurve>(std::move(res.curve));
}

void ValueSurface::check_domain(double& w, double& m) const {
    const double cr = k_.safe_level;
    if (!(m > 0.0) || !std::isfinite(m) || !std::isfinite(w)) {
        throw std::domain_error("ValueSurface: require m > 0 and finite (w, m)");
    }
    const double hi = std::min(m, cr);
    const double lo = p_.alpha * m;
    const double pad = 1e-12 * cr;
    if (w < lo - pad || w > hi + pad) {
        throw std::domain_error("ValueSurface: w=" + std::to_string(w) + " outside [alpha*m, min(m, c/r)] = [" +
                                std::to_string(lo) + ", " + std::to_string(hi) + "] at m=" + std::to_string(m));
    }
    w = std::clamp(w, lo, hi);
}

Regime ValueSurface::regime(double m) const {
    const double cr = k_.safe_level;
    if (m >= cr) return Regime::above_safe;
    if (p_.alpha == 0.0) return Regime::free_boundary;  // ruin problem: the maximum always grows
    return (m >= m_star_) ? Regime::free_boundary : Regime::restricted;
}

double ValueSurface::eta(double m) const {
    if (p_.alpha > 0.0 && m <= m_star_) return 1.0 / solve_x(m, k_, p_);
    return curve_->z(std::min(m, k_.safe_level));
}

double ValueSurface::phi(double w, double m) const {
    check_domain(w, m);
    switch (regime(m)) {
        case Regime::above_safe:
            return phi_above_safe(w, m, k_, p_);
        case Regime::free_boundary: {
            const DualSlice s = curve_->slice(m);
            return s.phi(s.invert(w));
        }
        case Regime::restricted:
            return legendre_phi(w, m, k_, p_);
    }
    throw std::logic_error("unreachable");
}

double ValueSurface::pi_star(double w, double m) const {
    check_domain(w, m);
    switch (regime(m)) {
        case Regime::above_safe:
            return pi_ruin(w, k_, p_);
        case Regime::free_boundary: {
            const DualSlice s = curve_->slice(m);
            return s.pi(s.invert(w));
        }
        case Regime::restricted:
            return pi_star_restricted(w, m, k_, p_);
    }
    throw std::logic_error("unreachable");
}

double ValueSurface::invert_dual(double w, double m) const {
    check_domain(w, m);
    switch (regime(m)) {
        case Regime::above_safe:
            throw std::domain_error("invert_dual: no dual variable in the closed-form regime (m >= c/r)");
        case Regime::free_boundary: {
            const DualSlice s = curve_->slice(m);
            return s.y_alpha_m() * s.invert(w);
        }
        case Regime::restricted:
            return dual_variable_restricted(w, m, k_, p_);
    }
    throw std::logic_error("unreachable");
}

Evaluation ValueSurface::evaluate(double w, double m) const {
    check_domain(w, m);
    Evaluation e{};
    e.regime = regime(m);
    switch (e.regime) {
        case Regime::above_safe:
            e.phi = phi_above_safe(w, m, k_, p_);
            e.pi = pi_ruin(w, k_, p_);
            e.y = 0.0;
            break;
        case Regime::free_boundary: {
            const DualSlice s = curve_->slice(m);
            const double Y = s.invert(w);
            e.phi = s.phi(Y);
            e.pi = s.pi(Y);
            e.y = s.y_alpha_m() * Y;
            break;
        }
        case Regime::restricted: {
            const double y = dual_variable_restricted(w, m, k_, p_);
            e.phi = phi_hat(y, m, k_, p_) - w * y;
            e.pi = -p_.merton_ratio() * y * phi_hat_yy(y, m, k_, p_);
            e.y = y;
            break;
        }
    }
    return e;
}

double ValueSurface::phi_w(double w, double m) const {
    check_domain(w, m);
    switch (regime(m)) {
        case Regime::above_safe:
            return phi_above_safe_dw(w, m, k_, p_);
        case Regime::free_boundary: {
            const DualSlice s = curve_->slice(m);
            return s.phi_w(s.invert(w));
        }
        case Regime::restricted:
            return -dual_variable_restricted(w, m, k_, p_);
    }
    throw std::logic_error("unreachable");
}

double ValueSurface::phi_ww(double w, double m) const {
    check_domain(w, m);
    switch (regime(m)) {
        case Regime::above_safe:
            return phi_above_safe_dww(w, m, k_, p_);
        case Regime::free_boundary: {
            const DualSlice s = curve_->slice(m);
            return s.phi_ww(s.invert(w));
        }
        case Regime::restricted: {
            const double y = dual_variable_restricted(w, m, k_, p_);
            return -1.0 / phi_hat_yy(y, m, k_, p_);
        }
    }
    throw std::logic_error("unreachable");
}

}  // namespace drawdown
