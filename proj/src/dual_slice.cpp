#include "drawdown/dual_slice.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "drawdown/root_find.hpp"

namespace drawdown {

DualSlice::DualSlice(double eta, double m, const DerivedConstants& k, const MarketParams& p)
    : m_(m), eta_(eta), b1_(k.b1), b2_(k.b2), cr_(k.safe_level), merton_(p.merton_ratio()) {
    const double cr = k.safe_level;
    if (!(eta > 0.0 && eta <= 1.0)) {
        throw std::domain_error("DualSlice: eta=" + std::to_string(eta) + " outside (0,1]");
    }
    if (!(m > 0.0 && m <= cr * (1.0 + 1e-12))) {
        throw std::domain_error("DualSlice: m=" + std::to_string(m) + " outside (0, c/r]");
    }
    const double u = std::max(cr - m, 0.0);
    const double q = cr - p.alpha * m;
    const double bd = b1_ - b2_;
    const double k3 = b1_ * b2_ / bd;
    const double za = std::pow(eta, b1_ - 1.0);
    const double zb = std::pow(eta, b2_ - 1.0);
    const double den = k3 * (za - zb);  // > 0 for eta < 1
    if (!(den > 0.0) || !std::isfinite(den)) {
        throw std::domain_error("DualSlice: degenerate dual ratio eta=" + std::to_string(eta));
    }
    a1_ = b2_ * (u - q * zb) / den;
    a2_ = b1_ * (u - q * za) / den;
    const double k1 = b1_ * (1.0 - b2_) / bd;
    const double k2 = b2_ * (b1_ - 1.0) / bd;
    const double inv_yam = (u - q * (k1 * za + k2 * zb)) / den;
    if (!(inv_yam > 0.0)) {
        throw SolverError("DualSlice: nonpositive dual boundary at m=" + std::to_string(m) +
                          ", eta=" + std::to_string(eta) + " (inconsistent curve)");
    }
    y_alpha_m_ = 1.0 / inv_yam;
    p1_ = (b1_ - 1.0) / bd * y_alpha_m_ * a1_;
    p2_ = (1.0 - b2_) / bd * y_alpha_m_ * a2_;
    w_lo_ = p.alpha * m;        // wealth(1), exact by construction
    w_hi_ = wealth(eta);        // equals m up to the accuracy of eta
}

double DualSlice::phi(double Y) const {
    return p1_ * std::pow(Y, b1_) + p2_ * std::pow(Y, b2_);
}

double DualSlice::wealth(double Y) const {
    const double bd = b1_ - b2_;
    const double cw = (b1_ * a1_ * std::pow(Y, b1_ - 1.0) - b2_ * a2_ * std::pow(Y, b2_ - 1.0)) / bd;
    return cr_ - cw;
}

double DualSlice::pi(double Y) const {
    const double bd = b1_ - b2_;
    return merton_ * (b1_ * (b1_ - 1.0) * a1_ * std::pow(Y, b1_ - 1.0) +
                      b2_ * (1.0 - b2_) * a2_ * std::pow(Y, b2_ - 1.0)) / bd;
}

double DualSlice::phi_w(double Y) const { return -y_alpha_m_ * Y; }

double DualSlice::phi_ww(double Y) const {
    const double y = y_alpha_m_ * Y;
    const double denom = b1_ * p1_ * std::pow(Y, b1_) + b2_ * p2_ * std::pow(Y, b2_);
    return y * y / denom;
}

double DualSlice::invert(double w) const {
    const double pad = 1e-12 * (std::fabs(w_hi_) + std::fabs(w_lo_) + 1.0);
    if (w > w_hi_ + pad || w < w_lo_ - pad) {
        throw std::domain_error("DualSlice::invert: w=" + std::to_string(w) + " outside [" +
                                std::to_string(w_lo_) + ", " + std::to_string(w_hi_) + "]");
    }
    if (w >= w_hi_) return eta_;
    if (w <= w_lo_) return 1.0;
    auto f = [this, w](double Y) { return wealth(Y) - w; };
    return brent(f, eta_, 1.0, w_hi_ - w, w_lo_ - w, 1e-16);
}

}  // namespace drawdown
