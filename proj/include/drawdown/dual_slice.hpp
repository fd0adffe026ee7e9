#pragma once

#include "drawdown/market.hpp"

namespace drawdown {

// Closed-form machinery for one value of the high-water mark m.
//
// Every regime below the safe level is described by the pair
// (eta, y_alpha_m): eta in (0,1] is the ratio y_m/y_alpha_m of the dual
// boundaries and y_alpha_m the upper one. Given eta the slice evaluates
// the primal value phi, the wealth map w(Y), the strategy pi, and the
// w-derivatives of phi at any Y = y/y_alpha_m in [eta, 1].
//
// The coefficients are computed in a cancellation-free grouping:
//   A_i = B_i (u - q z^{B_i - 1}) / (K3 (z^{B1-1} - z^{B2-1})),
// u = c/r - m, q = c/r - alpha m, K3 = B1 B2/(B1 - B2), which stays
// accurate as z -> 0 (m -> c/r) where the naive forms lose all digits.
class DualSlice {
  public:
    DualSlice(double eta, double m, const DerivedConstants& k, const MarketParams& p);

    double m_value() const { return m_; }
    double eta() const { return eta_; }
    double y_alpha_m() const { return y_alpha_m_; }
    double y_m() const { return eta_ * y_alpha_m_; }

    // Primal value at dual ratio Y in [eta, 1].
    double phi(double Y) const;
    // Wealth corresponding to Y; w(1) = alpha m and w(eta) = m up to the
    // accuracy of eta itself.
    double wealth(double Y) const;
    // Dollar amount in the risky asset at dual ratio Y.
    double pi(double Y) const;
    // Analytic derivatives of phi with respect to w, at dual ratio Y.
    double phi_w(double Y) const;
    double phi_ww(double Y) const;

    // Solves wealth(Y) = w on [eta, 1]. Monotone bracket; ties at the
    // endpoints resolve to the endpoint. Inputs within 1e-12 relative
    // outside [w(1), w(eta)] clamp to the nearest endpoint.
    double invert(double w) const;

  private:
    double m_, eta_;
    double b1_, b2_, cr_;
    double merton_;
    double a1_, a2_;          // bracket coefficients
    double p1_, p2_;          // phi(Y) = p1 Y^B1 + p2 Y^B2
    double y_alpha_m_;
    double w_lo_, w_hi_;      // wealth(1), wealth(eta)
};

}  // namespace drawdown
