#pragma once

#include "drawdown/market.hpp"

namespace drawdown {

// Value and strategy for the regime m >= c/r, where the drawdown level
// alpha*m acts as a fixed ruin level. Also covers the alpha = 0 lifetime
// ruin problem for any m.

// phi(w, m) = ((c/r - w)/(c/r - alpha m))^gamma on alpha*m <= w <= c/r.
// Values of w within 1e-12 relative above c/r clamp to 0.
double phi_above_safe(double w, double m, const DerivedConstants& k, const MarketParams& p);

// Analytic w-derivatives of phi_above_safe, for the verification suite.
double phi_above_safe_dw(double w, double m, const DerivedConstants& k, const MarketParams& p);
double phi_above_safe_dww(double w, double m, const DerivedConstants& k, const MarketParams& p);

// pi(w) = (mu-r)/sigma^2 * 1/(gamma-1) * (c/r - w), zero at the safe level.
double pi_ruin(double w, const DerivedConstants& k, const MarketParams& p);

}  // namespace drawdown
