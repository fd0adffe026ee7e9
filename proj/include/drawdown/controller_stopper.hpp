#pragma once

#include "drawdown/dual_slice.hpp"
#include "drawdown/market.hpp"

namespace drawdown {

// Closed-form dual machinery for the regime in which the maximum is not
// allowed to grow (0 < m <= m*): the boundary ratio x(m), the critical
// constant m_hat, the dual free boundaries, the dual value phi_hat and
// its Legendre transform Phi with the associated strategy.

struct DualBoundaries {
    double y_m;         // lower dual boundary
    double y_alpha_m;   // upper dual boundary
    double x;           // ratio y_alpha_m / y_m, > 1 for m > 0
};

// Unique x >= 1 with
//   (c/r - m) [ (1-B2)/(B1-B2) x^{B1-1} + (B1-1)/(B1-B2) x^{B2-1} ] = c/r - alpha m,
// solved to 1e-12 relative residual. Increasing in m; x(0) = 1.
double solve_x(double m, const DerivedConstants& k, const MarketParams& p);

// Unique root m_hat of
//   [alpha B1 + q]^{1/(B1-1)} = [alpha B2 + q]^{-1/(1-B2)},  q = (c/r)(1-alpha)/(c/r - m),
// in ((c/r)(1 + (1-alpha)/(alpha B2))_+, c/r). Returns 0 for alpha = 0,
// where the bracket degenerates and the restricted regime is empty.
double m_hat(const DerivedConstants& k, const MarketParams& p);

DualBoundaries y_boundaries(double m, const DerivedConstants& k, const MarketParams& p);

// Dual value of the controller-stopper game and its y-derivatives, valid
// for y in [y_m(m), y_alpha_m(m)]; y outside the band is rejected.
double phi_hat(double y, double m, const DerivedConstants& k, const MarketParams& p);
double phi_hat_y(double y, double m, const DerivedConstants& k, const MarketParams& p);
double phi_hat_yy(double y, double m, const DerivedConstants& k, const MarketParams& p);

// Linear/affine continuations outside the band: 1 + alpha m y above
// y_alpha_m, slope-m affine below y_m.
double phi_hat_extended(double y, double m, const DerivedConstants& k, const MarketParams& p);

// Legendre transform Phi(w,m) = max_y (phi_hat - w y) for alpha m <= w <= m,
// plus the restricted strategy and the maximizing dual variable.
double legendre_phi(double w, double m, const DerivedConstants& k, const MarketParams& p);
double pi_star_restricted(double w, double m, const DerivedConstants& k, const MarketParams& p);
double dual_variable_restricted(double w, double m, const DerivedConstants& k, const MarketParams& p);

// The slice view of this regime (eta = 1/x(m)); used by the value surface.
DualSlice restricted_slice(double m, const DerivedConstants& k, const MarketParams& p);

}  // namespace drawdown
