#pragma once

#include <memory>
#include <vector>

#include "drawdown/free_boundary.hpp"
#include "drawdown/market.hpp"

namespace drawdown {

enum class Regime { above_safe, free_boundary, restricted };

const char* regime_name(Regime r);

struct Evaluation {
    double phi;
    double pi;
    double y;  // dual variable (0 in the closed-form regime, where none is used)
    Regime regime;
};

// The glued minimum drawdown probability phi(w, m) and optimal strategy
// pi*(w, m) across the three regimes:
//   m >= c/r          closed form,
//   m* <= m < c/r     dual of the free-boundary construction z(m),
//   0 < m < m*        dual of the controller-stopper value.
// Immutable after construction; concurrent evaluation is safe and
// bit-deterministic.
class ValueSurface {
  public:
    ValueSurface(const MarketParams& p, const std::vector<double>& eps_list = {1e-3, 1e-4, 1e-5},
                 const StepControl& ctrl = {});

    const MarketParams& params() const { return p_; }
    const DerivedConstants& constants() const { return k_; }
    const FreeBoundaryCurve& curve() const { return *curve_; }
    const ShootDiagnostics& shoot_diagnostics() const { return diag_; }
    double m_star() const { return m_star_; }
    double m_hat_value() const { return m_hat_; }

    Regime regime(double m) const;

    double phi(double w, double m) const;
    double pi_star(double w, double m) const;
    // Dual variable y solving the inversion for the current regime;
    // defined for m < c/r.
    double invert_dual(double w, double m) const;
    Evaluation evaluate(double w, double m) const;

    // Analytic derivatives of phi in w (m < c/r regimes and interior w);
    // used by the verification suite.
    double phi_w(double w, double m) const;
    double phi_ww(double w, double m) const;

    // eta(m) = 1/x(m) on [0, m*], z(m) on [m*, c/r].
    double eta(double m) const;

  private:
    void check_domain(double& w, double& m) const;

    MarketParams p_;
    DerivedConstants k_;
    double m_star_, m_hat_;
    std::shared_ptr<const FreeBoundaryCurve> curve_;
    ShootDiagnostics diag_;
};

}  // namespace drawdown
