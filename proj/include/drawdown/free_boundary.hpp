#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "drawdown/dual_slice.hpp"
#include "drawdown/market.hpp"
#include "drawdown/root_find.hpp"

namespace drawdown {

// The singular first-order ODE z'(m) = G(m,z)/H(m,z) whose solution with
// z(c/r) = 0 pins the free boundary for m* <= m < c/r, together with the
// domain geometry needed to integrate it: the coefficient functions, the
// sign structure of F = H/G, and the two singular points.

struct OdeCoefficients {
    double g0, g1, h0, h1, h2;
};

OdeCoefficients ode_coefficients(double z, const DerivedConstants& k, const MarketParams& p);

// Numerator G = g1*(c/r - m) + g0 and denominator H = h0 + u*(h1 + u*h2),
// u = c/r - m, evaluated with Horner grouping in u.
double ode_numerator(double m, double z, const DerivedConstants& k, const MarketParams& p);
double ode_denominator(double m, double z, const DerivedConstants& k, const MarketParams& p);

// Zero set of G: the curve m = xi(z) = g0(z)/g1(z) + c/r.
double xi_curve(double z, const DerivedConstants& k, const MarketParams& p);

// Raised when one form of the ODE degenerates and the caller should
// integrate the other form.
struct FormSwitch : SolverError {
    using SolverError::SolverError;
};

// dz/dm; signals FormSwitch when |H| falls below 1e-14 of its term scale.
double ode_rhs(double m, double z, const DerivedConstants& k, const MarketParams& p);
// dm/dz; signals FormSwitch when |G| falls below 1e-14 of its term scale.
double abel_rhs(double z, double m, const DerivedConstants& k, const MarketParams& p);

enum class RegionTag {
    interior,
    upper_boundary,    // z = 1
    lower_boundary,    // z = 1/x(m), m > m_hat
    left_boundary,     // z = 1/x(m), m <= m_hat
    right_boundary,    // m = c/r
    singular_point,    // within the guard disc of (m_hat, 1/x(m_hat)) or (c/r, 0)
    outside,           // z < 1/x(m)
};

struct Classification {
    RegionTag tag;
    int f_sign;  // sign of F = H/G; 0 on the zero sets
};

Classification classify(double m, double z, const DerivedConstants& k, const MarketParams& p,
                        double guard_radius = 1e-3);

// Integration controls for shoot(). Distances in m are relative to c/r.
struct StepControl {
    double rtol = 1e-10;
    double atol = 1e-14;
    double h_init = 1e-8;
    double max_m_step_rel = 2e-3;   // cap on |dm| per step, relative to c/r
    double max_z_step = 1e-2;       // cap on |dz| per step in the Abel form
    double switch_hi = 1e3;         // z-form -> Abel when |dz/dm| exceeds this
    double switch_lo = 5e2;         // Abel -> z-form below this (hysteresis 2)
    double guard_radius = 1e-3;     // scaled guard disc around the singular points
    double bisect_tol_rel = 1e-10;  // crossing tolerance in m, relative to c/r
    std::size_t max_steps = 400000;
};

struct CurveNode {
    double m, z;
};

// The computed boundary ratio z(m) on [m*, c/r], stored as the pasted
// z-form / Abel-form trajectory with exact slopes at the nodes.
class FreeBoundaryCurve {
  public:
    enum class SegmentKind { z_of_m, m_of_z, linear };

    FreeBoundaryCurve(std::vector<CurveNode> nodes, std::vector<SegmentKind> kinds,
                      double m_star, double m_hat_value,
                      const DerivedConstants& k, const MarketParams& p);

    double m_star() const { return m_star_; }
    double m_hat_value() const { return m_hat_; }
    double m_min() const { return nodes_.front().m; }
    double z_star() const { return nodes_.front().z; }

    // Interpolated z(m) on [m_star, c/r].
    double z(double m) const;
    // Dual boundaries along the curve, from z(m).
    double y_alpha_m(double m) const;
    double y_m(double m) const;
    DualSlice slice(double m) const;

    const std::vector<CurveNode>& nodes() const { return nodes_; }

    // CSV with header "m,z,y_m,y_alpha_m", 17 significant digits per field.
    void write_csv(const std::string& path) const;

  private:
    double slope_z_of_m(const CurveNode& n) const;
    double slope_m_of_z(const CurveNode& n) const;

    std::vector<CurveNode> nodes_;        // ascending in m
    std::vector<SegmentKind> kinds_;      // kinds_[i] covers nodes_[i]..nodes_[i+1]
    double m_star_, m_hat_;
    DerivedConstants k_;
    MarketParams p_;
};

struct ShootDiagnostics {
    std::vector<double> eps;        // the epsilon sweep, descending
    std::vector<double> crossings;  // boundary crossing per epsilon
    double aitken = 0.0;            // extrapolated crossing (0 if unavailable)
    std::size_t steps = 0;          // accepted steps of the final trajectory
};

struct ShootResult {
    FreeBoundaryCurve curve;
    ShootDiagnostics diagnostics;
};

// Carries the partial trajectory when integration fails (spiral capture,
// step limit, or inconsistent epsilon sweep).
struct ShootError : SolverError {
    ShootError(const std::string& msg, std::vector<CurveNode> trajectory)
        : SolverError(msg), trajectory(std::move(trajectory)) {}
    std::vector<CurveNode> trajectory;
};

// Integrates backward from (c/r, eps) for each eps, switching between the
// z-form and the Abel form, locates the crossing of z = 1/x(m) by sign
// change of e(m) = z(m) - 1/x(m) refined by bisection, checks the sweep
// for consistency, and assembles the curve from the smallest-eps run.
// For alpha = 0 no crossing exists; the curve then spans (0, c/r] and
// m_star is reported as 0.
ShootResult shoot(const DerivedConstants& k, const MarketParams& p,
                  const std::vector<double>& eps_list = {1e-3, 1e-4, 1e-5},
                  const StepControl& ctrl = {});

// A single trajectory of the same ODE launched from (m0, z0), integrated
// leftward until it crosses z = 1/x(m) (returns the crossing) or exits.
// Used for the comparison curves and the integral-curve figure.
struct Trajectory {
    std::vector<CurveNode> nodes;     // in integration order (m decreasing)
    std::vector<FreeBoundaryCurve::SegmentKind> kinds;
    bool crossed = false;
    double m_cross = 0.0;
};

Trajectory trace_integral_curve(double m0, double z0, const DerivedConstants& k,
                                const MarketParams& p, const StepControl& ctrl = {});

// The free boundary y_alpha_m(m) given z(m); standalone form used by the
// curve and by tests. Signals SolverError on a nonpositive result.
double y_alpha_tilde(double m, double z_of_m, const DerivedConstants& k, const MarketParams& p);

}  // namespace drawdown
