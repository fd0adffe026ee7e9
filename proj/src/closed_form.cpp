#include "drawdown/closed_form.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace drawdown {

namespace {

void check_domain(double w, double m, const DerivedConstants& k, const MarketParams& p) {
    const double cr = k.safe_level;
    if (!(m >= cr)) {
        throw std::domain_error("phi_above_safe: m=" + std::to_string(m) +
                                " violates m >= c/r=" + std::to_string(cr));
    }
    const double lo = p.alpha * m;
    if (w < lo - 1e-12 * cr) {
        throw std::domain_error("phi_above_safe: w=" + std::to_string(w) +
                                " below the drawdown level alpha*m=" + std::to_string(lo));
    }
    if (w > cr * (1.0 + 1e-12)) {
        throw std::domain_error("phi_above_safe: w=" + std::to_string(w) +
                                " above the safe level c/r=" + std::to_string(cr));
    }
}

}  // namespace

double phi_above_safe(double w, double m, const DerivedConstants& k, const MarketParams& p) {
    check_domain(w, m, k, p);
    const double cr = k.safe_level;
    if (w >= cr) return 0.0;  // clamp round-off from callers
    const double lo = p.alpha * m;
    if (w <= lo) return 1.0;
    return std::pow((cr - w) / (cr - lo), k.gamma);
}

double phi_above_safe_dw(double w, double m, const DerivedConstants& k, const MarketParams& p) {
    check_domain(w, m, k, p);
    const double cr = k.safe_level;
    if (w >= cr) return 0.0;
    const double span = cr - p.alpha * m;
    return -k.gamma / span * std::pow((cr - w) / span, k.gamma - 1.0);
}

double phi_above_safe_dww(double w, double m, const DerivedConstants& k, const MarketParams& p) {
    check_domain(w, m, k, p);
    const double cr = k.safe_level;
    if (w >= cr) return 0.0;
    const double span = cr - p.alpha * m;
    return k.gamma * (k.gamma - 1.0) / (span * span) * std::pow((cr - w) / span, k.gamma - 2.0);
}

double pi_ruin(double w, const DerivedConstants& k, const MarketParams& p) {
    const double cr = k.safe_level;
    if (w > cr * (1.0 + 1e-12)) {
        throw std::domain_error("pi_ruin: w=" + std::to_string(w) + " above the safe level");
    }
    if (w >= cr) return 0.0;
    return p.merton_ratio() / (k.gamma - 1.0) * (cr - w);
}

}  // namespace drawdown
