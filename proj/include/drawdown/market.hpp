#pragma once

#include <string>

namespace drawdown {

// Model primitives. All rates are per year, alpha is the drawdown fraction.
struct MarketParams {
    double mu;     // drift of the risky asset
    double sigma;  // volatility
    double r;      // riskless rate
    double c;      // consumption rate (currency per year)
    double lam;    // hazard rate
    double alpha;  // drawdown fraction, in [0, 1)

    double safe_level() const { return c / r; }
    double merton_ratio() const { return (mu - r) / (sigma * sigma); }
};

// Constants derived from MarketParams. gamma > 1, b1 > 1, b2 < 0,
// and b1 = gamma/(gamma-1).
struct DerivedConstants {
    double delta;
    double gamma;
    double b1;
    double b2;
    double safe_level;
};

// Throws std::invalid_argument naming the violated bound.
void validate(const MarketParams& p);

DerivedConstants derive_constants(const MarketParams& p);

// JSON schema: {"mu":f,"sigma":f,"r":f,"c":f,"lambda":f,"alpha":f}.
// Field names exact, all required, no extras.
MarketParams params_from_json(const std::string& text);
std::string params_to_json(const MarketParams& p);

}  // namespace drawdown
