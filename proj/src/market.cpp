#include "drawdown/market.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace drawdown {

void validate(const MarketParams& p) {
    auto fail = [](const std::string& msg) { throw std::invalid_argument("invalid market parameters: " + msg); };
    if (!(p.r > 0.0)) fail("r must be positive (r=" + std::to_string(p.r) + ")");
    if (!(p.mu > p.r)) fail("mu must exceed r (mu=" + std::to_string(p.mu) + ", r=" + std::to_string(p.r) + ")");
    if (!(p.sigma > 0.0)) fail("sigma must be positive (sigma=" + std::to_string(p.sigma) + ")");
    if (!(p.c > 0.0)) fail("c must be positive (c=" + std::to_string(p.c) + ")");
    if (!(p.lam > 0.0)) fail("lambda must be positive (lambda=" + std::to_string(p.lam) + ")");
    if (!(p.alpha >= 0.0 && p.alpha < 1.0)) fail("alpha must lie in [0,1) (alpha=" + std::to_string(p.alpha) + ")");
}

DerivedConstants derive_constants(const MarketParams& p) {
    validate(p);
    DerivedConstants k;
    const double sharpe = (p.mu - p.r) / p.sigma;
    k.delta = 0.5 * sharpe * sharpe;
    // Roots are taken in cancellation-free form so that the identities
    // B1 = gamma/(gamma-1) and B1*B2 = -lam/delta survive in floating point
    // even for near-degenerate parameters (gamma close to 1).
    const double a = p.r + p.lam + k.delta;
    const double sa = std::sqrt(a * a - 4.0 * p.r * p.lam);
    const double gm1 = (p.r - p.lam - k.delta >= 0.0)
                           ? 2.0 * k.delta / (sa + (p.r - p.lam - k.delta))
                           : ((p.lam + k.delta - p.r) + sa) / (2.0 * p.r);
    k.gamma = 1.0 + gm1;
    const double b = p.r - p.lam + k.delta;
    const double sb = std::sqrt(b * b + 4.0 * p.lam * k.delta);
    k.b1 = (b >= 0.0) ? (b + sb) / (2.0 * k.delta) : 2.0 * p.lam / (sb - b);
    k.b2 = -p.lam / (k.delta * k.b1);
    k.safe_level = p.c / p.r;
    return k;
}

MarketParams params_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("parameter JSON is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("parameter JSON must be an object");
    static const char* kFields[] = {"mu", "sigma", "r", "c", "lambda", "alpha"};
    for (const char* f : kFields) {
        if (!j.contains(f)) throw std::invalid_argument(std::string("parameter JSON missing required field \"") + f + "\"");
        if (!j[f].is_number()) throw std::invalid_argument(std::string("parameter field \"") + f + "\" must be a number");
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* f : kFields) known = known || (it.key() == f);
        if (!known) throw std::invalid_argument("parameter JSON has unknown field \"" + it.key() + "\"");
    }
    MarketParams p{j["mu"], j["sigma"], j["r"], j["c"], j["lambda"], j["alpha"]};
    validate(p);
    return p;
}

std::string params_to_json(const MarketParams& p) {
    nlohmann::json j;
    j["mu"] = p.mu;
    j["sigma"] = p.sigma;
    j["r"] = p.r;
    j["c"] = p.c;
    j["lambda"] = p.lam;
    j["alpha"] = p.alpha;
    return j.dump();
}

}  // namespace drawdown
