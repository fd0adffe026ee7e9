#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace drawdown {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Brent's method on a bracketing interval [a, b] with f(a)*f(b) <= 0.
// Converges to |b-a| <= 2*eps_abs + 4*eps*|x| or |f| == 0.
template <typename F>
double brent(F&& f, double a, double b, double fa, double fb,
             double eps_abs = 1e-15, int max_iter = 200) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw SolverError("brent: root not bracketed");
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if (std::fabs(fc) < std::fabs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol = 2.0 * 2.220446049250313e-16 * std::fabs(b) + 0.5 * eps_abs;
        const double xm = 0.5 * (c - b);
        if (std::fabs(xm) <= tol || fb == 0.0) return b;
        if (std::fabs(e) >= tol && std::fabs(fa) > std::fabs(fb)) {
            double s = fb / fa, p, q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc, rr = fb / fc;
                p = s * (2.0 * xm * qq * (qq - rr) - (b - a) * (rr - 1.0));
                q = (qq - 1.0) * (rr - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::fabs(p);
            if (2.0 * p < std::fmin(3.0 * xm * q - std::fabs(tol * q), std::fabs(e * q))) {
                e = d; d = p / q;
            } else {
                d = xm; e = d;
            }
        } else {
            d = xm; e = d;
        }
        a = b; fa = fb;
        b += (std::fabs(d) > tol) ? d : (xm > 0.0 ? tol : -tol);
        fb = f(b);
        if ((fb > 0.0) == (fc > 0.0)) { c = a; fc = fa; d = b - a; e = d; }
    }
    throw SolverError("brent: no convergence after " + std::to_string(max_iter) + " iterations");
}

template <typename F>
double brent(F&& f, double a, double b, double eps_abs = 1e-15, int max_iter = 200) {
    return brent(f, a, b, f(a), f(b), eps_abs, max_iter);
}

}  // namespace drawdown
