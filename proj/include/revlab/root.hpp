#pragma once

#include <cmath>
#include <limits>
#include <utility>

namespace revlab {

struct RootResult {
    double x = 0.0;
    double fx = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Brent's method on a bracket [a, b] with f(a), f(b) of opposite sign (or one of them zero).
// Stops once |f| <= ftol or the bracket has shrunk to a few ulps.
template <class F>
RootResult brent_root(F&& f, double a, double b, double fa, double fb, double ftol, int max_iter = 200) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    RootResult out;
    if (std::abs(fa) <= ftol) return {a, fa, 0, true};
    if (std::abs(fb) <= ftol) return {b, fb, 0, true};

    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 1; it <= max_iter; ++it) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = e = b - a;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol1 = 2.0 * eps * std::abs(b);
        const double xm = 0.5 * (c - b);
        out = {b, fb, it, false};
        if (std::abs(fb) <= ftol) {
            out.converged = true;
            return out;
        }
        if (std::abs(xm) <= tol1) {
            // bracket exhausted at machine precision; accept the better end
            out.converged = std::abs(fb) <= ftol;
            return out;
        }
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qa = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
            const double min2 = std::abs(e * q);
            if (2.0 * p < std::min(min1, min2)) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : std::copysign(tol1, xm);
        fb = f(b);
    }
    return out;
}

}  // namespace revlab
