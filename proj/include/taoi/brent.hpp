#pragma once

#include <cmath>
#include <functional>

namespace taoi {

struct BrentResult {
    double x = 0.0;
    double f = 0.0;
    int iterations = 0;
};

/// Derivative-free scalar minimization on [a, b]: golden-section bracketing
/// with parabolic interpolation steps where they are well-behaved.
inline BrentResult brent_minimize(const std::function<double(double)>& fn, double a, double b,
                                  double tol = 1e-8, int max_iter = 200) {
    constexpr double golden = 0.3819660112501051;
    double x = a + golden * (b - a);
    double w = x, v = x;
    double fx = fn(x), fw = fx, fv = fx;
    double d = 0.0, e = 0.0;

    BrentResult res;
    for (int iter = 0; iter < max_iter; ++iter) {
        const double mid = 0.5 * (a + b);
        const double tol1 = tol * std::abs(x) + 1e-12;
        const double tol2 = 2.0 * tol1;
        if (std::abs(x - mid) <= tol2 - 0.5 * (b - a)) {
            res.iterations = iter;
            break;
        }
        bool parabolic = false;
        if (std::abs(e) > tol1) {
            // trial parabola through x, w, v
            const double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) p = -p;
            q = std::abs(q);
            const double e_prev = e;
            e = d;
            if (std::abs(p) < std::abs(0.5 * q * e_prev) && p > q * (a - x) && p < q * (b - x)) {
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || b - u < tol2) d = (mid > x) ? tol1 : -tol1;
                parabolic = true;
            }
        }
        if (!parabolic) {
            e = (x >= mid) ? a - x : b - x;
            d = golden * e;
        }
        const double u = (std::abs(d) >= tol1) ? x + d : x + (d > 0.0 ? tol1 : -tol1);
        const double fu = fn(u);
        if (fu <= fx) {
            if (u >= x)
                a = x;
            else
                b = x;
            v = w; fv = fw;
            w = x; fw = fx;
            x = u; fx = fu;
        } else {
            if (u < x)
                a = u;
            else
                b = u;
            if (fu <= fw || w == x) {
                v = w; fv = fw;
                w = u; fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u; fv = fu;
            }
        }
        res.iterations = iter + 1;
    }
    res.x = x;
    res.f = fx;
    return res;
}

}  // namespace taoi
