#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cmlevy/error.hpp"

namespace cmlevy {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

//! Adaptive Gauss-Kronrod on a finite interval. `rel_tol` is relative to the L1 norm.
template <class F>
QuadResult integrate(F&& f, double a, double b, double rel_tol = 1e-10, unsigned max_depth = 15) {
    if (!(b > a))
        return {};
    // Boost's per-panel error is not scaled by the panel width, so very short
    // intervals never meet the tolerance; integrate over [0,1] instead.
    const double w = b - a;
    auto g = [&](double x) { return w * f(a + w * x); };
    double err = 0.0;
    double l1 = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        g, 0.0, 1.0, max_depth, rel_tol, &err, &l1);
    return {v, err};
}

/*!
 * Integral of f over (lo, hi) computed in the logarithmic variable t = e^y.
 *
 * Used for shells [2^-k, 2^-k+1] where integrands behave like powers of t.
 */
template <class F>
QuadResult integrate_log(F&& f, double lo, double hi, double rel_tol = 1e-10,
                         unsigned max_depth = 12) {
    if (!(hi > lo) || !(lo > 0.0))
        return {};
    auto g = [&](double y) {
        const double t = std::exp(y);
        return f(t) * t;
    };
    return integrate(g, std::log(lo), std::log(hi), rel_tol, max_depth);
}

//! Contributions of the dyadic shells [2^-k, 2^-k+1] * top for k = 1..depth.
template <class F>
std::vector<double> dyadic_shells(F&& f, int depth, double top = 1.0, double rel_tol = 1e-9) {
    std::vector<double> shells;
    shells.reserve(static_cast<std::size_t>(depth));
    for (int k = 1; k <= depth; ++k) {
        const double hi = std::ldexp(top, -(k - 1));
        const double lo = std::ldexp(top, -k);
        shells.push_back(integrate_log(f, lo, hi, rel_tol).value);
    }
    return shells;
}

//! Bisection for f(x) = y with f non-decreasing on [lo, hi].
template <class F>
double bisect_increasing(F&& f, double y, double lo, double hi, double x_tol = 1e-12,
                         int max_iter = 400) {
    for (int i = 0; i < max_iter && hi - lo > x_tol * std::max(1.0, std::abs(lo)); ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) < y)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace cmlevy
