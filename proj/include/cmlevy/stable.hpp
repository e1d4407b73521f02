#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "cmlevy/error.hpp"
#include "cmlevy/quadrature.hpp"
#include "cmlevy/rng.hpp"

/*!
 * Strictly stable laws in the S(alpha, beta) parametrisation with unit scale
 * and zero shift: E exp(i u Z) = exp(-|u|^alpha (1 - i beta sgn(u) tan(pi alpha/2)))
 * for alpha != 1. The alpha = 1 case is restricted to the symmetric Cauchy law.
 */
namespace cmlevy::stable {

inline constexpr double pi = std::numbers::pi;

//! Skewness beta giving P(Z > 0) = rho, alpha != 1.
inline double skew_from_positivity(double alpha, double rho) {
    if (alpha == 2.0)
        return 0.0;
    return std::tan(pi * alpha * (rho - 0.5)) / std::tan(pi * alpha / 2.0);
}

inline double positivity_from_skew(double alpha, double beta) {
    if (alpha == 1.0 || alpha == 2.0)
        return 0.5;
    return 0.5 + std::atan(beta * std::tan(pi * alpha / 2.0)) / (pi * alpha);
}

//! Admissible positivity range for a strictly stable law of index alpha.
inline bool admissible_positivity(double alpha, double rho) {
    if (alpha == 2.0)
        return std::abs(rho - 0.5) < 1e-15;
    if (alpha < 1.0)
        return rho >= 0.0 && rho <= 1.0;
    if (alpha == 1.0)
        return rho > 0.0 && rho < 1.0;
    return rho >= 1.0 - 1.0 / alpha - 1e-15 && rho <= 1.0 / alpha + 1e-15;
}

//! c_+ + c_- of the Levy density c_+ x^{-1-alpha} on (0,inf), c_- |x|^{-1-alpha} on (-inf,0).
inline double levy_mass_constant(double alpha, double scale) {
    if (alpha == 1.0)
        return 2.0 * scale / pi;
    if (alpha == 2.0)
        return 0.0;
    const double g = boost::math::tgamma(-alpha);
    return std::pow(scale, alpha) / (-g * std::cos(pi * alpha / 2.0));
}

//! Chambers-Mallows-Stuck draw of a unit-scale S(alpha, beta) variate.
inline double sample_standard(double alpha, double beta, RandomStream& rng) {
    const double u = pi * (rng.uniform() - 0.5);
    const double w = -std::log(rng.uniform());
    if (alpha == 1.0)
        return std::tan(u);
    const double t = beta * std::tan(pi * alpha / 2.0);
    const double b = std::atan(t) / alpha;
    const double s = std::pow(1.0 + t * t, 1.0 / (2.0 * alpha));
    return s * std::sin(alpha * (u + b)) / std::pow(std::cos(u), 1.0 / alpha) *
           std::pow(std::cos(u - alpha * (u + b)) / w, (1.0 - alpha) / alpha);
}

struct TailPair {
    double lower = 0.0; //!< P(Z <= x)
    double upper = 0.0; //!< P(Z > x)
    double error = 0.0;
    bool degraded = false; //!< tolerance relaxed from 1e-8 to 1e-6
};

namespace detail {

// log V of the Zolotarev integral representation at theta = phi - theta0 = pi/2 - psi.
// Passing both distances keeps the endpoint singularities accurate.
inline double log_v(double alpha, double theta0, double phi, double psi) {
    const double am1 = alpha - 1.0;
    const double lc = std::log(std::sin(psi)); // log cos(theta)
    return std::log(std::cos(alpha * theta0)) / am1 +
           (alpha / am1) * (lc - std::log(std::sin(alpha * phi))) +
           std::log(std::cos(theta0 + am1 * phi)) - lc;
}

// Upper tail P(Z > y) for y > 0, accurate in relative terms.
inline QuadResult upper_tail_positive(double alpha, double beta, double y, double rel_tol) {
    const double theta0 = std::atan(beta * std::tan(pi * alpha / 2.0)) / alpha;
    const double len = pi / 2.0 + theta0;
    if (!(len > 0.0))
        return {};
    const double half = 0.5 * len;
    const double lx = alpha / (alpha - 1.0) * std::log(y);
    // side 0 measures distance phi from the left end, side 1 distance psi from the right end
    auto ell = [&](int side, double d) {
        return side == 0 ? lx + log_v(alpha, theta0, d, len - d) : lx + log_v(alpha, theta0, len - d, d);
    };
    // exp(-g) for alpha > 1, 1 - exp(-g) for alpha < 1
    auto value = [&](double l) {
        if (std::isnan(l))
            return 0.0;
        const double g = std::exp(l);
        return alpha > 1.0 ? std::exp(-g) : -std::expm1(-g);
    };
    // ell is monotone in theta: decreasing for alpha > 1, increasing for alpha < 1
    const bool decreasing = alpha > 1.0;
    std::vector<double> cuts[2] = {{0.0, half}, {0.0, half}};
    const double l_mid = ell(0, half);
    for (double level : {-4.0, 0.0, 3.0}) {
        // the level is crossed on the left half iff ell(mid) is already past it
        const bool left = decreasing ? (l_mid <= level) : (l_mid >= level);
        const int side = left ? 0 : 1;
        double lo = 0.0, hi = half;
        for (int i = 0; i < 200 && hi - lo > 1e-17 + 1e-15 * hi; ++i) {
            const double mid = 0.5 * (lo + hi);
            const double l = ell(side, mid);
            // distance from the endpoint where ell is extreme
            const bool before = side == 0 ? (decreasing ? l > level : l < level)
                                          : (decreasing ? l < level : l > level);
            if (before)
                lo = mid;
            else
                hi = mid;
        }
        cuts[side].push_back(0.5 * (lo + hi));
    }
    struct Piece {
        int side;
        double lo, hi, l1;
    };
    std::vector<Piece> pieces;
    double l1_total = 0.0;
    for (int side = 0; side < 2; ++side) {
        auto& c = cuts[side];
        std::sort(c.begin(), c.end());
        for (std::size_t i = 0; i + 1 < c.size(); ++i) {
            if (!(c[i + 1] > c[i]))
                continue;
            const double lo = c[i], w = c[i + 1] - c[i];
            auto f = [&, side](double x) { return w * value(ell(side, lo + w * x)); };
            double err = 0.0, l1 = 0.0;
            boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 1.0, 0, 0.0, &err, &l1);
            pieces.push_back({side, c[i], c[i + 1], l1});
            l1_total += l1;
        }
    }
    // tolerance is relative to the whole integral, not to each piece
    QuadResult total;
    for (const auto& p : pieces) {
        auto f = [&](double d) { return value(ell(p.side, d)); };
        const double piece_tol = std::min(1e-3, rel_tol * l1_total / std::max(p.l1, 1e-300));
        auto r = integrate(f, p.lo, p.hi, piece_tol, 20);
        total.value += r.value;
        total.error += r.error;
    }
    total.value /= pi;
    total.error /= pi;
    return total;
}

} // namespace detail

//! P(Z <= x) and P(Z > x) for a unit-scale S(alpha, beta) variate.
inline TailPair cdf_standard(double alpha, double beta, double x) {
    TailPair out;
    if (alpha == 2.0) {
        out.lower = 0.5 * std::erfc(-x / 2.0);
        out.upper = 0.5 * std::erfc(x / 2.0);
        return out;
    }
    if (alpha == 1.0) {
        // symmetric Cauchy; atan form keeps tails accurate
        if (x <= 0.0) {
            out.lower = std::atan2(1.0, -x) / pi;
            out.upper = 1.0 - out.lower;
        } else {
            out.upper = std::atan2(1.0, x) / pi;
            out.lower = 1.0 - out.upper;
        }
        return out;
    }
    if (x == 0.0) {
        out.upper = positivity_from_skew(alpha, beta);
        out.lower = 1.0 - out.upper;
        return out;
    }
    const bool positive = x > 0.0;
    const double y = std::abs(x);
    const double b = positive ? beta : -beta;
    const QuadResult r = detail::upper_tail_positive(alpha, b, y, 1e-11);
    if (!(r.error <= 1e-8)) {
        if (r.error <= 1e-6)
            out.degraded = true;
        else
            throw NumericError("stable cdf quadrature did not converge", r.error);
    }
    const double tail = std::clamp(r.value, 0.0, 1.0);
    if (positive) {
        out.upper = tail;
        out.lower = 1.0 - tail;
    } else {
        out.lower = tail;
        out.upper = 1.0 - tail;
    }
    out.error = r.error;
    return out;
}

} // namespace cmlevy::stable
