#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "cmlevy/error.hpp"
#include "cmlevy/levy_model.hpp"
#include "cmlevy/series.hpp"
#include "cmlevy/test_function.hpp"
#include "cmlevy/vertex_law.hpp"

namespace cmlevy {

//! G(t) = t / g(t) for the normalising function g(t) = scale * t^{1/alpha}.
inline double g_ratio(double alpha, double scale, double t) {
    return std::pow(t, 1.0 - 1.0 / alpha) / scale;
}

//! Inverse of g_ratio; undefined at alpha = 1 where G is constant.
inline double g_ratio_inverse(double alpha, double scale, double y) {
    CMLEVY_REQUIRE(alpha != 1.0, DomainError, "G is constant for alpha = 1");
    return std::pow(scale * y, alpha / (alpha - 1.0));
}

namespace detail {

// 15-point Gauss-Legendre in log t, one panel per octave of [lo, hi].
template <class F>
double octave_integral(F&& f, double lo, double hi) {
    if (!(hi > lo) || !(lo > 0.0))
        return 0.0;
    auto g = [&](double y) {
        const double t = std::exp(y);
        return f(t) * t;
    };
    const double span = std::log(hi / lo);
    const int panels = std::max(1, static_cast<int>(std::ceil(span / std::log(2.0) - 1e-9)));
    const double h = span / panels;
    const double y0 = std::log(lo);
    double total = 0.0;
    for (int i = 0; i < panels; ++i)
        total += boost::math::quadrature::gauss<double, 15>::integrate(g, y0 + i * h, y0 + (i + 1) * h);
    return total;
}

// int_0^L q(t) dt by octaves going down until they stop mattering.
template <class F>
double integral_from_zero(F&& q, double level) {
    double total = 0.0;
    double hi = level;
    for (int m = 0; m < 400; ++m) {
        const double lo = 0.5 * hi;
        const double s = octave_integral(q, lo, hi);
        total += s;
        if (m > 3 && s <= 1e-10 * total)
            break;
        hi = lo;
    }
    return total;
}

// Runs a condition and turns numeric failures into an indeterminate verdict.
template <class F>
SeriesReport guarded(F&& compute) {
    try {
        return compute();
    } catch (const NumericError& e) {
        SeriesReport r;
        r.rule = std::string("numeric failure: ") + e.what();
        return r;
    }
}

inline double atan_difference(double x, double y) {
    // atan(x) - atan(y) without cancellation when both are large and of one sign
    if (x * y > -1.0)
        return std::atan((x - y) / (1.0 + x * y));
    return std::atan(x) - std::atan(y);
}

} // namespace detail

//! How tail probabilities of X_t are obtained.
enum class Route {
    automatic,     //!< exact scaling for stable and Cauchy models, marginal_cdf otherwise
    exact_scaling, //!< X_t = drift t + scale t^{1/alpha} Z
    generic        //!< model.marginal_cdf / marginal_sf
};

inline const char* to_string(Route r) {
    switch (r) {
    case Route::automatic:
        return "automatic";
    case Route::exact_scaling:
        return "exact_scaling";
    case Route::generic:
        return "generic";
    }
    return "automatic";
}

/*!
 * P(a < X_t <= b) and P(X_t <= x) along a chosen route.
 */
class MarginalLaw {
  public:
    MarginalLaw(const LevyModel& model, Route route) : model_(model) {
        const bool scalable = model.is_stable_like();
        if (route == Route::automatic)
            route = scalable ? Route::exact_scaling : Route::generic;
        CMLEVY_REQUIRE(route != Route::exact_scaling || scalable, CapabilityError,
                       "exact scaling needs a stable or Cauchy model");
        route_ = route;
        if (route_ == Route::exact_scaling) {
            if (model.is_cauchy_like()) {
                cauchy_ = true;
                const Cauchy c = model.as_cauchy();
                scale_ = c.scale;
                drift_ = c.location;
            } else {
                const auto& s = std::get<Stable>(model.kind());
                alpha_ = s.alpha;
                beta_ = LevyModel::skew(s);
                scale_ = s.scale;
                drift_ = s.drift;
            }
        }
    }

    Route route() const noexcept { return route_; }

    double interval(double t, double a, double b) const {
        if (!(b > a))
            return 0.0;
        if (route_ == Route::generic)
            return interval_probability(model_, t, a, b);
        if (cauchy_) {
            const double za = (a / t - drift_) / scale_, zb = (b / t - drift_) / scale_;
            double d;
            if (std::isfinite(za) && std::isfinite(zb))
                d = detail::atan_difference(zb, za);
            else if (std::isfinite(zb))
                d = std::atan2(1.0, -zb);
            else if (std::isfinite(za))
                d = std::atan2(1.0, za);
            else
                d = stable::pi;
            return std::max(d / stable::pi, 0.0);
        }
        const double w = scale_ * std::pow(t, 1.0 / alpha_);
        const double za = (a - drift_ * t) / w, zb = (b - drift_ * t) / w;
        if (za >= 0.0) {
            const double ua = stable::cdf_standard(alpha_, beta_, za).upper;
            const double ub = std::isfinite(zb) ? stable::cdf_standard(alpha_, beta_, zb).upper : 0.0;
            return std::max(ua - ub, 0.0);
        }
        const double lb = std::isfinite(zb) ? stable::cdf_standard(alpha_, beta_, zb).lower : 1.0;
        const double la = std::isfinite(za) ? stable::cdf_standard(alpha_, beta_, za).lower : 0.0;
        return std::max(lb - la, 0.0);
    }

    double cdf(double t, double x) const { return interval(t, -inf, x); }

  private:
    const LevyModel& model_;
    Route route_ = Route::generic;
    bool cauchy_ = false;
    double alpha_ = 1.0, beta_ = 0.0, scale_ = 1.0, drift_ = 0.0;
};

namespace detail {

// f rescaled so that f(top) = 1, clamped to the domain.
struct Normalized {
    const TestFunction& f;
    double top = 1.0;
    double factor = 1.0;
    bool flagged = false;

    explicit Normalized(const TestFunction& fn) : f(fn), top(fn.domain_max()) {
        const double at_top = f(top);
        CMLEVY_REQUIRE(at_top > 0.0, ParameterError, "test function vanishes at the top of its domain");
        factor = 1.0 / at_top;
        flagged = std::abs(at_top - 1.0) > 1e-12;
        // strictly increasing with values at most f(top)
        double prev = 0.0;
        for (int i = 0; i < 300; ++i) {
            const double t = top * std::pow(1e-12, 1.0 - i / 299.0);
            const double v = f(t);
            if (v <= prev || v > at_top * (1.0 + 1e-12))
                flagged = true;
            prev = v;
        }
    }
    double operator()(double t) const { return factor * f(std::min(t, top)); }
};

} // namespace detail

struct FsConditions {
    SeriesReport large;    //!< shells of int P(0 < V_t <= f(t/c)) dt/t
    SeriesReport var;      //!< shells of int E[t / f^{-1}(V_t)^2; f(t/2) < V_t <= 1] dt
    SeriesReport mean;     //!< the dyadic mean sequence, judged for convergence to 0
    SeriesReport suff_low; //!< shells of int E[1 / f^{-1}(V_t); f(t/2) < V_t <= 1] dt
    bool normalization_flag = false; //!< f(1) != 1, f > f(1) somewhere, or f not strictly increasing
    double normalization = 1.0;      //!< factor applied to f
    Route route = Route::automatic;
};

/*!
 * Conditions for the lower fluctuations of the slope just after the vertex
 * time at slope s, with V_t = (X_t - s t)/t.
 *
 * The expectations over f^{-1}(V_t) are integrated by parts in y = f^{-1}(v),
 * so only values of f are needed.
 */
inline FsConditions fs_conditions(const LevyModel& model, double s, const TestFunction& f, double c = 1.0,
                                  int depth = 30, Route route = Route::automatic,
                                  const VerdictPolicy& pol = {}) {
    CMLEVY_REQUIRE(c > 0.0, ArgumentError, "c must be positive");
    CMLEVY_REQUIRE(depth > pol.window, ArgumentError, "depth must exceed the verdict window");
    const MarginalLaw law(model, route);
    const detail::Normalized fn(f);
    const double top = fn.top;
    FsConditions out;
    out.normalization_flag = fn.flagged;
    out.normalization = fn.factor;
    out.route = law.route();

    // P(a < V_t <= b)
    auto pv = [&](double t, double a, double b) { return law.interval(t, s * t + a * t, s * t + b * t); };
    auto shell = [&](int k) { return std::pair{std::ldexp(top, -k), std::ldexp(top, 1 - k)}; };

    out.large = detail::guarded([&] {
        std::vector<double> terms(depth);
        for (int k = 1; k <= depth; ++k) {
            auto [lo, hi] = shell(k);
            terms[k - 1] = detail::octave_integral([&](double t) { return pv(t, 0.0, fn(t / c)) / t; }, lo, hi);
        }
        return classify_series(std::move(terms), pol);
    });

    // K(t, y) = P(f(t/2) < V_t <= f(y)) for y in [t/2, top]
    auto k_tilde = [&](double t, double y) { return pv(t, fn(0.5 * t), fn(y)); };

    out.var = detail::guarded([&] {
        std::vector<double> terms(depth);
        for (int k = 1; k <= depth; ++k) {
            auto [lo, hi] = shell(k);
            auto inner = [&](double t) {
                const double tail = detail::octave_integral(
                    [&](double y) { return k_tilde(t, y) * 2.0 * t / (y * y * y); }, 0.5 * t, top);
                return t * k_tilde(t, top) / (top * top) + tail;
            };
            terms[k - 1] = detail::octave_integral(inner, lo, hi);
        }
        return classify_series(std::move(terms), pol);
    });

    out.mean = detail::guarded([&] {
        std::vector<double> seq(depth);
        for (int n = 1; n <= depth; ++n) {
            const double level = std::ldexp(top, -n);
            const double fl = fn(level);
            seq[n - 1] = detail::integral_from_zero([&](double t) { return pv(t, fn(0.5 * t), fl); }, level) / level;
        }
        return classify_to_zero(std::move(seq), pol);
    });

    out.suff_low = detail::guarded([&] {
        std::vector<double> terms(depth);
        for (int k = 1; k <= depth; ++k) {
            auto [lo, hi] = shell(k);
            auto inner = [&](double t) {
                const double tail =
                    detail::octave_integral([&](double y) { return k_tilde(t, y) / (y * y); }, 0.5 * t, top);
                return k_tilde(t, top) / top + tail;
            };
            terms[k - 1] = detail::octave_integral(inner, lo, hi);
        }
        return classify_series(std::move(terms), pol);
    });
    return out;
}

struct IsConditions {
    SeriesReport large;     //!< shells of int P(X_t <= -c F(t)) dt/t
    SeriesReport var;       //!< shells of int E[(X_t/F)^2; -2F < X_t <= -t] dt/t
    SeriesReport mean;      //!< dyadic mean sequence
    SeriesReport suff_var;  //!< shells of the triplet bound
    SeriesReport suff_mean; //!< triplet bound times t at t = 2^-n
    bool concave = false;   //!< f concave on a grid, needed for the upper statement
    bool normalization_flag = false;
    double normalization = 1.0;
    Route route = Route::automatic;
    //! The triplet bound does not settle the question; only the direct conditions speak.
    bool sufficient_inconclusive() const { return suff_var.verdict != Verdict::converging; }
};

/*!
 * Conditions for the upper fluctuations of |C'_t| f(t) at time 0, with
 * F(t) = t / f(t). Only defined for processes of infinite variation.
 */
inline IsConditions is_conditions(const LevyModel& model, const TestFunction& f, double c = 1.0, int depth = 30,
                                  Route route = Route::automatic, const VerdictPolicy& pol = {}) {
    CMLEVY_REQUIRE(model.infinite_variation(), PreconditionError,
                   "slope fluctuations at time 0 are only studied for processes of infinite variation");
    CMLEVY_REQUIRE(c > 0.0, ArgumentError, "c must be positive");
    CMLEVY_REQUIRE(depth > pol.window, ArgumentError, "depth must exceed the verdict window");
    const MarginalLaw law(model, route);
    const detail::Normalized fn(f);
    const double top = fn.top;
    IsConditions out;
    out.normalization_flag = fn.flagged;
    out.normalization = fn.factor;
    out.route = law.route();
    out.concave = f.concave_on_grid();

    auto big_f = [&](double t) { return t / fn(t); };
    auto shell = [&](int k) { return std::pair{std::ldexp(top, -k), std::ldexp(top, 1 - k)}; };

    out.large = detail::guarded([&] {
        std::vector<double> terms(depth);
        for (int k = 1; k <= depth; ++k) {
            auto [lo, hi] = shell(k);
            terms[k - 1] = detail::octave_integral([&](double t) { return law.cdf(t, -c * big_f(t)) / t; }, lo, hi);
        }
        return classify_series(std::move(terms), pol);
    });

    out.var = detail::guarded([&] {
        std::vector<double> terms(depth);
        for (int k = 1; k <= depth; ++k) {
            auto [lo, hi] = shell(k);
            auto inner = [&](double t) {
                const double F = big_f(t);
                if (!(2.0 * F > t))
                    return 0.0;
                // K(x) = P(-2F < X_t <= x); E[X^2; .] = t^2 K(-t) + int_t^{2F} K(-y) 2y dy
                auto kk = [&](double y) { return law.interval(t, -2.0 * F, -y); };
                const double e2 = t * t * kk(t) +
                                  detail::octave_integral([&](double y) { return kk(y) * 2.0 * y; }, t, 2.0 * F);
                return e2 / (F * F * t);
            };
            terms[k - 1] = detail::octave_integral(inner, lo, hi);
        }
        return classify_series(std::move(terms), pol);
    });

    out.mean = detail::guarded([&] {
        std::vector<double> seq(depth);
        for (int n = 1; n <= depth; ++n) {
            const double level = std::ldexp(top, -n);
            const double fl = fn(level);
            auto q = [&](double t) { return law.interval(t, -2.0 * big_f(0.5 * t), -t / fl); };
            seq[n - 1] = detail::integral_from_zero(q, level) / level;
        }
        return classify_to_zero(std::move(seq), pol);
    });

    auto bound = [&](double t) {
        const double F = big_f(t);
        const auto tf = model.truncated(F);
        return (tf.gamma_bar * tf.gamma_bar * t + tf.sigma2_bar) / (F * F) + tf.nu_bar;
    };
    out.suff_var = detail::guarded([&] {
        std::vector<double> terms(depth);
        for (int k = 1; k <= depth; ++k) {
            auto [lo, hi] = shell(k);
            terms[k - 1] = detail::octave_integral(bound, lo, hi);
        }
        return classify_series(std::move(terms), pol);
    });
    out.suff_mean = detail::guarded([&] {
        std::vector<double> seq(depth);
        for (int n = 1; n <= depth; ++n) {
            const double t = std::ldexp(top, -n);
            seq[n - 1] = bound(t) * t;
        }
        return classify_to_zero(std::move(seq), pol);
    });
    return out;
}

struct PowerBoundIntegrals {
    SeriesReport derivative_form; //!< int_0^1 int_{t/2}^1 f'(y)/y dy t^{1-1/beta} dt
    SeriesReport plain;           //!< int_0^1 t^{-1/beta} f(t) dt
    SeriesReport capped;          //!< int_0^1 min(t^{-1/beta} f(t), 1/t) dt
};

/*!
 * The three integrals that decide lower fluctuations after the minimum for
 * processes whose marginal densities are bounded by C t^{-1/beta}.
 */
inline PowerBoundIntegrals power_bound_integrals(double beta, const TestFunction& f, int depth = 40,
                                                 const VerdictPolicy& pol = {}) {
    CMLEVY_REQUIRE(beta > 0.0 && beta <= 1.0, ParameterError, "beta must lie in (0,1]");
    CMLEVY_REQUIRE(f.kind() != TestFunction::Kind::custom, CapabilityError,
                   "custom test functions have no derivative");
    const double top = f.domain_max();
    const double e = 1.0 / beta;
    std::vector<double> d(depth), p(depth), m(depth);
    for (int k = 1; k <= depth; ++k) {
        const double lo = std::ldexp(top, -k), hi = std::ldexp(top, 1 - k);
        d[k - 1] = detail::octave_integral(
            [&](double t) {
                const double in =
                    detail::octave_integral([&](double y) { return f.derivative(y) / y; }, 0.5 * t, top);
                return in * std::pow(t, 1.0 - e);
            },
            lo, hi);
        p[k - 1] = detail::octave_integral([&](double t) { return std::pow(t, -e) * f(t); }, lo, hi);
        m[k - 1] = detail::octave_integral([&](double t) { return std::min(std::pow(t, -e) * f(t), 1.0 / t); },
                                           lo, hi);
    }
    return {classify_series(std::move(d), pol), classify_series(std::move(p), pol),
            classify_series(std::move(m), pol)};
}

struct AuditPoint {
    double t = 1.0, k = 1.0, eps = 1.0, p = 2.0;
};

struct AuditRow {
    AuditPoint point;
    double estimate = 0.0; //!< Monte Carlo mean of (|X_t| min K)^p
    double standard_error = 0.0;
    double bound = 0.0;
    bool violation = false; //!< estimate - 3 SE > bound
};

struct AuditReport {
    std::vector<AuditRow> rows;
    int violations = 0;
};

//! (gamma_bar^2 t^2 + sigma2_bar t)^{p/2} + K^p nu_bar t at level eps.
inline double truncated_moment_bound(const LevyModel& model, const AuditPoint& a) {
    const auto tf = model.truncated(a.eps);
    const double v = tf.gamma_bar * tf.gamma_bar * a.t * a.t + tf.sigma2_bar * a.t;
    return std::pow(v, 0.5 * a.p) + std::pow(a.k, a.p) * tf.nu_bar * a.t;
}

/*!
 * Compares Monte Carlo truncated absolute moments of X_t with the triplet
 * bound at each grid point. Point i uses rng.child(i), so the result does
 * not depend on `threads`.
 */
inline AuditReport truncated_moment_audit(const LevyModel& model, const std::vector<AuditPoint>& grid, int n_mc,
                                          const RandomStream& rng, int threads = 1) {
    CMLEVY_REQUIRE(n_mc >= 2, ArgumentError, "need at least two draws per point");
    for (const auto& a : grid) {
        CMLEVY_REQUIRE(a.p > 0.0 && a.p <= 2.0, ParameterError, "p must lie in (0,2]");
        CMLEVY_REQUIRE(a.eps > 0.0 && a.eps <= 1.0, ParameterError, "eps must lie in (0,1]");
        CMLEVY_REQUIRE(a.t > 0.0 && a.k > 0.0, ParameterError, "t and K must be positive");
    }
    AuditReport out;
    out.rows.resize(grid.size());
    auto work = [&](std::size_t i) {
        RandomStream r = rng.child(i);
        const auto& a = grid[i];
        double sum = 0.0, sum2 = 0.0;
        for (int j = 0; j < n_mc; ++j) {
            const double y = std::pow(std::min(std::abs(model.sample_increment(a.t, r)), a.k), a.p);
            sum += y;
            sum2 += y * y;
        }
        AuditRow row;
        row.point = a;
        row.estimate = sum / n_mc;
        const double var = std::max(sum2 / n_mc - row.estimate * row.estimate, 0.0) * n_mc / (n_mc - 1.0);
        row.standard_error = std::sqrt(var / n_mc);
        row.bound = truncated_moment_bound(model, a);
        row.violation = row.estimate - 3.0 * row.standard_error > row.bound;
        out.rows[i] = row;
    };
    const std::size_t n = grid.size();
    const int nt = std::max(1, std::min<int>(threads, static_cast<int>(n)));
    if (nt == 1) {
        for (std::size_t i = 0; i < n; ++i)
            work(i);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < nt; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = static_cast<std::size_t>(w); i < n; i += static_cast<std::size_t>(nt))
                    work(i);
            });
        for (auto& th : pool)
            th.join();
    }
    for (const auto& r : out.rows)
        out.violations += r.violation ? 1 : 0;
    return out;
}

enum class ExponentKind {
    phi, //!< Phi_{s}(u) for slopes s -> -infinity, alpha in (1,2]
    psi  //!< Psi_{s}(u) above the natural drift for s -> 0, alpha in (0,1)
};

enum class AsymptoticRegime {
    growing, //!< u_n G^{-1}(1/|s_n|) -> infinity: logarithmic equivalence
    vanishing //!< u_n G^{-1}(1/|s_n|) -> 0: power bound
};

struct AsymptoticRow {
    int n = 0;
    double u = 0.0, s = 0.0;
    double product = 0.0;   //!< u_n G^{-1}(1/|s_n|)
    double exponent = 0.0;  //!< Phi or Psi at (s_n, u_n)
    double reference = 0.0; //!< (1-rho) log(product), rho log(product) or the power bound
    double ratio = 0.0;
    double corrected = NAN; //!< Cauchy only: ratio (1-rho)/P(X_1 <= s_n), identically 1
};

struct AsymptoticReport {
    std::vector<AsymptoticRow> rows;
    SeriesReport trend; //!< |ratio - 1| -> 0 (growing) or ratio growth (vanishing)
    bool bounded = false; //!< vanishing regime: ratios show no growth over the trailing window
    double max_ratio = 0.0;
    //! All ratios from index n0 on lie in [1 - tol, 1 + tol].
    bool settled(double tol, int n0) const {
        bool any = false;
        for (const auto& r : rows)
            if (r.n >= n0) {
                any = true;
                if (!(std::abs(r.ratio - 1.0) <= tol))
                    return false;
            }
        return any;
    }
};

/*!
 * Ratio of the vertex-time Laplace exponent to its small-scale asymptotic
 * along sequences (u_n, s_n), n = 1..N.
 */
inline AsymptoticReport exponent_asymptotics(const LevyModel& model, ExponentKind kind, AsymptoticRegime regime,
                                             const std::function<double(int)>& u_seq,
                                             const std::function<double(int)>& s_seq, int n_max,
                                             const VerdictPolicy& pol = {}) {
    CMLEVY_REQUIRE(n_max >= 4, ArgumentError, "need at least four terms");
    const double alpha = model.alpha();
    const bool cauchy = model.is_cauchy_like();
    double scale = 1.0;
    if (auto* s = std::get_if<Stable>(&model.kind()))
        scale = s->scale;
    else if (auto* b = std::get_if<Brownian>(&model.kind()))
        scale = b->sigma;
    else if (!cauchy)
        throw PreconditionError("asymptotics need a stable model or Brownian motion");
    const double rho = model.positivity();
    if (kind == ExponentKind::phi) {
        CMLEVY_REQUIRE(cauchy || (alpha > 1.0 && alpha <= 2.0), PreconditionError,
                       "Phi asymptotics need alpha in (1,2]");
        if (!cauchy)
            CMLEVY_REQUIRE(std::abs(model.mean()) < 1e-15, PreconditionError, "Phi asymptotics need E X_1 = 0");
    } else {
        CMLEVY_REQUIRE(!cauchy && alpha > 0.0 && alpha < 1.0, PreconditionError,
                       "Psi asymptotics need alpha in (0,1)");
    }
    CMLEVY_REQUIRE(!(cauchy && regime == AsymptoticRegime::vanishing), PreconditionError,
                   "G is constant for Cauchy processes; only the factorised growing regime applies");

    const LaplaceExponent lap(model);
    AsymptoticReport out;
    std::vector<double> gap;
    for (int n = 1; n <= n_max; ++n) {
        AsymptoticRow r;
        r.n = n;
        r.u = u_seq(n);
        r.s = s_seq(n);
        if (kind == ExponentKind::phi)
            CMLEVY_REQUIRE(r.s < 0.0, PreconditionError, "Phi asymptotics need s_n < 0");
        else
            CMLEVY_REQUIRE(r.s > 0.0, PreconditionError, "Psi asymptotics need s_n > 0");
        r.product = cauchy ? r.u : r.u * g_ratio_inverse(alpha, scale, 1.0 / std::abs(r.s));
        if (kind == ExponentKind::phi)
            r.exponent = lap.phi(r.s, r.u);
        else
            r.exponent = lap.psi_fs(model.natural_drift(), r.s, r.u);
        const double weight = kind == ExponentKind::phi ? 1.0 - rho : rho;
        if (cauchy) {
            r.reference = weight * std::log1p(r.u / lap.lambda());
            r.ratio = r.exponent / r.reference;
            r.corrected = r.ratio * weight / model.marginal_cdf(1.0, r.s).value;
        } else if (regime == AsymptoticRegime::growing) {
            r.reference = weight * std::log(r.product);
            r.ratio = r.exponent / r.reference;
        } else {
            const double q = kind == ExponentKind::phi ? 0.5 * (alpha - 1.0) : std::min(1.0, 0.5 * (1.0 / alpha - 1.0));
            const double extra = kind == ExponentKind::phi ? std::pow(std::abs(r.s), -2.0) : r.s;
            r.reference = std::pow(r.product, q) + extra;
            r.ratio = r.exponent / r.reference;
        }
        out.max_ratio = std::max(out.max_ratio, r.ratio);
        gap.push_back(std::abs(r.ratio - 1.0));
        out.rows.push_back(r);
    }
    // the sequences must actually be in the announced regime
    const int w = std::min(4, n_max - 1);
    bool monotone = true;
    for (int i = n_max - w; i < n_max; ++i)
        monotone = monotone && (regime == AsymptoticRegime::growing ? out.rows[i].product > out.rows[i - 1].product
                                                                    : out.rows[i].product < out.rows[i - 1].product);
    const double last = out.rows.back().product;
    if (regime == AsymptoticRegime::growing)
        CMLEVY_REQUIRE(monotone && last > 10.0, PreconditionError,
                       "u_n G^{-1}(1/|s_n|) does not grow along the given sequences");
    else
        CMLEVY_REQUIRE(monotone && last < 0.1, PreconditionError,
                       "u_n G^{-1}(1/|s_n|) does not vanish along the given sequences");

    if (regime == AsymptoticRegime::growing) {
        out.trend = classify_to_zero(std::move(gap), pol);
    } else {
        std::vector<double> ratios;
        for (const auto& r : out.rows)
            ratios.push_back(r.ratio);
        out.trend = classify_to_zero(ratios, pol);
        out.bounded = detail::power_decay(ratios, pol.window) >= -pol.flat_power;
    }
    return out;
}

} // namespace cmlevy
