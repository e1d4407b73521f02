#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include "cmlevy/error.hpp"
#include "cmlevy/rng.hpp"
#include "cmlevy/stable.hpp"

namespace cmlevy {

struct Brownian {
    double sigma = 1.0;
    double drift = 0.0;
};

//! Strictly stable process plus linear drift, X_t = t^{1/alpha} scale Z + drift t.
struct Stable {
    double alpha = 1.5;
    double rho = 0.5;
    double scale = 1.0;
    double drift = 0.0;
};

//! X_1 has density scale / (pi (scale^2 + (x - location)^2)).
struct Cauchy {
    double scale = 1.0;
    double location = 0.0;
};

struct GammaSub {
    double shape = 1.0;
    double rate = 1.0;
};

struct JumpLaw {
    enum class Kind { plus_minus, normal, exponential };
    Kind kind = Kind::plus_minus;
    double a = 1.0; //!< size for plus_minus, mean for normal, rate for exponential
    double b = 0.0; //!< standard deviation for normal
};

struct CompoundPoissonDrift {
    double rate = 1.0;
    JumpLaw jumps{};
    double drift = 0.0;
};

struct StablePlusPerturbation {
    Stable base{};
    CompoundPoissonDrift perturbation{};
};

using ModelKind =
    std::variant<Brownian, Stable, Cauchy, GammaSub, CompoundPoissonDrift, StablePlusPerturbation>;

//! Values of the truncated triplet functionals at one level epsilon.
struct TruncatedFunctionals {
    double gamma_bar = 0.0;    //!< gamma - int_{(-1,1) \ (-eps,eps)} x nu(dx)
    double sigma2_bar = 0.0;   //!< sigma^2 + int_{(-eps,eps)} x^2 nu(dx)
    double sigma2_plus = 0.0;  //!< int_{(0,eps)} x^2 nu(dx)
    double sigma2_minus = 0.0; //!< int_{(-eps,0)} x^2 nu(dx)
    double nu_bar = 0.0;       //!< nu(R \ (-eps,eps))
};

struct Triplet {
    double gamma = 0.0;
    double sigma2 = 0.0;
};

struct CdfValue {
    double value = 0.0;
    double error = 0.0;       //!< absolute error bound or Monte Carlo standard error
    bool monte_carlo = false;
    bool degraded = false;
};

namespace detail {

inline double jump_tail(const JumpLaw& j, double eps) {
    using boost::math::cdf;
    using boost::math::complement;
    switch (j.kind) {
    case JumpLaw::Kind::plus_minus:
        return std::abs(j.a) >= eps ? 1.0 : 0.0;
    case JumpLaw::Kind::normal: {
        boost::math::normal_distribution<> n(j.a, j.b);
        return cdf(n, -eps) + cdf(complement(n, eps));
    }
    case JumpLaw::Kind::exponential:
        return std::exp(-j.a * eps);
    }
    return 0.0;
}

// E[J^m ; J in (lo, hi)] for m = 1, 2
inline double jump_moment(const JumpLaw& j, int m, double lo, double hi) {
    if (!(hi > lo))
        return 0.0;
    switch (j.kind) {
    case JumpLaw::Kind::plus_minus: {
        double s = 0.0;
        for (double x : {j.a, -j.a})
            if (x > lo && x < hi)
                s += 0.5 * std::pow(x, m);
        return s;
    }
    case JumpLaw::Kind::normal: {
        const double mu = j.a, sd = j.b;
        const double za = (lo - mu) / sd, zb = (hi - mu) / sd;
        boost::math::normal_distribution<> n;
        auto pdf = [&](double z) { return std::isfinite(z) ? boost::math::pdf(n, z) : 0.0; };
        auto cdf = [&](double z) {
            return std::isfinite(z) ? boost::math::cdf(n, z) : (z > 0 ? 1.0 : 0.0);
        };
        const double p = cdf(zb) - cdf(za);
        const double m1 = pdf(za) - pdf(zb); // E[Z; a<Z<b]
        auto zpdf = [&](double z) { return std::isfinite(z) ? z * pdf(z) : 0.0; };
        const double m2 = p + zpdf(za) - zpdf(zb); // E[Z^2; a<Z<b]
        if (m == 1)
            return mu * p + sd * m1;
        return mu * mu * p + 2.0 * mu * sd * m1 + sd * sd * m2;
    }
    case JumpLaw::Kind::exponential: {
        const double r = j.a;
        const double a = std::max(lo, 0.0);
        if (!(hi > a))
            return 0.0;
        // integral of x^m r e^{-r x}
        auto prim = [&](double x) {
            if (!std::isfinite(x))
                return 0.0;
            const double e = std::exp(-r * x);
            if (m == 1)
                return -e * (x + 1.0 / r);
            return -e * (x * x + 2.0 * x / r + 2.0 / (r * r));
        };
        return prim(hi) - prim(a);
    }
    }
    return 0.0;
}

inline double sample_jump(const JumpLaw& j, RandomStream& rng) {
    switch (j.kind) {
    case JumpLaw::Kind::plus_minus:
        return rng.uniform() < 0.5 ? j.a : -j.a;
    case JumpLaw::Kind::normal: {
        boost::random::normal_distribution<double> n(j.a, j.b);
        return n(rng);
    }
    case JumpLaw::Kind::exponential:
        return -std::log(rng.uniform()) / j.a;
    }
    return 0.0;
}

} // namespace detail

/*!
 * Parametric Levy process.
 *
 * Immutable after construction. The generating triplet uses the truncation
 * function 1_{(-1,1)}(x).
 */
class LevyModel {
  public:
    LevyModel(ModelKind kind) : kind_(std::move(kind)) { validate(); } // NOLINT: implicit

    const ModelKind& kind() const noexcept { return kind_; }

    std::string kind_name() const {
        return std::visit(
            [](const auto& m) -> std::string {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, Brownian>)
                    return "brownian";
                else if constexpr (std::is_same_v<T, Stable>)
                    return "stable";
                else if constexpr (std::is_same_v<T, Cauchy>)
                    return "cauchy";
                else if constexpr (std::is_same_v<T, GammaSub>)
                    return "gamma";
                else if constexpr (std::is_same_v<T, CompoundPoissonDrift>)
                    return "compound_poisson";
                else
                    return "stable_plus_perturbation";
            },
            kind_);
    }

    //! Stable index of the small-time attractor (2 for Brownian, 0 for finite activity).
    double alpha() const {
        if (auto* s = std::get_if<Stable>(&kind_))
            return s->alpha;
        if (std::holds_alternative<Cauchy>(kind_))
            return 1.0;
        if (auto* s = std::get_if<StablePlusPerturbation>(&kind_))
            return s->base.alpha;
        if (std::holds_alternative<Brownian>(kind_))
            return 2.0;
        return 0.0;
    }

    //! lim P(X_t > 0) for stable-type models.
    double positivity() const {
        if (auto* s = std::get_if<Stable>(&kind_))
            return s->rho;
        if (auto* s = std::get_if<StablePlusPerturbation>(&kind_))
            return s->base.rho;
        if (auto* c = std::get_if<Cauchy>(&kind_))
            return 0.5 + std::atan(c->location / c->scale) / stable::pi;
        if (std::holds_alternative<Brownian>(kind_))
            return 0.5;
        throw CapabilityError("positivity parameter undefined for " + kind_name());
    }

    bool is_stable_like() const {
        return std::holds_alternative<Stable>(kind_) || std::holds_alternative<Cauchy>(kind_);
    }

    bool infinite_variation() const {
        if (std::holds_alternative<Brownian>(kind_) || std::holds_alternative<Cauchy>(kind_))
            return true;
        if (auto* s = std::get_if<Stable>(&kind_))
            return s->alpha >= 1.0;
        if (auto* s = std::get_if<StablePlusPerturbation>(&kind_))
            return s->base.alpha >= 1.0;
        return false;
    }

    //! Cauchy law of X_1 when the model is a (possibly drifted) 1-stable process.
    Cauchy as_cauchy() const {
        if (auto* c = std::get_if<Cauchy>(&kind_))
            return *c;
        if (auto* s = std::get_if<Stable>(&kind_); s && s->alpha == 1.0)
            return {s->scale, s->drift - s->scale * std::tan(stable::pi * (0.5 - s->rho))};
        throw CapabilityError("model is not a Cauchy process");
    }

    //! Natural drift lim X_t / t for finite-variation stable models.
    double natural_drift() const {
        if (auto* s = std::get_if<Stable>(&kind_); s && s->alpha < 1.0)
            return s->drift;
        if (auto* s = std::get_if<StablePlusPerturbation>(&kind_); s && s->base.alpha < 1.0)
            return s->base.drift + s->perturbation.drift;
        if (std::holds_alternative<GammaSub>(kind_))
            return 0.0;
        if (auto* c = std::get_if<CompoundPoissonDrift>(&kind_))
            return c->drift;
        throw CapabilityError("natural drift requires a finite-variation model");
    }

    //! E[X_1] for stable models with alpha > 1 and for Brownian motion.
    double mean() const {
        if (auto* s = std::get_if<Stable>(&kind_); s && s->alpha > 1.0)
            return s->drift;
        if (auto* b = std::get_if<Brownian>(&kind_))
            return b->drift;
        if (auto* g = std::get_if<GammaSub>(&kind_))
            return g->shape / g->rate;
        throw CapabilityError("mean not exposed for " + kind_name());
    }

    Triplet triplet() const {
        return std::visit([](const auto& m) { return triplet_of(m); }, kind_);
    }

    //! Closed-form truncated functionals at level eps > 0.
    TruncatedFunctionals truncated(double eps) const {
        CMLEVY_REQUIRE(eps > 0.0, ArgumentError, "truncation level must be positive");
        return std::visit([eps](const auto& m) { return truncated_of(m, eps); }, kind_);
    }

    //! Blumenthal-Getoor index; Brownian motion is assigned 2.
    double bg_index() const {
        if (std::holds_alternative<Brownian>(kind_))
            return 2.0;
        return alpha();
    }

    //! A draw of X_t.
    double sample_increment(double t, RandomStream& rng) const {
        CMLEVY_REQUIRE(t >= 0.0, ArgumentError, "increment duration must be non-negative");
        if (t == 0.0)
            return 0.0;
        return std::visit([&](const auto& m) { return increment_of(m, t, rng); }, kind_);
    }

    //! P(X_t <= x). Monte Carlo fallback uses n = 1e5 draws from a seed derived from (t, x).
    CdfValue marginal_cdf(double t, double x) const {
        CMLEVY_REQUIRE(t > 0.0, ArgumentError, "marginal_cdf requires t > 0");
        return std::visit([&](const auto& m) { return cdf_of(m, t, x); }, kind_);
    }

    //! P(X_t > x), accurate in the upper tail where available.
    double marginal_sf(double t, double x) const {
        CMLEVY_REQUIRE(t > 0.0, ArgumentError, "marginal_sf requires t > 0");
        if (auto* s = std::get_if<Stable>(&kind_); s && s->alpha != 1.0) {
            const double z = (x - s->drift * t) / (s->scale * std::pow(t, 1.0 / s->alpha));
            return stable::cdf_standard(s->alpha, skew(*s), z).upper;
        }
        if (is_cauchy_like()) {
            const Cauchy c = as_cauchy();
            return std::atan2(1.0, (x / t - c.location) / c.scale) / stable::pi;
        }
        return 1.0 - marginal_cdf(t, x).value;
    }

    //! P(X_t / t <= u) for the Cauchy-type models, where it does not depend on t.
    double cauchy_slope_cdf(double u) const {
        const Cauchy c = as_cauchy();
        return 0.5 + std::atan((u - c.location) / c.scale) / stable::pi;
    }

    bool is_cauchy_like() const {
        if (std::holds_alternative<Cauchy>(kind_))
            return true;
        auto* s = std::get_if<Stable>(&kind_);
        return s && s->alpha == 1.0;
    }

    static double skew(const Stable& s) { return stable::skew_from_positivity(s.alpha, s.rho); }

  private:
    void validate() const {
        std::visit([](const auto& m) { check(m); }, kind_);
    }

    static void check(const Brownian& b) {
        CMLEVY_REQUIRE(b.sigma > 0.0, ParameterError, "Brownian sigma must be positive");
    }
    static void check(const Stable& s) {
        CMLEVY_REQUIRE(s.alpha > 0.0 && s.alpha <= 2.0, ParameterError,
                       "stable index must lie in (0,2]");
        CMLEVY_REQUIRE(s.scale > 0.0, ParameterError, "stable scale must be positive");
        CMLEVY_REQUIRE(stable::admissible_positivity(s.alpha, s.rho), ParameterError,
                       "positivity parameter outside the admissible range for this index");
    }
    static void check(const Cauchy& c) {
        CMLEVY_REQUIRE(c.scale > 0.0, ParameterError, "Cauchy scale must be positive");
    }
    static void check(const GammaSub& g) {
        CMLEVY_REQUIRE(g.shape > 0.0 && g.rate > 0.0, ParameterError,
                       "gamma subordinator parameters must be positive");
    }
    static void check(const CompoundPoissonDrift& c) {
        CMLEVY_REQUIRE(c.rate > 0.0, ParameterError, "jump rate must be positive");
        if (c.jumps.kind == JumpLaw::Kind::normal)
            CMLEVY_REQUIRE(c.jumps.b > 0.0, ParameterError, "normal jump sd must be positive");
        if (c.jumps.kind == JumpLaw::Kind::exponential)
            CMLEVY_REQUIRE(c.jumps.a > 0.0, ParameterError, "exponential jump rate must be positive");
    }
    static void check(const StablePlusPerturbation& s) {
        check(s.base);
        check(s.perturbation);
    }

    // --- triplets

    static Triplet triplet_of(const Brownian& b) { return {b.drift, b.sigma * b.sigma}; }
    static Triplet triplet_of(const Stable& s) {
        if (s.alpha == 2.0)
            return {s.drift, 2.0 * s.scale * s.scale};
        if (s.alpha == 1.0)
            return {s.drift - s.scale * std::tan(stable::pi * (0.5 - s.rho)), 0.0};
        const double c = stable::levy_mass_constant(s.alpha, s.scale);
        const double diff = c * skew(s); // c_+ - c_-
        if (s.alpha < 1.0)
            return {s.drift + diff / (1.0 - s.alpha), 0.0};
        return {s.drift - diff / (s.alpha - 1.0), 0.0};
    }
    static Triplet triplet_of(const Cauchy& c) { return {c.location, 0.0}; }
    static Triplet triplet_of(const GammaSub& g) {
        return {g.shape * (-std::expm1(-g.rate)) / g.rate, 0.0};
    }
    static Triplet triplet_of(const CompoundPoissonDrift& c) {
        return {c.drift + c.rate * detail::jump_moment(c.jumps, 1, -1.0, 1.0), 0.0};
    }
    static Triplet triplet_of(const StablePlusPerturbation& s) {
        const Triplet a = triplet_of(s.base), b = triplet_of(s.perturbation);
        return {a.gamma + b.gamma, a.sigma2 + b.sigma2};
    }

    // --- truncated functionals

    static TruncatedFunctionals truncated_of(const Brownian& b, double) {
        TruncatedFunctionals f;
        f.gamma_bar = b.drift;
        f.sigma2_bar = b.sigma * b.sigma;
        return f;
    }
    static TruncatedFunctionals truncated_of(const Stable& s, double eps) {
        TruncatedFunctionals f;
        const Triplet tr = triplet_of(s);
        if (s.alpha == 2.0) {
            f.gamma_bar = tr.gamma;
            f.sigma2_bar = tr.sigma2;
            return f;
        }
        if (s.alpha == 1.0)
            return truncated_of(Cauchy{s.scale, tr.gamma}, eps);
        const double a = s.alpha;
        const double c = stable::levy_mass_constant(a, s.scale);
        const double beta = skew(s);
        const double cp = 0.5 * c * (1.0 + beta), cm = 0.5 * c * (1.0 - beta);
        f.nu_bar = c * std::pow(eps, -a) / a;
        f.sigma2_plus = cp * std::pow(eps, 2.0 - a) / (2.0 - a);
        f.sigma2_minus = cm * std::pow(eps, 2.0 - a) / (2.0 - a);
        f.sigma2_bar = f.sigma2_plus + f.sigma2_minus;
        const double e = std::min(eps, 1.0);
        // int_{e <= |x| < 1} x nu(dx) = (c_+ - c_-) int_e^1 x^{-alpha} dx
        const double mid = (cp - cm) * (1.0 - std::pow(e, 1.0 - a)) / (1.0 - a);
        f.gamma_bar = tr.gamma - mid;
        return f;
    }
    static TruncatedFunctionals truncated_of(const Cauchy& c, double eps) {
        TruncatedFunctionals f;
        const double k = c.scale / stable::pi; // c_+ = c_-
        f.nu_bar = 2.0 * k / eps;
        f.sigma2_plus = f.sigma2_minus = k * eps;
        f.sigma2_bar = 2.0 * k * eps;
        f.gamma_bar = c.location;
        return f;
    }
    static TruncatedFunctionals truncated_of(const GammaSub& g, double eps) {
        TruncatedFunctionals f;
        const double a = g.shape, b = g.rate;
        f.nu_bar = a * boost::math::expint(1, b * eps);
        f.sigma2_plus = a * (1.0 - std::exp(-b * eps) * (1.0 + b * eps)) / (b * b);
        f.sigma2_bar = f.sigma2_plus;
        const double e = std::min(eps, 1.0);
        f.gamma_bar = a * (-std::expm1(-b * e)) / b;
        return f;
    }
    static TruncatedFunctionals truncated_of(const CompoundPoissonDrift& c, double eps) {
        TruncatedFunctionals f;
        f.nu_bar = c.rate * detail::jump_tail(c.jumps, eps);
        f.sigma2_plus = c.rate * detail::jump_moment(c.jumps, 2, 0.0, eps);
        f.sigma2_minus = c.rate * detail::jump_moment(c.jumps, 2, -eps, 0.0);
        f.sigma2_bar = f.sigma2_plus + f.sigma2_minus;
        const double e = std::min(eps, 1.0);
        f.gamma_bar = c.drift + c.rate * detail::jump_moment(c.jumps, 1, -e, e);
        return f;
    }
    static TruncatedFunctionals truncated_of(const StablePlusPerturbation& s, double eps) {
        const auto a = truncated_of(s.base, eps), b = truncated_of(s.perturbation, eps);
        return {a.gamma_bar + b.gamma_bar, a.sigma2_bar + b.sigma2_bar,
                a.sigma2_plus + b.sigma2_plus, a.sigma2_minus + b.sigma2_minus,
                a.nu_bar + b.nu_bar};
    }

    // --- increments

    static double increment_of(const Brownian& b, double t, RandomStream& rng) {
        boost::random::normal_distribution<double> n(0.0, 1.0);
        return b.sigma * std::sqrt(t) * n(rng) + b.drift * t;
    }
    static double increment_of(const Stable& s, double t, RandomStream& rng) {
        if (s.alpha == 1.0)
            return increment_of(Cauchy{s.scale, triplet_of(s).gamma}, t, rng);
        return std::pow(t, 1.0 / s.alpha) * s.scale * stable::sample_standard(s.alpha, skew(s), rng) +
               s.drift * t;
    }
    static double increment_of(const Cauchy& c, double t, RandomStream& rng) {
        const double u = stable::pi * (rng.uniform() - 0.5);
        return t * (c.scale * std::tan(u) + c.location);
    }
    static double increment_of(const GammaSub& g, double t, RandomStream& rng) {
        boost::random::gamma_distribution<double> d(g.shape * t, 1.0 / g.rate);
        return d(rng);
    }
    static double increment_of(const CompoundPoissonDrift& c, double t, RandomStream& rng) {
        boost::random::poisson_distribution<long, double> p(c.rate * t);
        const long n = p(rng);
        double x = c.drift * t;
        for (long i = 0; i < n; ++i)
            x += detail::sample_jump(c.jumps, rng);
        return x;
    }
    static double increment_of(const StablePlusPerturbation& s, double t, RandomStream& rng) {
        return increment_of(s.base, t, rng) + increment_of(s.perturbation, t, rng);
    }

    // --- marginal laws

    static CdfValue cdf_of(const Brownian& b, double t, double x) {
        const double z = (x - b.drift * t) / (b.sigma * std::sqrt(t));
        return {0.5 * std::erfc(-z / std::sqrt(2.0)), 0.0};
    }
    static CdfValue cdf_of(const Stable& s, double t, double x) {
        if (s.alpha == 1.0)
            return cdf_of(Cauchy{s.scale, triplet_of(s).gamma}, t, x);
        const double z = (x - s.drift * t) / (s.scale * std::pow(t, 1.0 / s.alpha));
        const auto r = stable::cdf_standard(s.alpha, skew(s), z);
        return {r.lower, r.error, false, r.degraded};
    }
    static CdfValue cdf_of(const Cauchy& c, double t, double x) {
        const double z = (x / t - c.location) / c.scale;
        const double v = z <= 0.0 ? std::atan2(1.0, -z) / stable::pi
                                  : 1.0 - std::atan2(1.0, z) / stable::pi;
        return {v, 0.0};
    }
    static CdfValue cdf_of(const GammaSub& g, double t, double x) {
        if (x <= 0.0)
            return {0.0, 0.0};
        return {boost::math::gamma_p(g.shape * t, g.rate * x), 0.0};
    }
    template <class M>
    static CdfValue monte_carlo_cdf(const M& m, double t, double x) {
        constexpr int n = 100000;
        std::uint64_t key;
        static_assert(sizeof(double) == sizeof(std::uint64_t));
        std::memcpy(&key, &t, sizeof key);
        std::uint64_t kx;
        std::memcpy(&kx, &x, sizeof kx);
        RandomStream rng(mix_seed(key) ^ mix_seed(kx + 1));
        int hits = 0;
        for (int i = 0; i < n; ++i)
            hits += increment_of(m, t, rng) <= x ? 1 : 0;
        const double p = static_cast<double>(hits) / n;
        return {p, std::sqrt(std::max(p * (1.0 - p), 1e-12) / n), true};
    }
    static CdfValue cdf_of(const CompoundPoissonDrift& c, double t, double x) {
        return monte_carlo_cdf(c, t, x);
    }
    static CdfValue cdf_of(const StablePlusPerturbation& s, double t, double x) {
        return monte_carlo_cdf(s, t, x);
    }

    ModelKind kind_;
};

/*!
 * Discretised path on an increasing time grid starting at 0.
 */
struct SamplePath {
    enum class Interpolation { left_limits, linear };

    std::vector<double> times;
    std::vector<double> values;
    Interpolation interpolation = Interpolation::left_limits;

    std::size_t size() const noexcept { return times.size(); }
    double horizon() const { return times.empty() ? 0.0 : times.back(); }

    void validate() const {
        CMLEVY_REQUIRE(times.size() == values.size(), ArgumentError,
                       "path times and values differ in length");
        CMLEVY_REQUIRE(!times.empty(), ArgumentError, "empty path");
        for (std::size_t i = 1; i < times.size(); ++i)
            CMLEVY_REQUIRE(times[i] > times[i - 1], ArgumentError,
                           "path times must be strictly increasing");
    }
};

//! Skeleton of the model on n equally spaced points of [0,T], origin included.
inline SamplePath sample_path(const LevyModel& model, double horizon, std::size_t n,
                              RandomStream& rng) {
    CMLEVY_REQUIRE(n >= 2, ArgumentError, "sample_path needs n >= 2");
    CMLEVY_REQUIRE(horizon > 0.0, ArgumentError, "sample_path needs a positive horizon");
    SamplePath p;
    p.times.resize(n);
    p.values.resize(n);
    const double steps = static_cast<double>(n - 1);
    const double dt = horizon / steps;
    double x = 0.0;
    p.times[0] = 0.0;
    p.values[0] = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        x += model.sample_increment(dt, rng);
        p.times[k] = horizon * static_cast<double>(k) / steps;
        p.values[k] = x;
    }
    return p;
}

} // namespace cmlevy
