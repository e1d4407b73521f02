#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/random/gamma_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include "cmlevy/error.hpp"
#include "cmlevy/levy_model.hpp"
#include "cmlevy/minorant.hpp"
#include "cmlevy/quadrature.hpp"
#include "cmlevy/rng.hpp"

namespace cmlevy {

inline constexpr double inf = std::numeric_limits<double>::infinity();

//! P(a < X_t <= b), using upper tails on the positive side.
inline double interval_probability(const LevyModel& m, double t, double a, double b) {
    if (!(b > a))
        return 0.0;
    if (a >= 0.0) {
        const double sa = m.marginal_sf(t, a);
        const double sb = std::isfinite(b) ? m.marginal_sf(t, b) : 0.0;
        return std::max(sa - sb, 0.0);
    }
    const double fb = std::isfinite(b) ? m.marginal_cdf(t, b).value : 1.0;
    const double fa = std::isfinite(a) ? m.marginal_cdf(t, a).value : 0.0;
    return std::max(fb - fa, 0.0);
}

struct QuadPolicy {
    double shell_rel_tol = 1e-10;  //!< Gauss-Kronrod tolerance inside a shell
    double cutoff = 1e-12;         //!< stop once a shell adds less than this fraction
    int max_levels = 60;           //!< dyadic levels below 1/w before divergence is suspected
};

struct ExponentValue {
    double value = 0.0;
    double tolerance = 0.0;
    int shells = 0;
};

/*!
 * Integral of (1 - e^{-wt}) e^{-lambda t} p(t) dt / t over (0, inf) for a
 * probability-valued p, split into dyadic shells.
 */
template <class P>
ExponentValue frullani_type_integral(P&& p, double w, double lambda, const QuadPolicy& pol) {
    CMLEVY_REQUIRE(w >= 0.0, ArgumentError, "Laplace argument must be non-negative");
    ExponentValue out;
    if (w == 0.0)
        return out;
    auto integrand = [&](double t) {
        const double pr = p(t);
        if (pr <= 0.0)
            return 0.0;
        return -std::expm1(-w * t) * std::exp(-lambda * t) * pr / t;
    };
    auto shell = [&](double lo, double hi) {
        auto r = integrate_log(integrand, lo, hi, pol.shell_rel_tol);
        out.tolerance += r.error;
        ++out.shells;
        return r.value;
    };
    // pivot near the scale where both cutoffs are active
    int pivot = static_cast<int>(std::floor(std::log2(1.0 / std::max(w, lambda))));
    pivot = std::clamp(pivot, -1000, 1000);
    double total = 0.0;
    // upwards: tail bound int_T^inf e^{-lambda t} / t dt <= e^{-lambda T} / (lambda T)
    for (int j = pivot;; ++j) {
        const double lo = std::ldexp(1.0, j), hi = std::ldexp(1.0, j + 1);
        total += shell(lo, hi);
        const double bound = std::exp(-lambda * hi) / (lambda * hi);
        if (bound < pol.cutoff * std::max(total, 1e-300) || bound < 1e-300)
            break;
    }
    // downwards: remainder below 2^j is at most w 2^j
    const int wlev = static_cast<int>(std::ceil(std::log2(std::max(w, 1.0))));
    double prev = inf;
    int decaying = 0;
    for (int j = pivot - 1;; --j) {
        const double lo = std::ldexp(1.0, j), hi = std::ldexp(1.0, j + 1);
        const double s = shell(lo, hi);
        total += s;
        const double rem = w * lo;
        if ((s < pol.cutoff * total && rem < pol.cutoff * std::max(total, 1e-300)) ||
            (total == 0.0 && rem < 1e-300))
            break;
        if (s == 0.0 && rem * 1.0 < pol.cutoff * std::max(total, 1e-300))
            break;
        decaying = (s <= prev) ? decaying + 1 : 0;
        prev = s;
        if (-j > wlev + pol.max_levels) {
            if (decaying < 8)
                throw NumericError("shell sums are not decaying; divergence suspected", s);
            out.tolerance += rem;
            break;
        }
    }
    out.value = total;
    return out;
}

//! log(1 + w / lambda), the exponent with P(X_t <= ut) replaced by 1.
inline double phi_infinity(double w, double lambda) { return std::log1p(w / lambda); }

/*!
 * Laplace exponent of the vertex time process over an Exp(lambda) horizon.
 */
class LaplaceExponent {
  public:
    explicit LaplaceExponent(LevyModel model, double lambda = 1.0, QuadPolicy policy = {})
        : model_(std::move(model)), lambda_(lambda), policy_(policy) {
        CMLEVY_REQUIRE(lambda > 0.0, ParameterError, "horizon rate must be positive");
    }

    const LevyModel& model() const noexcept { return model_; }
    double lambda() const noexcept { return lambda_; }

    //! Phi_u(w) = int (1 - e^{-wt}) e^{-lambda t} P(X_t <= ut) dt / t.
    ExponentValue phi_detail(double u, double w) const {
        if (u == inf)
            return frullani_type_integral([](double) { return 1.0; }, w, lambda_, policy_);
        if (u == -inf)
            return {};
        return frullani_type_integral(
            [&](double t) { return model_.marginal_cdf(t, u * t).value; }, w, lambda_, policy_);
    }
    double phi(double u, double w) const { return phi_detail(u, w).value; }

    //! Psi over slopes (s, s+u]: one quadrature of the interval probability.
    ExponentValue psi_detail(double s, double u, double w) const {
        CMLEVY_REQUIRE(u >= 0.0, ArgumentError, "slope increment must be non-negative");
        return frullani_type_integral(
            [&](double t) { return interval_probability(model_, t, s * t, (s + u) * t); }, w,
            lambda_, policy_);
    }
    double psi_fs(double s, double u, double w) const { return psi_detail(s, u, w).value; }

  private:
    LevyModel model_;
    double lambda_;
    QuadPolicy policy_;
};

/*!
 * Mean jump measure of a non-decreasing additive process built from the
 * faces of the minorant: jump index (slope coordinate) and jump size (face
 * length t) with intensity e^{-lambda t} P(index in d. | t) dt / t.
 */
class MeanJumpMeasure {
  public:
    enum class Regime {
        fs,    //!< index u > 0 is the slope minus a base slope s
        is,    //!< index s > 0 is -t / X_t
        slope, //!< index is the slope X_t / t itself
    };

    static MeanJumpMeasure fs(LevyModel m, double s, double lambda = 1.0) {
        return MeanJumpMeasure(std::move(m), Regime::fs, s, lambda);
    }
    static MeanJumpMeasure is(LevyModel m, double lambda = 1.0) {
        return MeanJumpMeasure(std::move(m), Regime::is, 0.0, lambda);
    }
    static MeanJumpMeasure slope(LevyModel m, double lambda = 1.0) {
        return MeanJumpMeasure(std::move(m), Regime::slope, 0.0, lambda);
    }

    Regime regime() const noexcept { return regime_; }
    double base_slope() const noexcept { return base_; }
    double lambda() const noexcept { return lambda_; }
    const LevyModel& model() const noexcept { return model_; }

    //! Natural lower end of the index range.
    double index_min() const { return regime_ == Regime::slope ? -inf : 0.0; }

    //! P(index in (a, b] | size t).
    double index_probability(double t, double a, double b) const {
        a = std::max(a, index_min());
        if (!(b > a))
            return 0.0;
        switch (regime_) {
        case Regime::fs:
            return interval_probability(model_, t, (base_ + a) * t, (base_ + b) * t);
        case Regime::slope:
            return interval_probability(model_, t, a * t, b * t);
        case Regime::is: {
            // {a < -t/X_t <= b} = {-t/a < X_t <= -t/b}, X_t < 0
            const double lo = a > 0.0 ? -t / a : -inf;
            const double hi = std::isfinite(b) ? -t / b : 0.0;
            if (!std::isfinite(lo))
                return std::isfinite(b) ? model_.marginal_cdf(t, hi).value
                                        : model_.marginal_cdf(t, 0.0).value;
            return interval_probability(model_, t, lo, hi);
        }
        }
        return 0.0;
    }

    //! Intensity in the size variable: e^{-lambda t} P(index in (a,b] | t) / t.
    double size_density(double t, double a, double b) const {
        return std::exp(-lambda_ * t) * index_probability(t, a, b) / t;
    }

    //! Pi((a,b] x (t1,t2]); t2 may be infinite.
    double mass(double a, double b, double t1, double t2) const {
        CMLEVY_REQUIRE(t1 > 0.0, ArgumentError, "rectangle must stay away from zero size");
        const double top = std::isfinite(t2) ? t2 : size_cap();
        double total = 0.0;
        for (double lo = t1; lo < top;) {
            const double hi = std::min(2.0 * lo, top);
            total += integrate_log([&](double t) { return size_density(t, a, b); }, lo, hi, 1e-10).value;
            lo = hi;
        }
        return total;
    }

    //! int_0^floor t Pi((a,b], dt), the mean of the jumps below a size floor.
    double small_jump_mean(double a, double b, double floor) const {
        double total = 0.0;
        double hi = floor;
        for (int k = 0; k < 200; ++k) {
            const double lo = 0.5 * hi;
            const double s = integrate_log(
                [&](double t) { return t * size_density(t, a, b); }, lo, hi, 1e-8).value;
            total += s;
            if (s < 1e-14 * std::max(total, 1e-300) || hi < 1e-300)
                break;
            hi = lo;
        }
        return total;
    }

    //! Sizes beyond this carry relative mass below e^{-40}.
    double size_cap() const { return std::max(1.0, 40.0 / lambda_); }

    //! Psi_t(w) = int (1 - e^{-wx}) Pi((a,b], dx) with index range (a, b].
    double laplace_exponent(double a, double b, double w) const {
        QuadPolicy pol;
        return frullani_type_integral([&](double t) { return index_probability(t, a, b); }, w,
                                      lambda_, pol)
            .value;
    }

  private:
    MeanJumpMeasure(LevyModel m, Regime r, double base, double lambda)
        : model_(std::move(m)), regime_(r), base_(base), lambda_(lambda) {
        CMLEVY_REQUIRE(lambda > 0.0, ParameterError, "horizon rate must be positive");
    }

    LevyModel model_;
    Regime regime_;
    double base_;
    double lambda_;
};

struct Jump {
    double index = 0.0;
    double size = 0.0;
};

struct AdditiveSample {
    std::vector<Jump> jumps;  //!< sorted by index when indices were drawn
    double total = 0.0;       //!< sum of jump sizes, Y at the top of the index range
    double mass = 0.0;        //!< expected number of jumps above the floor
    double missed_mean = 0.0; //!< E of the discarded jumps below the floor
    bool has_indices = false;
};

/*!
 * Poisson random measure sampler for one index range and size floor.
 *
 * The size axis is cut into geometric cells (64 per octave); cell masses are
 * tabulated once by 7-point Gauss rules and individual sizes are drawn by
 * inverting a log-linear density inside the chosen cell.
 */
class AdditiveSampler {
  public:
    AdditiveSampler(const MeanJumpMeasure& measure, double a, double b, double size_floor,
                    int cells_per_octave = 64)
        : measure_(&measure), a_(std::max(a, measure.index_min())), b_(b), floor_(size_floor) {
        CMLEVY_REQUIRE(size_floor > 0.0, ArgumentError, "size floor must be positive");
        if (!(b_ > a_)) {
            edges_ = {floor_};
            return;
        }
        const double cap = measure.size_cap();
        const double ratio = std::exp2(1.0 / cells_per_octave);
        for (double t = floor_; t < cap * ratio; t *= ratio)
            edges_.push_back(t);
        weights_.resize(edges_.size());
        for (std::size_t i = 0; i < edges_.size(); ++i)
            weights_[i] = std::exp(-measure.lambda() * edges_[i]) *
                          measure.index_probability(edges_[i], a_, b_); // density in log t
        cumulative_.assign(edges_.size(), 0.0);
        for (std::size_t i = 0; i + 1 < edges_.size(); ++i) {
            const double lo = std::log(edges_[i]), hi = std::log(edges_[i + 1]);
            const double m = boost::math::quadrature::gauss<double, 7>::integrate(
                [&](double y) {
                    const double t = std::exp(y);
                    return std::exp(-measure.lambda() * t) * measure.index_probability(t, a_, b_);
                },
                lo, hi);
            cumulative_[i + 1] = cumulative_[i] + m;
        }
        mass_ = cumulative_.back();
        CMLEVY_REQUIRE(std::isfinite(mass_), ArgumentError,
                       "infinite jump mass at this floor; raise the size floor");
        missed_ = measure.small_jump_mean(a_, b_, floor_);
    }

    double mass() const noexcept { return mass_; }
    double missed_mean() const noexcept { return missed_; }

    AdditiveSample sample(RandomStream& rng, bool with_indices = false) const {
        AdditiveSample out;
        out.mass = mass_;
        out.missed_mean = missed_;
        out.has_indices = with_indices;
        if (mass_ <= 0.0)
            return out;
        boost::random::poisson_distribution<long, double> pois(mass_);
        const long n = pois(rng);
        out.jumps.reserve(static_cast<std::size_t>(n));
        for (long i = 0; i < n; ++i) {
            Jump j;
            j.size = draw_size(rng);
            j.index = with_indices ? draw_index(j.size, rng) : std::numeric_limits<double>::quiet_NaN();
            out.total += j.size;
            out.jumps.push_back(j);
        }
        if (with_indices)
            std::sort(out.jumps.begin(), out.jumps.end(),
                      [](const Jump& x, const Jump& y) { return x.index < y.index; });
        return out;
    }

  private:
    double draw_size(RandomStream& rng) const {
        const double target = rng.uniform() * mass_;
        auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
        std::size_t i = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
        i = std::clamp<std::size_t>(i, 1, cumulative_.size() - 1) - 1;
        const double y0 = std::log(edges_[i]), y1 = std::log(edges_[i + 1]);
        const double g0 = weights_[i], g1 = weights_[i + 1];
        const double v = rng.uniform();
        // inverse of a linear density g0 + (g1 - g0) x on [0,1]
        double x;
        if (std::abs(g1 - g0) < 1e-12 * std::max(g0, g1))
            x = v;
        else {
            const double area = 0.5 * (g0 + g1);
            x = (-g0 + std::sqrt(g0 * g0 + 2.0 * (g1 - g0) * v * area)) / (g1 - g0);
        }
        return std::exp(y0 + std::clamp(x, 0.0, 1.0) * (y1 - y0));
    }

    double draw_index(double t, RandomStream& rng) const {
        const double total = measure_->index_probability(t, a_, b_);
        const double target = rng.uniform() * total;
        double lo = a_, hi = b_;
        if (!std::isfinite(lo)) {
            lo = std::isfinite(hi) ? hi - 1.0 : -1.0;
            while (measure_->index_probability(t, a_, lo) > target)
                lo -= 2.0 * (std::abs(lo) + 1.0);
        }
        if (!std::isfinite(hi)) {
            hi = lo + 1.0;
            while (measure_->index_probability(t, a_, hi) < target)
                hi += 2.0 * (std::abs(hi) + 1.0);
        }
        for (int k = 0; k < 100 && hi - lo > 1e-4 * std::max(1e-12, std::abs(lo) + std::abs(hi)); ++k) {
            const double mid = 0.5 * (lo + hi);
            if (measure_->index_probability(t, a_, mid) < target)
                lo = mid;
            else
                hi = mid;
        }
        return 0.5 * (lo + hi);
    }

    const MeanJumpMeasure* measure_;
    double a_, b_, floor_;
    std::vector<double> edges_, weights_, cumulative_;
    double mass_ = 0.0;
    double missed_ = 0.0;
};

//! One realisation of the additive process on the index range (a, b].
inline AdditiveSample sample_additive(const MeanJumpMeasure& measure, double a, double b,
                                      double size_floor, RandomStream& rng,
                                      bool with_indices = true) {
    AdditiveSampler s(measure, a, b, size_floor);
    return s.sample(rng, with_indices);
}

//! Y at index x for a jump list sorted by index.
inline double additive_value(const std::vector<Jump>& jumps, double x) {
    double y = 0.0;
    for (const auto& j : jumps) {
        if (j.index > x)
            break;
        y += j.size;
    }
    return y;
}

//! Parameters (c, mu) with P(X_1 <= u) = 1/2 + atan(c u + mu) / pi for a Cauchy model.
struct CauchyTimeChange {
    double c = 1.0;
    double mu = 0.0;

    static CauchyTimeChange from_model(const LevyModel& m) {
        const Cauchy k = m.as_cauchy();
        return {1.0 / k.scale, -k.location / k.scale};
    }
    double cdf(double u) const {
        if (u == inf)
            return 1.0;
        if (u == -inf)
            return 0.0;
        const double z = c * u + mu;
        return z <= 0.0 ? std::atan2(1.0, -z) / stable::pi : 1.0 - std::atan2(1.0, z) / stable::pi;
    }
    double quantile(double p) const { return (std::tan(stable::pi * (p - 0.5)) - mu) / c; }
};

//! Gamma(shape, rate) draw that stays finite for vanishing shapes.
inline double sample_gamma(double shape, double rate, RandomStream& rng) {
    if (shape <= 0.0)
        return 0.0;
    boost::random::gamma_distribution<double> g(shape, 1.0 / rate);
    return g(rng);
}

/*!
 * Vertex time process of a Cauchy process over an Exp(lambda) horizon,
 * sampled exactly on an increasing slope grid: a gamma subordinator with
 * exponent log(1 + w/lambda) per unit time, run on the clock u -> P(X_1 <= u).
 */
inline std::vector<double> sample_vertex_cauchy(double lambda, double c, double mu,
                                                const std::vector<double>& u_grid,
                                                RandomStream& rng) {
    CMLEVY_REQUIRE(lambda > 0.0 && c > 0.0, ParameterError, "lambda and c must be positive");
    CauchyTimeChange tc{c, mu};
    std::vector<double> tau(u_grid.size());
    double clock = 0.0, y = 0.0;
    for (std::size_t i = 0; i < u_grid.size(); ++i) {
        if (i > 0)
            CMLEVY_REQUIRE(u_grid[i] >= u_grid[i - 1], ArgumentError, "slope grid must be sorted");
        const double next = tc.cdf(u_grid[i]);
        y += sample_gamma(std::max(next - clock, 0.0), lambda, rng);
        clock = std::max(clock, next);
        tau[i] = y;
    }
    return tau;
}

/*!
 * Minorant faces implied by the exact Cauchy vertex process on a slope grid.
 *
 * Slopes are rounded up to the grid; the mass beyond the last grid point
 * becomes one face whose slope is the conditional median of that region.
 */
inline ConvexMinorant cauchy_exact_minorant(double lambda, const CauchyTimeChange& tc,
                                            const std::vector<double>& u_grid, RandomStream& rng) {
    std::vector<Face> faces;
    faces.reserve(u_grid.size() + 1);
    double clock = 0.0, start = 0.0;
    auto push = [&](double len, double slope) {
        if (len <= 0.0)
            return;
        faces.push_back({start, len, slope});
        start += len;
    };
    for (double u : u_grid) {
        const double next = tc.cdf(u);
        push(sample_gamma(std::max(next - clock, 0.0), lambda, rng), u);
        clock = std::max(clock, next);
    }
    if (clock < 1.0)
        push(sample_gamma(1.0 - clock, lambda, rng), tc.quantile(0.5 * (clock + 1.0)));
    return {std::move(faces), start};
}

struct LaplaceMatch {
    double estimate = 0.0; //!< -log mean e^{-wY}
    double se = 0.0;       //!< delta-method standard error
    double z = 0.0;
};

//! z-score of the empirical Laplace exponent against a target value.
inline LaplaceMatch laplace_match(const std::vector<double>& samples, double target, double w) {
    CMLEVY_REQUIRE(!samples.empty(), ArgumentError, "laplace_match needs samples");
    const double n = static_cast<double>(samples.size());
    double mean = 0.0, m2 = 0.0;
    for (double y : samples) {
        const double e = std::exp(-w * y);
        mean += e;
        m2 += e * e;
    }
    mean /= n;
    const double var = std::max(m2 / n - mean * mean, 0.0) * n / std::max(n - 1.0, 1.0);
    LaplaceMatch out;
    out.estimate = -std::log(mean);
    out.se = std::sqrt(var / n) / mean;
    const double diff = out.estimate - target;
    if (out.se == 0.0)
        out.z = std::abs(diff) < 1e-12 * std::max(1.0, std::abs(target)) ? 0.0 : std::copysign(inf, diff);
    else
        out.z = diff / out.se;
    return out;
}

} // namespace cmlevy
