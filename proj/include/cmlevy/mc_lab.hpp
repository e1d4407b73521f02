#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "cmlevy/error.hpp"
#include "cmlevy/levy_model.hpp"
#include "cmlevy/minorant.hpp"
#include "cmlevy/rng.hpp"
#include "cmlevy/stats.hpp"
#include "cmlevy/test_function.hpp"
#include "cmlevy/vertex_law.hpp"

namespace cmlevy {

enum class Regime {
    fs, //!< (C'_{t + tau_s} - s) / f(t) just after the vertex time at slope s
    is  //!< |C'_t| f(t) just after time 0
};

enum class Extremum { sup, inf };

enum class SamplerKind { grid_hull, stick_breaking, cauchy_exact };

inline const char* to_string(Regime r) { return r == Regime::fs ? "fs" : "is"; }
inline const char* to_string(Extremum e) { return e == Extremum::sup ? "sup" : "inf"; }
inline const char* to_string(SamplerKind k) {
    switch (k) {
    case SamplerKind::grid_hull:
        return "grid-hull";
    case SamplerKind::stick_breaking:
        return "stick-breaking";
    case SamplerKind::cauchy_exact:
        return "cauchy-exact";
    }
    return "grid-hull";
}

struct SamplerSpec {
    SamplerKind kind = SamplerKind::grid_hull;
    int size = 1 << 16; //!< grid steps for grid-hull, faces for stick-breaking; unused for cauchy-exact
};

struct FluctuationOptions {
    Regime regime = Regime::is;
    double s = 0.0;
    Extremum extremum = Extremum::sup;
    SamplerSpec sampler{};
    Horizon horizon = Horizon::fixed(1.0);
    int k_min = 4;
    int k_max = 14;
    int n_paths = 500;
    int threads = 1;
    //! Accept an FS slope outside the built-in table of right-limit slopes.
    bool override_slope_registry = false;
};

/*!
 * Per-path extrema over dyadic blocks [2^{-k-1}, 2^{-k}] and the running
 * extrema over (2^{-k_max-1}, 2^{-k}], for k = k_min..k_max. NaN marks a
 * block the path does not reach.
 */
struct FluctuationStatistic {
    Regime regime = Regime::is;
    double s = 0.0;
    Extremum extremum = Extremum::sup;
    int k_min = 4, k_max = 14;
    std::vector<std::vector<double>> block;   //!< [path][k - k_min]
    std::vector<std::vector<double>> running; //!< [path][k - k_min]

    int levels() const { return k_max - k_min + 1; }
    std::size_t paths() const { return block.size(); }

    //! Quantile q across paths at each level, NaN entries skipped.
    std::vector<double> quantiles(double q, bool use_running = false) const {
        const auto& src = use_running ? running : block;
        std::vector<double> out(static_cast<std::size_t>(levels()), NAN);
        std::vector<double> col;
        for (int j = 0; j < levels(); ++j) {
            col.clear();
            for (const auto& row : src)
                if (std::isfinite(row[j]))
                    col.push_back(row[j]);
            if (!col.empty())
                out[j] = stats::quantile(col, q);
        }
        return out;
    }
    std::vector<double> medians(bool use_running = false) const { return quantiles(0.5, use_running); }
};

namespace detail {

inline void fill_running(FluctuationStatistic& st, std::size_t i) {
    const int n = st.levels();
    auto& run = st.running[i];
    run.assign(static_cast<std::size_t>(n), NAN);
    double acc = NAN;
    for (int j = n - 1; j >= 0; --j) {
        const double b = st.block[i][j];
        if (std::isfinite(b))
            acc = std::isfinite(acc) ? (st.extremum == Extremum::sup ? std::max(acc, b) : std::min(acc, b)) : b;
        run[j] = acc;
    }
}

template <class F>
void parallel_paths(int n_paths, int threads, F&& work) {
    const int nt = std::max(1, std::min(threads, n_paths));
    if (nt == 1) {
        for (int i = 0; i < n_paths; ++i)
            work(i);
        return;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < nt; ++w)
        pool.emplace_back([&, w] {
            for (int i = w; i < n_paths; i += nt)
                work(i);
        });
    for (auto& th : pool)
        th.join();
}

} // namespace detail

/*!
 * Block extrema of the regime's statistic for one minorant.
 */
inline std::vector<double> block_extrema(const ConvexMinorant& cm, Regime regime, double s, Extremum ext,
                                         const std::function<double(double)>& f, double f_top, int k_min,
                                         int k_max) {
    const auto& faces = cm.faces();
    std::size_t j0 = 0;
    double origin = 0.0;
    if (regime == Regime::fs) {
        const auto q = vertex_time(cm, s);
        j0 = q.face_index;
        origin = q.tau;
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(k_max - k_min + 1));
    for (int k = k_min; k <= k_max; ++k) {
        const double lo = std::ldexp(1.0, -k - 1), hi = std::ldexp(1.0, -k);
        double best = NAN;
        if (hi <= f_top && origin + hi <= cm.horizon()) {
            for (std::size_t j = j0; j < faces.size(); ++j) {
                const double a = faces[j].start - origin, b = faces[j].end() - origin;
                if (a > hi)
                    break;
                if (b < lo)
                    continue;
                const double l = std::max(a, lo), r = std::min(b, hi);
                double v;
                if (regime == Regime::is) {
                    // |slope| f(t) increases in t
                    const double t = ext == Extremum::sup ? r : l;
                    v = std::abs(faces[j].slope) * f(t);
                } else {
                    // (slope - s) / f(t) decreases in t
                    const double t = ext == Extremum::sup ? l : r;
                    v = (faces[j].slope - s) / f(t);
                }
                if (!std::isfinite(best))
                    best = v;
                else
                    best = ext == Extremum::sup ? std::max(best, v) : std::min(best, v);
            }
        }
        out.push_back(best);
    }
    return out;
}

/*!
 * Slope grid for the exact Cauchy sampler: geometric in P(X_1 <= u) near
 * both ends, uniform in between, plus a geometric cluster just above s.
 */
inline std::vector<double> cauchy_slope_grid(const CauchyTimeChange& tc, double s, bool cluster_at_s) {
    std::vector<double> u;
    for (double p = 1e-12; p < 0.01; p *= 1.01) {
        u.push_back(tc.quantile(p));
        u.push_back(tc.quantile(1.0 - p));
    }
    for (double p = 0.01; p <= 0.99 + 1e-12; p += 0.0005)
        u.push_back(tc.quantile(p));
    if (cluster_at_s) {
        u.push_back(s);
        for (double d = 1e-9; d < 1.0; d *= 1.01)
            u.push_back(s + d);
    }
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
    return u;
}

//! Draws one minorant of the model with the requested sampler.
using MinorantSampler = std::function<ConvexMinorant(RandomStream&)>;

inline MinorantSampler make_sampler(const LevyModel& model, const SamplerSpec& spec, Horizon horizon,
                                    Regime regime, double s) {
    switch (spec.kind) {
    case SamplerKind::grid_hull:
        CMLEVY_REQUIRE(spec.size >= 1, ArgumentError, "grid-hull needs at least one step");
        return [model, spec, horizon](RandomStream& rng) {
            double T = horizon.value;
            if (horizon.kind == Horizon::Kind::exponential)
                T = -std::log(rng.uniform()) / horizon.value;
            return convex_minorant(sample_path(model, T, static_cast<std::size_t>(spec.size) + 1, rng));
        };
    case SamplerKind::stick_breaking:
        return [model, spec, horizon](RandomStream& rng) {
            return stick_breaking_minorant(model, horizon, spec.size, rng).minorant;
        };
    case SamplerKind::cauchy_exact: {
        CMLEVY_REQUIRE(model.is_cauchy_like(), CapabilityError, "the exact sampler needs a Cauchy model");
        const auto tc = CauchyTimeChange::from_model(model);
        auto grid = std::make_shared<std::vector<double>>(cauchy_slope_grid(tc, s, regime == Regime::fs));
        return [tc, grid, horizon](RandomStream& rng) {
            const double lambda = horizon.kind == Horizon::Kind::exponential ? horizon.value : 1.0;
            ConvexMinorant cm = cauchy_exact_minorant(lambda, tc, *grid, rng);
            if (horizon.kind == Horizon::Kind::exponential)
                return cm;
            // the gamma process normalised by its total is the fixed-horizon law
            const double scale = horizon.value / cm.horizon();
            std::vector<Face> faces = cm.faces();
            for (auto& f : faces) {
                f.start *= scale;
                f.length *= scale;
            }
            return ConvexMinorant(std::move(faces), horizon.value);
        };
    }
    }
    throw ArgumentError("unknown sampler");
}

//! Slopes s at which the right-limit set of face slopes is known to contain s.
inline bool fs_slope_registered(const LevyModel& model, double s) {
    if (model.is_cauchy_like())
        return true;
    if (auto* st = std::get_if<Stable>(&model.kind()); st && st->alpha < 1.0)
        return s == st->drift;
    return false;
}

inline void check_regime(const LevyModel& model, const FluctuationOptions& opt) {
    if (opt.regime == Regime::is)
        CMLEVY_REQUIRE(model.infinite_variation(), PreconditionError,
                       "the time-0 regime needs a process of infinite variation");
    else
        CMLEVY_REQUIRE(opt.override_slope_registry || fs_slope_registered(model, opt.s), PreconditionError,
                       "slope s is not a known right-limit slope for this model (stable alpha < 1 only at the "
                       "natural drift, Cauchy at any s); pass the override flag to proceed");
    CMLEVY_REQUIRE(opt.k_max >= opt.k_min && opt.k_min >= 0, ArgumentError, "need k_min <= k_max");
    CMLEVY_REQUIRE(opt.n_paths >= 1, ArgumentError, "need at least one path");
}

/*!
 * Monte Carlo statistic with a caller-supplied minorant sampler. Path i uses
 * rng.child(i), so results do not depend on the thread count.
 */
inline FluctuationStatistic estimate_fluctuation(const MinorantSampler& sampler, const TestFunction& f,
                                                 const FluctuationOptions& opt, const RandomStream& rng) {
    FluctuationStatistic st;
    st.regime = opt.regime;
    st.s = opt.s;
    st.extremum = opt.extremum;
    st.k_min = opt.k_min;
    st.k_max = opt.k_max;
    st.block.resize(static_cast<std::size_t>(opt.n_paths));
    st.running.resize(static_cast<std::size_t>(opt.n_paths));
    const double top = f.domain_max();
    auto fv = [&f](double t) { return f(t); };
    detail::parallel_paths(opt.n_paths, opt.threads, [&](int i) {
        RandomStream r = rng.child(static_cast<std::uint64_t>(i));
        const ConvexMinorant cm = sampler(r);
        st.block[i] = block_extrema(cm, opt.regime, opt.s, opt.extremum, fv, top, opt.k_min, opt.k_max);
        detail::fill_running(st, static_cast<std::size_t>(i));
    });
    return st;
}

inline FluctuationStatistic estimate_fluctuation(const LevyModel& model, const TestFunction& f,
                                                 const FluctuationOptions& opt, const RandomStream& rng) {
    check_regime(model, opt);
    return estimate_fluctuation(make_sampler(model, opt.sampler, opt.horizon, opt.regime, opt.s), f, opt, rng);
}

enum class Trend { trend_zero, trend_infinity, indeterminate };

inline const char* to_string(Trend t) {
    switch (t) {
    case Trend::trend_zero:
        return "trend_zero";
    case Trend::trend_infinity:
        return "trend_infinity";
    case Trend::indeterminate:
        return "indeterminate";
    }
    return "indeterminate";
}

struct TrendResult {
    Trend trend = Trend::indeterminate;
    double slope = 0.0;      //!< least-squares slope of log(median) per level
    double confidence = 0.0; //!< share of bootstrap resamples giving the same trend
    std::vector<double> medians;
};

//! Trend of log(values) against level; NaN and non-positive entries are skipped.
inline std::pair<Trend, double> classify_levels(const std::vector<double>& values, double theta = 0.05) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (!(values[j] > 0.0) || !std::isfinite(values[j]))
            continue;
        const double x = static_cast<double>(j), y = std::log(values[j]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 4)
        return {Trend::indeterminate, 0.0};
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    if (slope < -theta)
        return {Trend::trend_zero, slope};
    if (slope > theta)
        return {Trend::trend_infinity, slope};
    return {Trend::indeterminate, slope};
}

/*!
 * Log-linear trend of the per-level medians of the block extrema, with a
 * path bootstrap for the confidence.
 */
inline TrendResult regime_classify(const FluctuationStatistic& st, double theta = 0.05, int n_boot = 200,
                                   std::uint64_t seed = 0, bool use_running = false) {
    CMLEVY_REQUIRE(st.levels() >= 4, ArgumentError, "the classifier needs at least four levels");
    TrendResult out;
    out.medians = st.medians(use_running);
    std::tie(out.trend, out.slope) = classify_levels(out.medians, theta);
    if (n_boot <= 0 || st.paths() == 0)
        return out;
    const auto& src = use_running ? st.running : st.block;
    RandomStream rng(seed);
    const std::size_t n = st.paths();
    std::vector<double> col, med(static_cast<std::size_t>(st.levels()));
    std::vector<std::size_t> pick(n);
    int agree = 0;
    for (int b = 0; b < n_boot; ++b) {
        for (auto& p : pick)
            p = static_cast<std::size_t>(rng() % n);
        for (int j = 0; j < st.levels(); ++j) {
            col.clear();
            for (std::size_t p : pick)
                if (std::isfinite(src[p][j]))
                    col.push_back(src[p][j]);
            med[j] = col.empty() ? NAN : stats::median(col);
        }
        agree += classify_levels(med, theta).first == out.trend ? 1 : 0;
    }
    out.confidence = static_cast<double>(agree) / n_boot;
    return out;
}

//! f_tilde(i dt) = int_0^{i dt} f for i = 0..count, one quadrature panel per step.
inline std::vector<double> grid_primitive(const TestFunction& f, double dt, std::size_t count) {
    std::vector<double> cum(count + 1, 0.0);
    if (count == 0)
        return cum;
    cum[1] = f.integral(dt);
    for (std::size_t i = 2; i <= count; ++i)
        cum[i] = cum[i - 1] + integrate([&f](double u) { return f(u); }, (i - 1) * dt, i * dt, 1e-12).value;
    return cum;
}

struct MeanderOptions {
    int grid_steps = 1 << 16;
    int k_min = 4;
    int k_max = 14;
    int n_paths = 500;
    int threads = 1;
};

/*!
 * Block infima over [2^{-k-1}, 2^{-k}] of y(t) / f_tilde(t) for a path
 * y re-rooted at a vertex (times starting at 0).
 */
inline std::vector<double> meander_blocks(const SamplePath& shifted, const std::function<double(double)>& f_tilde,
                                          int k_min, int k_max) {
    std::vector<double> out;
    for (int k = k_min; k <= k_max; ++k) {
        const double lo = std::ldexp(1.0, -k - 1), hi = std::ldexp(1.0, -k);
        double best = NAN;
        if (shifted.horizon() >= hi) {
            auto it = std::lower_bound(shifted.times.begin(), shifted.times.end(), lo);
            for (; it != shifted.times.end() && *it <= hi; ++it) {
                const std::size_t i = static_cast<std::size_t>(it - shifted.times.begin());
                const double v = shifted.values[i] / f_tilde(*it);
                best = std::isfinite(best) ? std::min(best, v) : v;
            }
        }
        out.push_back(best);
    }
    return out;
}

/*!
 * Post-minimum growth statistic: block infima of (X_{t+tau_s} - m_s - s t) / f_tilde(t)
 * at the natural drift s of a stable process with alpha < 1.
 */
inline FluctuationStatistic meander_growth(const LevyModel& model, const std::function<double(double)>& f_tilde,
                                           const MeanderOptions& opt, const RandomStream& rng) {
    const auto* st = std::get_if<Stable>(&model.kind());
    CMLEVY_REQUIRE(st && st->alpha < 1.0, PreconditionError, "meander growth needs a stable process with alpha < 1");
    CMLEVY_REQUIRE(opt.grid_steps >= 2 && opt.k_max >= opt.k_min, ArgumentError, "bad meander options");
    const double s = model.natural_drift();
    const double dt = 1.0 / opt.grid_steps;
    // f_tilde is only needed at grid times up to 2^{-k_min}
    const std::size_t need = static_cast<std::size_t>(std::ceil(std::ldexp(1.0, -opt.k_min) / dt)) + 1;
    std::vector<double> table(need + 1);
    for (std::size_t i = 1; i <= need; ++i)
        table[i] = f_tilde(static_cast<double>(i) * dt);
    auto lookup = [&](double t) { return table[static_cast<std::size_t>(std::llround(t / dt))]; };

    FluctuationStatistic out;
    out.regime = Regime::fs;
    out.s = s;
    out.extremum = Extremum::inf;
    out.k_min = opt.k_min;
    out.k_max = opt.k_max;
    out.block.resize(static_cast<std::size_t>(opt.n_paths));
    out.running.resize(static_cast<std::size_t>(opt.n_paths));
    detail::parallel_paths(opt.n_paths, opt.threads, [&](int i) {
        RandomStream r = rng.child(static_cast<std::uint64_t>(i));
        SamplePath p = sample_path(model, 1.0, static_cast<std::size_t>(opt.grid_steps) + 1, r);
        for (std::size_t j = 0; j < p.size(); ++j)
            p.values[j] -= s * p.times[j];
        PostMinimum pm = post_minimum(p);
        // re-rooted times are differences of grid times; snap them back to the grid
        for (auto& t : pm.shifted.times)
            t = std::llround(t / dt) * dt;
        out.block[i] = meander_blocks(pm.shifted, lookup, opt.k_min, opt.k_max);
        detail::fill_running(out, static_cast<std::size_t>(i));
    });
    return out;
}

//! Same statistic with f_tilde(t) = int_0^t 1/G(u log^p(1/u)) du.
inline FluctuationStatistic meander_growth(const LevyModel& model, double p, const MeanderOptions& opt,
                                           const RandomStream& rng) {
    const auto* st = std::get_if<Stable>(&model.kind());
    CMLEVY_REQUIRE(st && st->alpha < 1.0, PreconditionError, "meander growth needs a stable process with alpha < 1");
    const TestFunction f = TestFunction::g_inverse_log(st->alpha, st->scale, p);
    const double dt = 1.0 / opt.grid_steps;
    const std::size_t need = static_cast<std::size_t>(std::ceil(std::ldexp(1.0, -opt.k_min) / dt)) + 1;
    const std::vector<double> cum = grid_primitive(f, dt, need);
    auto ft = [cum, dt](double t) {
        const std::size_t i = static_cast<std::size_t>(std::llround(t / dt));
        return i < cum.size() ? cum[i] : NAN;
    };
    return meander_growth(model, ft, opt, rng);
}

struct PathwiseReport {
    int paths = 0;
    int checks = 0;     //!< (path, level) pairs where the premise held
    int violations = 0; //!< of those, conclusions that failed beyond the slack
};

/*!
 * Finite-level shadow of the pathwise integration bound after tau_s: with
 * M = inf over (0, 2^{-k}] of (C'_{tau_s + r} - s)/f(r) > 0, every grid time
 * t in (0, 2^{-k}] must satisfy X_{tau_s + t} - m_s - s t >= M f_tilde(t - slack).
 */
inline void pathwise_check_fs(const SamplePath& path, double s, const std::function<double(double)>& f,
                              const std::function<double(double)>& f_tilde, int k_min, int k_max, double slack,
                              PathwiseReport& rep) {
    const ConvexMinorant cm = convex_minorant(path);
    const auto q = vertex_time(cm, s);
    if (q.face_index >= cm.size())
        return;
    const double tau = q.tau;
    const std::size_t i0 = static_cast<std::size_t>(
        std::lower_bound(path.times.begin(), path.times.end(), tau - 1e-12 * std::max(1.0, tau)) -
        path.times.begin());
    const double m = path.values[i0];
    const auto& faces = cm.faces();
    for (int k = k_min; k <= k_max; ++k) {
        const double hi = std::ldexp(1.0, -k);
        if (tau + hi > cm.horizon())
            continue;
        // (slope - s)/f(r) decreases on each face, so the infimum sits at right ends
        double M = INFINITY;
        for (std::size_t j = q.face_index; j < faces.size(); ++j) {
            const double a = faces[j].start - tau;
            if (a >= hi)
                break;
            const double r = std::min(faces[j].end() - tau, hi);
            M = std::min(M, (faces[j].slope - s) / f(r));
        }
        if (!(M > 0.0) || !std::isfinite(M))
            continue;
        ++rep.checks;
        for (std::size_t i = i0 + 1; i < path.size() && path.times[i] - tau <= hi * (1 + 1e-12); ++i) {
            const double t = path.times[i] - tau;
            const double lhs = path.values[i] - m - s * t;
            if (lhs < M * f_tilde(std::max(t - slack, 0.0)) * (1.0 - 1e-9)) {
                ++rep.violations;
                break;
            }
        }
    }
}

/*!
 * The same implication on simulated grid paths of the model on [0,1];
 * slack is measured in grid cells.
 */
inline PathwiseReport pathwise_bound_check(const LevyModel& model, double s, const TestFunction& f, int n_paths,
                                           const RandomStream& rng, int grid_steps = 1 << 14, int k_min = 4,
                                           int k_max = 12, double slack_cells = 2.0) {
    PathwiseReport rep;
    const double dt = 1.0 / grid_steps;
    auto fv = [&f](double t) { return f(t); };
    const std::size_t need = static_cast<std::size_t>(std::ceil(std::ldexp(1.0, -k_min) / dt)) + 1;
    const std::vector<double> cum = grid_primitive(f, dt, need);
    auto ft = [&cum, dt](double t) {
        const auto i = static_cast<std::size_t>(std::llround(t / dt));
        return i < cum.size() ? cum[i] : cum.back();
    };
    for (int i = 0; i < n_paths; ++i) {
        RandomStream r = rng.child(static_cast<std::uint64_t>(i));
        const SamplePath p = sample_path(model, 1.0, static_cast<std::size_t>(grid_steps) + 1, r);
        pathwise_check_fs(p, s, fv, ft, k_min, k_max, slack_cells * dt, rep);
        ++rep.paths;
    }
    return rep;
}

} // namespace cmlevy
