#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <boost/random/poisson_distribution.hpp>

#include "cmlevy/error.hpp"
#include "cmlevy/quadrature.hpp"
#include "cmlevy/rng.hpp"
#include "cmlevy/series.hpp"
#include "cmlevy/test_function.hpp"
#include "cmlevy/vertex_law.hpp"

namespace cmlevy {

//! Point mass `weight` of the mean jump measure at (index, size).
struct Atom {
    double index = 0.0;
    double size = 0.0;
    double weight = 0.0;
};

//! Stationary component rate * dt x delta_size(dx).
struct SizeAtom {
    double size = 0.0;
    double rate = 0.0;
};

/*!
 * Mean jump measure Pi(dt, dx) of a non-decreasing pure-jump additive
 * process: t is the process time (index), x the jump size. Any mixture of a
 * continuous MeanJumpMeasure, explicit atoms and stationary size atoms.
 */
class AdditiveSpec {
  public:
    AdditiveSpec() = default;

    static AdditiveSpec from_measure(MeanJumpMeasure m) {
        AdditiveSpec s;
        s.measure_ = std::move(m);
        return s;
    }
    static AdditiveSpec from_atoms(std::vector<Atom> atoms) {
        AdditiveSpec s;
        s.add_atoms(std::move(atoms));
        return s;
    }
    static AdditiveSpec stationary(std::vector<SizeAtom> nu) {
        AdditiveSpec s;
        s.add_stationary(std::move(nu));
        return s;
    }
    //! Only the exponent is known (used for series tests on synthetic inputs).
    static AdditiveSpec from_exponent(std::function<double(double, double)> psi) {
        AdditiveSpec s;
        s.exponent_ = std::move(psi);
        return s;
    }

    AdditiveSpec& add_atoms(std::vector<Atom> atoms) {
        for (const auto& a : atoms)
            CMLEVY_REQUIRE(a.index > 0.0 && a.size > 0.0 && a.weight >= 0.0, ArgumentError,
                           "atoms need positive index and size and non-negative weight");
        atoms_.insert(atoms_.end(), atoms.begin(), atoms.end());
        return *this;
    }
    AdditiveSpec& add_stationary(std::vector<SizeAtom> nu) {
        for (const auto& a : nu)
            CMLEVY_REQUIRE(a.size > 0.0 && a.rate >= 0.0, ArgumentError,
                           "stationary atoms need positive size and non-negative rate");
        stationary_.insert(stationary_.end(), nu.begin(), nu.end());
        return *this;
    }

    const std::optional<MeanJumpMeasure>& measure() const noexcept { return measure_; }
    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    const std::vector<SizeAtom>& stationary_part() const noexcept { return stationary_; }
    bool exponent_only() const noexcept { return static_cast<bool>(exponent_); }

    //! Psi_t(u) = int (1 - e^{-ux}) Pi((0,t], dx).
    double psi(double t, double u) const {
        CMLEVY_REQUIRE(u >= 0.0, ArgumentError, "Laplace argument must be non-negative");
        if (exponent_)
            return exponent_(t, u);
        if (t <= 0.0 || u == 0.0)
            return 0.0;
        double total = 0.0;
        if (measure_)
            total += measure_->laplace_exponent(measure_->index_min(), t, u);
        for (const auto& a : atoms_)
            if (a.index <= t)
                total += a.weight * -std::expm1(-u * a.size);
        for (const auto& a : stationary_)
            total += t * a.rate * -std::expm1(-u * a.size);
        return total;
    }

  private:
    std::optional<MeanJumpMeasure> measure_;
    std::vector<Atom> atoms_;
    std::vector<SizeAtom> stationary_;
    std::function<double(double, double)> exponent_;
};

//! Atoms n^{-1} 2^n delta_{(2^{-n}, 2^{-n}/n)} for n = 1..n_max.
inline std::vector<Atom> sparse_atoms(int n_max) {
    std::vector<Atom> atoms;
    for (int n = 1; n <= n_max; ++n) {
        const double t = std::ldexp(1.0, -n);
        atoms.push_back({t, t / n, std::ldexp(1.0, n) / n});
    }
    return atoms;
}

/*!
 * L_t = inf{u > 0 : Y_u > t} for a jump list sorted by index. Beyond the
 * total of the listed jumps L_t is +inf; jumps removed by a size floor are
 * simply absent, so L is computed for the truncated process.
 */
inline double right_inverse(const std::vector<Jump>& jumps, double t) {
    double y = 0.0;
    for (const auto& j : jumps) {
        y += j.size;
        if (y > t)
            return j.index;
    }
    return inf;
}

//! Counts of pathwise violations of L_u > t => u >= Y_t => L_u >= t over a grid.
struct InverseImplicationCheck {
    long checked = 0;
    long first_violations = 0;
    long second_violations = 0;
};

inline InverseImplicationCheck check_inverse_implications(const std::vector<Jump>& jumps,
                                                          const std::vector<double>& t_grid,
                                                          const std::vector<double>& u_grid) {
    InverseImplicationCheck out;
    for (double u : u_grid) {
        const double l = right_inverse(jumps, u);
        for (double t : t_grid) {
            const double y = additive_value(jumps, t);
            ++out.checked;
            if (l > t && !(u >= y))
                ++out.first_violations;
            if (u >= y && !(l >= t))
                ++out.second_violations;
        }
    }
    return out;
}

struct UpperSeriesReport {
    SeriesReport series;
    std::vector<double> theta, t;
    double f_ratio_limsup = 0.0; //!< max of f(t_n)/f(t_{n+1}) over the trailing window
};

struct LowerSeriesReport {
    SeriesReport gap_series;   //!< terms e^{-Psi_{f(t_n)}(theta_n)} - e^{-theta_n t_n}
    SeriesReport psi_series;   //!< terms Psi_{f(t_{n+1})}(theta_n)
    std::vector<double> theta, t;
    bool phi_growth_ok = false; //!< theta_n t_n increasing over the trailing window
};

namespace detail {

inline void series_inputs(const std::function<double(double)>& phi,
                          const std::function<double(int)>& theta, int n_terms,
                          std::vector<double>& th, std::vector<double>& tt) {
    CMLEVY_REQUIRE(n_terms >= 2, ArgumentError, "need at least two terms");
    th.resize(n_terms + 1);
    tt.resize(n_terms + 1);
    for (int n = 1; n <= n_terms + 1; ++n) {
        th[n - 1] = theta(n);
        tt[n - 1] = phi(th[n - 1]);
        if (n > 1) {
            CMLEVY_REQUIRE(th[n - 1] > th[n - 2], ArgumentError, "theta_n must increase");
            CMLEVY_REQUIRE(tt[n - 1] < tt[n - 2], ArgumentError, "t_n = phi(theta_n) must decrease");
        }
    }
}

} // namespace detail

//! Terms exp(theta_n t_n - Psi_{f(t_n)}(theta_n)) for n = 1..N with a verdict.
inline UpperSeriesReport upper_series_test(const AdditiveSpec& spec, const std::function<double(double)>& f,
                                  const std::function<double(double)>& phi,
                                  const std::function<double(int)>& theta, int n_terms,
                                  const VerdictPolicy& pol = {}) {
    UpperSeriesReport r;
    std::vector<double> th, tt;
    detail::series_inputs(phi, theta, n_terms, th, tt);
    std::vector<double> terms(n_terms);
    for (int i = 0; i < n_terms; ++i)
        terms[i] = std::exp(th[i] * tt[i] - spec.psi(f(tt[i]), th[i]));
    for (int i = std::max(0, n_terms - pol.window); i < n_terms; ++i)
        r.f_ratio_limsup = std::max(r.f_ratio_limsup, f(tt[i]) / f(tt[i + 1]));
    th.pop_back();
    tt.pop_back();
    r.theta = std::move(th);
    r.t = std::move(tt);
    r.series = classify_series(std::move(terms), pol);
    return r;
}

//! The two series of the lower bound: the gap series should diverge, the Psi series converge.
inline LowerSeriesReport lower_series_test(const AdditiveSpec& spec, const std::function<double(double)>& f,
                                  const std::function<double(double)>& phi,
                                  const std::function<double(int)>& theta, int n_terms,
                                  const VerdictPolicy& pol = {}) {
    LowerSeriesReport r;
    std::vector<double> th, tt;
    detail::series_inputs(phi, theta, n_terms, th, tt);
    std::vector<double> gap(n_terms), psi(n_terms);
    for (int i = 0; i < n_terms; ++i) {
        gap[i] = std::exp(-spec.psi(f(tt[i]), th[i])) - std::exp(-th[i] * tt[i]);
        psi[i] = spec.psi(f(tt[i + 1]), th[i]);
    }
    r.phi_growth_ok = th[n_terms - 1] * tt[n_terms - 1] > th[0] * tt[0];
    for (int i = std::max(1, n_terms - pol.window); i < n_terms; ++i)
        r.phi_growth_ok = r.phi_growth_ok && th[i] * tt[i] > th[i - 1] * tt[i - 1];
    th.pop_back();
    tt.pop_back();
    r.theta = std::move(th);
    r.t = std::move(tt);
    r.gap_series = classify_series(std::move(gap), pol);
    r.psi_series = classify_series(std::move(psi), pol);
    return r;
}

/*!
 * Integrand of a rectangle condition: for a jump of size x the index must
 * lie in range(x) and contributes size_weight(x) * g(t, x). g must be
 * non-increasing in t; minus_dg is -dg/dt (leave empty when g is constant).
 */
struct ConditionKernel {
    std::function<std::pair<double, double>(double)> range;
    bool closed_left = false;
    std::function<double(double)> size_weight;
    std::function<double(double, double)> g;
    std::function<double(double, double)> minus_dg;
};

namespace detail {

// int_(a,b] g dK with K(u) = mass of (a,u], by parts: g(b)K(b) + int K (-g') du.
template <class K>
double stieltjes(const ConditionKernel& ker, double x, double a, double b, K&& kfun) {
    const double kb = kfun(b);
    double total = ker.g(b, x) * kb;
    if (!ker.minus_dg || kb <= 0.0)
        return total;
    double hi = b;
    for (int j = 0; j < 80; ++j) {
        const double lo = a + 0.5 * (hi - a);
        const double s = integrate([&](double u) { return kfun(u) * ker.minus_dg(u, x); }, lo, hi, 1e-8, 6)
                             .value;
        total += s;
        hi = lo;
        if (j > 2 && s < 1e-10 * total)
            break;
    }
    return total;
}

template <class G>
double integrate_toward(G&& g, double a, double b) {
    double total = 0.0, hi = b;
    for (int j = 0; j < 80; ++j) {
        const double lo = a + 0.5 * (hi - a);
        const double s = integrate(g, lo, hi, 1e-10, 10).value;
        total += s;
        hi = lo;
        if (j > 4 && s < 1e-13 * total)
            break;
    }
    return total;
}

inline bool in_range(const ConditionKernel& ker, double t, double a, double b) {
    return (ker.closed_left ? t >= a : t > a) && t <= b;
}

} // namespace detail

//! int over sizes in [xlo, xhi) and indices in range(x) of size_weight(x) g(t,x) Pi(dt,dx).
inline double kernel_integral(const AdditiveSpec& spec, const ConditionKernel& ker, double xlo, double xhi) {
    double total = 0.0;
    for (const auto& at : spec.atoms())
        if (at.size >= xlo && at.size < xhi) {
            const auto [a, b] = ker.range(at.size);
            if (detail::in_range(ker, at.index, a, b))
                total += at.weight * ker.size_weight(at.size) * ker.g(at.index, at.size);
        }
    for (const auto& sa : spec.stationary_part())
        if (sa.size >= xlo && sa.size < xhi) {
            const auto [a, b] = ker.range(sa.size);
            if (b > a)
                total += sa.rate * ker.size_weight(sa.size) *
                         detail::integrate_toward([&](double t) { return ker.g(t, sa.size); }, a, b);
        }
    if (const auto& m = spec.measure(); m && xhi > xlo) {
        auto per_size = [&](double x) {
            const auto [a0, b] = ker.range(x);
            const double a = std::max(a0, m->index_min());
            if (!(b > a))
                return 0.0;
            const double inner =
                detail::stieltjes(ker, x, a, b, [&](double u) { return m->index_probability(x, a, u); });
            return std::exp(-m->lambda() * x) / x * ker.size_weight(x) * inner;
        };
        const double top = std::min(xhi, m->size_cap());
        if (xlo > 0.0) {
            for (double lo = xlo; lo < top;) {
                const double hi = std::min(2.0 * lo, top);
                total += integrate_log(per_size, lo, hi, 1e-7, 6).value;
                lo = hi;
            }
        } else {
            double hi = top, acc = 0.0;
            for (int k = 0; k < 400 && hi > 1e-300; ++k) {
                const double s = integrate_log(per_size, 0.5 * hi, hi, 1e-7, 6).value;
                acc += s;
                hi *= 0.5;
                if (k > 4 && s < 1e-9 * acc)
                    break;
            }
            total += acc;
        }
    }
    return total;
}

//! Shell contributions over sizes [2^-k, 2^-k+1), k = 1..depth, plus the head above 1.
struct ShellReport {
    SeriesReport series;
    double head = 0.0; //!< contribution of sizes >= 1
    double total = 0.0;
};

inline ShellReport shell_condition(const AdditiveSpec& spec, const ConditionKernel& ker, int depth,
                                   bool with_head, const VerdictPolicy& pol) {
    ShellReport r;
    std::vector<double> shells(depth);
    for (int k = 1; k <= depth; ++k)
        shells[k - 1] = kernel_integral(spec, ker, std::ldexp(1.0, -k), std::ldexp(1.0, 1 - k));
    if (with_head)
        r.head = kernel_integral(spec, ker, 1.0, inf);
    r.series = classify_series(std::move(shells), pol);
    r.total = r.head + (r.series.partial_sums.empty() ? 0.0 : r.series.partial_sums.back());
    return r;
}

struct ConditionVerdicts {
    ShellReport large, var, mean_var;
    SeriesReport mean; //!< the dyadic sequence, judged for convergence to 0
};

/*!
 * Finiteness of the large-jump, variance and mean-variance integrals and the
 * dyadic mean sequence, for an increasing h with h(0) = 0 and h(1) = 1.
 */
inline ConditionVerdicts jump_conditions(const AdditiveSpec& spec, const TestFunction& h, int depth = 30,
                                          const VerdictPolicy& pol = {}) {
    auto hinv = [&h](double x) { return h.inverse(x); };
    ConditionVerdicts v;

    ConditionKernel large;
    large.range = [&](double x) { return std::pair{0.0, std::min(1.0, hinv(x))}; };
    large.closed_left = false;
    large.size_weight = [](double) { return 1.0; };
    large.g = [](double, double) { return 1.0; };
    v.large = shell_condition(spec, large, depth, true, pol);

    // 2h(t) > x  <=>  t > h^{-1}(x/2)
    ConditionKernel var;
    var.range = [&](double x) { return std::pair{hinv(0.5 * x), 1.0}; };
    var.size_weight = [](double x) { return x * x; };
    var.g = [&](double t, double) { return 1.0 / (h(t) * h(t)); };
    var.minus_dg = [&](double t, double) { return 2.0 * h.derivative(t) / std::pow(h(t), 3); };
    v.var = shell_condition(spec, var, depth, false, pol);

    ConditionKernel mv;
    mv.range = var.range;
    mv.size_weight = [](double x) { return x; };
    mv.g = [&](double t, double) { return 1.0 / h(t); };
    mv.minus_dg = [&](double t, double) { return h.derivative(t) / (h(t) * h(t)); };
    v.mean_var = shell_condition(spec, mv, depth, false, pol);

    std::vector<double> seq(depth);
    for (int n = 1; n <= depth; ++n) {
        const double level = std::ldexp(1.0, -n);
        const double tmax = hinv(level);
        ConditionKernel mean;
        mean.range = [&, tmax](double x) { return std::pair{hinv(0.5 * x), tmax}; };
        mean.size_weight = [](double x) { return x; };
        mean.g = [](double, double) { return 1.0; };
        seq[n - 1] = std::ldexp(1.0, n) * kernel_integral(spec, mean, 0.0, level);
    }
    v.mean = classify_to_zero(std::move(seq), pol);
    return v;
}

struct InverseConditionVerdicts {
    ShellReport var_inv, mean_var_inv;
    SeriesReport mean_inv;
    bool h_convex = true;
};

//! The same family phrased through h^{-1}; h should be convex.
inline InverseConditionVerdicts inverse_jump_conditions(const AdditiveSpec& spec, const TestFunction& h,
                                                  int depth = 30, const VerdictPolicy& pol = {}) {
    auto hinv = [&h](double x) { return h.inverse(x); };
    InverseConditionVerdicts v;
    // convex h <=> every chord lies above; check second differences on a grid
    {
        double prev_slope = -inf;
        for (int i = 1; i <= 400; ++i) {
            const double t0 = (i - 1) / 400.0, t1 = i / 400.0;
            const double slope = (h(t1) - h(t0)) / (t1 - t0);
            if (slope < prev_slope * (1.0 - 1e-9) - 1e-12)
                v.h_convex = false;
            prev_slope = slope;
        }
    }
    // 2t >= h^{-1}(x)
    ConditionKernel var;
    var.range = [&](double x) { return std::pair{0.5 * hinv(x), 1.0}; };
    var.closed_left = true;
    var.size_weight = [&](double x) { return hinv(x) * hinv(x); };
    var.g = [](double t, double) { return 1.0 / (t * t); };
    var.minus_dg = [](double t, double) { return 2.0 / (t * t * t); };
    v.var_inv = shell_condition(spec, var, depth, false, pol);

    ConditionKernel mv;
    mv.range = var.range;
    mv.closed_left = true;
    mv.size_weight = [&](double x) { return hinv(x); };
    mv.g = [](double t, double) { return 1.0 / t; };
    mv.minus_dg = [](double t, double) { return 1.0 / (t * t); };
    v.mean_var_inv = shell_condition(spec, mv, depth, false, pol);

    std::vector<double> seq(depth);
    for (int n = 1; n <= depth; ++n) {
        const double tmax = std::ldexp(1.0, -n);
        ConditionKernel mean;
        mean.range = [&, tmax](double x) { return std::pair{0.5 * hinv(x), tmax}; };
        mean.closed_left = true;
        mean.size_weight = [&](double x) { return hinv(x); };
        mean.g = [](double, double) { return 1.0; };
        seq[n - 1] = std::ldexp(1.0, n) * kernel_integral(spec, mean, 0.0, h(tmax));
    }
    v.mean_inv = classify_to_zero(std::move(seq), pol);
    return v;
}

//! int_(0,1) h^{-1}(x) Pi((0,1], dx) for the stationary part of the spec.
inline double stationary_inverse_integral(const AdditiveSpec& spec, const TestFunction& h) {
    double total = 0.0;
    for (const auto& a : spec.stationary_part())
        if (a.size < 1.0)
            total += a.rate * h.inverse(a.size);
    return total;
}

struct SparseAtomReport {
    int runs = 0;
    int successes = 0;
    double frequency = 0.0;
    double standard_error = 0.0;
};

/*!
 * Simulates the jump counts N_n ~ Poisson(2^n/n) at the atoms of the
 * counterexample and reports how often some n in [n_lo, n_hi] has
 * N_n >= 2^n/n, i.e. a jump of total size at least 1/n^2 at index 2^-n.
 */
inline SparseAtomReport sparse_atom_experiment(int n_lo, int n_hi, int runs, RandomStream& rng) {
    CMLEVY_REQUIRE(runs >= 1, ArgumentError, "need at least one run");
    SparseAtomReport r;
    r.runs = runs;
    for (int k = 0; k < runs; ++k) {
        bool hit = false;
        for (int n = n_lo; n <= n_hi; ++n) {
            const double mu = std::ldexp(1.0, n) / n;
            boost::random::poisson_distribution<long, double> pois(mu);
            if (static_cast<double>(pois(rng)) >= mu)
                hit = true;
        }
        r.successes += hit ? 1 : 0;
    }
    r.frequency = static_cast<double>(r.successes) / runs;
    r.standard_error = std::sqrt(r.frequency * (1.0 - r.frequency) / runs);
    return r;
}

} // namespace cmlevy
