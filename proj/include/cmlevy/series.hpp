#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace cmlevy {

enum class Verdict { converging, diverging, indeterminate };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::converging:
        return "converging";
    case Verdict::diverging:
        return "diverging";
    case Verdict::indeterminate:
        return "indeterminate";
    }
    return "indeterminate";
}

struct VerdictPolicy {
    int window = 8;          //!< K: number of trailing terms inspected
    double delta = 0.1;      //!< converging needs ratios <= 1 - delta
    double power_converge = 1.5;  //!< fitted decay exponent above which a slow tail is summable
    double power_diverge = 1.1;   //!< and below which it is not
    double zero_power = 0.25;     //!< decay exponent for a sequence to count as tending to zero
    double flat_power = 0.05;     //!< |exponent| below this means no decay
};

/*!
 * Terms, partial sums and a three-way verdict for a non-negative series.
 *
 * For sequences that should tend to zero (rather than be summed) the same
 * structure is used with `terms` holding the sequence itself.
 */
struct SeriesReport {
    std::vector<double> terms;
    std::vector<double> partial_sums;
    Verdict verdict = Verdict::indeterminate;
    double tail_ratio = 0.0;     //!< largest ratio a_{k+1}/a_k over the window
    double decay_exponent = 0.0; //!< b in a_k ~ k^{-b} fitted over the window
    std::string rule;            //!< which test produced the verdict
};

namespace detail {

// Least-squares slope of log|a_k| against log k over the last `window` terms.
inline double power_decay(const std::vector<double>& a, int window) {
    const int n = static_cast<int>(a.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int k = std::max(0, n - window); k < n; ++k) {
        if (!(a[k] > 0.0))
            continue;
        const double x = std::log(k + 1.0), y = std::log(a[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 3)
        return 0.0;
    const double den = m * sxx - sx * sx;
    return den > 0.0 ? -(m * sxy - sx * sy) / den : 0.0;
}

inline void fill_partial_sums(SeriesReport& r) {
    r.partial_sums.resize(r.terms.size());
    double s = 0.0;
    for (std::size_t i = 0; i < r.terms.size(); ++i) {
        s += r.terms[i];
        r.partial_sums[i] = s;
    }
}

} // namespace detail

/*!
 * Verdict on the finiteness of sum a_k from its first terms.
 *
 * Ratio test over the last K terms first (all <= 1 - delta: converging,
 * all >= 1: diverging). Tails that decay like a power of k fail both ratio
 * bars, so they are judged by the fitted exponent instead.
 */
inline SeriesReport classify_series(std::vector<double> terms, const VerdictPolicy& pol = {}) {
    SeriesReport r;
    r.terms = std::move(terms);
    detail::fill_partial_sums(r);
    const int n = static_cast<int>(r.terms.size());
    if (n < pol.window + 1) {
        r.rule = "too few terms";
        return r;
    }
    for (double a : r.terms)
        if (!std::isfinite(a) || a < 0.0) {
            r.rule = "non-finite or negative term";
            return r;
        }
    const double scale = *std::max_element(r.terms.begin(), r.terms.end());
    bool all_zero = true;
    for (int k = n - pol.window; k < n; ++k)
        all_zero = all_zero && r.terms[k] <= 1e-300 + 1e-15 * scale;
    if (scale == 0.0 || all_zero) {
        r.verdict = Verdict::converging;
        r.rule = "vanishing tail";
        return r;
    }
    bool below = true, above = true;
    double rmax = 0.0;
    for (int k = n - pol.window; k < n; ++k) {
        const double prev = r.terms[k - 1];
        const double ratio = prev > 0.0 ? r.terms[k] / prev : INFINITY;
        rmax = std::max(rmax, ratio);
        below = below && ratio <= 1.0 - pol.delta;
        above = above && ratio >= 1.0;
    }
    r.tail_ratio = rmax;
    r.decay_exponent = detail::power_decay(r.terms, pol.window);
    if (below) {
        r.verdict = Verdict::converging;
        r.rule = "ratio";
    } else if (above) {
        r.verdict = Verdict::diverging;
        r.rule = "ratio";
    } else if (r.decay_exponent >= pol.power_converge) {
        r.verdict = Verdict::converging;
        r.rule = "power";
    } else if (r.decay_exponent <= pol.power_diverge) {
        r.verdict = Verdict::diverging;
        r.rule = "power";
    } else {
        r.rule = "power exponent between bars";
    }
    return r;
}

/*!
 * Verdict on b_n -> 0. "converging" means the sequence tends to zero,
 * "diverging" that it stays bounded away from zero or grows.
 */
inline SeriesReport classify_to_zero(std::vector<double> seq, const VerdictPolicy& pol = {}) {
    SeriesReport r;
    r.terms = std::move(seq);
    detail::fill_partial_sums(r);
    const int n = static_cast<int>(r.terms.size());
    if (n < pol.window + 1) {
        r.rule = "too few terms";
        return r;
    }
    const double scale = *std::max_element(r.terms.begin(), r.terms.end());
    bool tiny = true;
    for (int k = n - pol.window; k < n; ++k)
        tiny = tiny && std::abs(r.terms[k]) <= 1e-300 + 1e-12 * std::abs(scale);
    if (scale <= 0.0 || tiny) {
        r.verdict = Verdict::converging;
        r.rule = "vanishing tail";
        return r;
    }
    bool below = true, above = true;
    double rmax = 0.0;
    for (int k = n - pol.window; k < n; ++k) {
        const double prev = r.terms[k - 1];
        const double ratio = prev > 0.0 ? r.terms[k] / prev : INFINITY;
        rmax = std::max(rmax, ratio);
        below = below && ratio <= 1.0 - pol.delta;
        above = above && ratio >= 1.0;
    }
    r.tail_ratio = rmax;
    r.decay_exponent = detail::power_decay(r.terms, pol.window);
    if (below) {
        r.verdict = Verdict::converging;
        r.rule = "ratio";
    } else if (above) {
        r.verdict = Verdict::diverging;
        r.rule = "ratio";
    } else if (r.decay_exponent >= pol.zero_power) {
        r.verdict = Verdict::converging;
        r.rule = "power";
    } else if (r.decay_exponent <= pol.flat_power) {
        r.verdict = Verdict::diverging;
        r.rule = "power";
    } else {
        r.rule = "power exponent between bars";
    }
    return r;
}

} // namespace cmlevy
