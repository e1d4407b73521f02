#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "cmlevy/error.hpp"

namespace cmlevy::stats {

//! Kolmogorov survival function Q(x) = 2 sum (-1)^{k-1} exp(-2 k^2 x^2).
inline double kolmogorov_q(double x) {
    if (x <= 0.0)
        return 1.0;
    if (x < 0.2)
        return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-17)
            break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

//! Asymptotic p-value for a KS distance d at effective sample size ne.
inline double ks_p_value(double d, double ne) {
    const double s = std::sqrt(ne);
    return kolmogorov_q((s + 0.12 + 0.11 / s) * d);
}

/*!
 * Two-sample Kolmogorov-Smirnov test. With `allowance` > 0 the second sample
 * may be displaced by up to that amount in either direction: the distance is
 * sup_x max(F_b(x - allowance) - F_a(x), F_a(x) - F_b(x + allowance), 0).
 */
inline KsResult ks_two_sample(std::vector<double> a, std::vector<double> b, double allowance = 0.0) {
    CMLEVY_REQUIRE(!a.empty() && !b.empty(), ArgumentError, "KS test needs two non-empty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    auto cdf = [](const std::vector<double>& v, double x) {
        return static_cast<double>(std::upper_bound(v.begin(), v.end(), x) - v.begin()) /
               static_cast<double>(v.size());
    };
    double d = 0.0;
    for (double x : b) {
        const double at = x + allowance;
        d = std::max(d, cdf(b, at - allowance) - cdf(a, at));
    }
    for (double x : a)
        d = std::max(d, cdf(a, x) - cdf(b, x + allowance));
    KsResult r;
    r.statistic = d;
    r.p_value = ks_p_value(d, na * nb / (na + nb));
    return r;
}

//! One-sample KS test against a continuous CDF.
template <class Cdf>
KsResult ks_one_sample(std::vector<double> a, Cdf&& cdf) {
    CMLEVY_REQUIRE(!a.empty(), ArgumentError, "KS test needs a non-empty sample");
    std::sort(a.begin(), a.end());
    const double n = static_cast<double>(a.size());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double f = cdf(a[i]);
        d = std::max({d, (i + 1) / n - f, f - i / n});
    }
    return {d, ks_p_value(d, n)};
}

//! Linear-interpolated quantile (type 7) of an unsorted sample.
inline double quantile(std::vector<double> v, double q) {
    CMLEVY_REQUIRE(!v.empty(), ArgumentError, "quantile of an empty sample");
    std::sort(v.begin(), v.end());
    const double h = (static_cast<double>(v.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

inline double mean(const std::vector<double>& v) {
    CMLEVY_REQUIRE(!v.empty(), ArgumentError, "mean of an empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double variance(const std::vector<double>& v) {
    CMLEVY_REQUIRE(v.size() >= 2, ArgumentError, "variance needs two values");
    const double m = mean(v);
    double s = 0.0;
    for (double x : v)
        s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

//! Pearson chi-squared goodness of fit; bins with tiny expectations should be pooled by the caller.
inline double chi_squared_p_value(const std::vector<double>& observed, const std::vector<double>& expected,
                                  int fitted_parameters = 0) {
    CMLEVY_REQUIRE(observed.size() == expected.size() && observed.size() >= 2, ArgumentError,
                   "chi-squared needs matching bins");
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        CMLEVY_REQUIRE(expected[i] > 0.0, ArgumentError, "chi-squared expectation must be positive");
        stat += (observed[i] - expected[i]) * (observed[i] - expected[i]) / expected[i];
    }
    const double df = static_cast<double>(observed.size()) - 1.0 - fitted_parameters;
    boost::math::chi_squared dist(df);
    return boost::math::cdf(boost::math::complement(dist, stat));
}

//! Two-sample chi-squared homogeneity test on integer-valued samples (pooled tail bin).
inline double chi_squared_homogeneity(const std::vector<int>& a, const std::vector<int>& b,
                                      double min_expected = 5.0) {
    const int top = std::max(*std::max_element(a.begin(), a.end()), *std::max_element(b.begin(), b.end()));
    std::vector<double> ca(top + 1, 0.0), cb(top + 1, 0.0);
    for (int x : a)
        ca[x] += 1;
    for (int x : b)
        cb[x] += 1;
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    // pool adjacent bins until the expected counts are large enough
    std::vector<std::pair<double, double>> bins;
    double pa = 0, pb = 0;
    for (int v = 0; v <= top; ++v) {
        pa += ca[v];
        pb += cb[v];
        const double tot = pa + pb;
        if (tot * std::min(na, nb) / (na + nb) >= min_expected) {
            bins.emplace_back(pa, pb);
            pa = pb = 0;
        }
    }
    if (pa + pb > 0) {
        if (bins.empty())
            bins.emplace_back(pa, pb);
        else {
            bins.back().first += pa;
            bins.back().second += pb;
        }
    }
    if (bins.size() < 2)
        return 1.0;
    double stat = 0.0;
    for (const auto& [oa, ob] : bins) {
        const double tot = oa + ob;
        const double ea = tot * na / (na + nb), eb = tot * nb / (na + nb);
        stat += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    }
    boost::math::chi_squared dist(static_cast<double>(bins.size()) - 1.0);
    return boost::math::cdf(boost::math::complement(dist, stat));
}

} // namespace cmlevy::stats
