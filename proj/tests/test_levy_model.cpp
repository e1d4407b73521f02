#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cmlevy/levy_model.hpp"
#include "cmlevy/stats.hpp"

using namespace cmlevy;

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// P(N1 - N2 <= x) for independent Poisson(mu) variables, by direct summation
double skellam_cdf(double mu, double x) {
    double total = 0.0;
    auto pois = [mu](int k) { return std::exp(-mu + k * std::log(mu) - std::lgamma(k + 1.0)); };
    for (int a = 0; a < 60; ++a)
        for (int b = 0; b < 60; ++b)
            if (a - b <= x)
                total += pois(a) * pois(b);
    return total;
}

} // namespace

TEST(RandomStream, ChildStreamsAreReproducibleAndDistinct) {
    RandomStream root(42);
    RandomStream a = root.child(3), b = root.child(3), c = root.child(4);
    const auto x = a(), y = b(), z = c();
    EXPECT_EQ(x, y);
    EXPECT_NE(x, z);
    // drawing from the parent does not change its children
    RandomStream r2(42);
    (void)r2();
    EXPECT_EQ(r2.child(3)(), x);
}

TEST(StableCdf, CauchyMatchesArctangent) {
    for (double z : {-50.0, -3.0, -0.5, 0.0, 0.7, 4.0, 100.0}) {
        const auto r = stable::cdf_standard(1.0, 0.0, z);
        EXPECT_NEAR(r.lower, 0.5 + std::atan(z) / std::numbers::pi, 1e-12) << z;
        EXPECT_NEAR(r.lower + r.upper, 1.0, 1e-12);
    }
}

TEST(StableCdf, ReflectionSymmetry) {
    for (double alpha : {0.5, 0.9, 1.3, 1.8})
        for (double beta : {-0.6, 0.0, 0.8})
            for (double x : {-2.0, -0.3, 0.4, 3.0}) {
                const double a = stable::cdf_standard(alpha, beta, x).lower;
                const double b = stable::cdf_standard(alpha, -beta, -x).upper;
                EXPECT_NEAR(a, b, 1e-10) << alpha << " " << beta << " " << x;
            }
}

TEST(StableModel, MassBelowZeroIsOneMinusPositivity) {
    for (double alpha : {0.4, 0.8, 1.5, 1.9}) {
        const double lo = std::max(0.0, 1.0 - 1.0 / alpha) + 0.05;
        const double hi = std::min(1.0, 1.0 / alpha) - 0.05;
        for (double rho : {lo, 0.5 * (lo + hi), hi}) {
            LevyModel m{Stable{alpha, rho, 1.0, 0.0}};
            EXPECT_NEAR(m.marginal_cdf(1.0, 0.0).value, 1.0 - rho, 1e-9) << alpha << " " << rho;
        }
    }
}

TEST(StableModel, SelfSimilarCdf) {
    LevyModel m{Stable{1.5, 0.6, 1.3, 0.0}};
    for (double t : {0.01, 0.5, 4.0})
        for (double x : {-1.0, 0.2, 2.0})
            EXPECT_NEAR(m.marginal_cdf(t, x).value, m.marginal_cdf(1.0, x * std::pow(t, -1.0 / 1.5)).value, 1e-10);
}

TEST(StableModel, GaussianEndpoint) {
    LevyModel m{Stable{2.0, 0.5, 1.0, 0.0}};
    // alpha = 2 with scale 1 has variance 2
    for (double x : {-2.0, 0.0, 1.0})
        EXPECT_NEAR(m.marginal_cdf(1.0, x).value, normal_cdf(x / std::sqrt(2.0)), 1e-10);
}

TEST(BrownianModel, CdfAndMoments) {
    LevyModel m{Brownian{2.0, 0.5}};
    EXPECT_NEAR(m.marginal_cdf(4.0, 1.0).value, normal_cdf((1.0 - 2.0) / 4.0), 1e-14);
    RandomStream rng(7);
    std::vector<double> x(20000);
    for (auto& v : x)
        v = m.sample_increment(0.25, rng);
    const double se_mean = std::sqrt(1.0 / x.size());
    EXPECT_NEAR(stats::mean(x), 0.125, 4 * se_mean);
    EXPECT_NEAR(stats::variance(x), 1.0, 0.05);
}

TEST(CauchyModel, CdfAndCauchyView) {
    LevyModel m{Cauchy{2.0, 0.5}};
    // X_t / t is Cauchy(location, scale)
    EXPECT_NEAR(m.marginal_cdf(3.0, 3.0 * 2.5).value, 0.75, 1e-14);
    LevyModel s{Stable{1.0, 0.5, 2.0, 0.5}};
    EXPECT_NEAR(s.as_cauchy().scale, 2.0, 1e-15);
    EXPECT_NEAR(s.as_cauchy().location, 0.5, 1e-12);
    EXPECT_NEAR(m.positivity(), 0.5 + std::atan(0.25) / std::numbers::pi, 1e-15);
}

TEST(GammaModel, CdfMatchesIncompleteGamma) {
    LevyModel m{GammaSub{2.0, 3.0}};
    // shape 2 t = 1 at t = 0.5: exponential law with rate 3
    EXPECT_NEAR(m.marginal_cdf(0.5, 1.0).value, 1.0 - std::exp(-3.0), 1e-13);
    EXPECT_EQ(m.marginal_cdf(0.5, -1.0).value, 0.0);
}

TEST(CompoundPoisson, MonteCarloCdfAgreesWithSkellam) {
    LevyModel m{CompoundPoissonDrift{2.0, JumpLaw{JumpLaw::Kind::plus_minus, 1.0, 0.0}, 0.0}};
    const auto c = m.marginal_cdf(1.0, 0.5);
    EXPECT_TRUE(c.monte_carlo);
    EXPECT_NEAR(c.value, skellam_cdf(1.0, 0.5), 4 * c.error);
}

TEST(TruncatedFunctionals, StableScaling) {
    LevyModel m{Stable{1.5, 0.6, 1.0, 0.0}};
    const auto a = m.truncated(0.5), b = m.truncated(0.25);
    EXPECT_NEAR(b.nu_bar / a.nu_bar, std::pow(2.0, 1.5), 1e-12);
    EXPECT_NEAR(a.sigma2_bar / b.sigma2_bar, std::pow(2.0, 0.5), 1e-12);
}

TEST(TruncatedFunctionals, PlusMinusJumps) {
    LevyModel m{CompoundPoissonDrift{3.0, JumpLaw{JumpLaw::Kind::plus_minus, 1.0, 0.0}, 0.25}};
    const auto f = m.truncated(0.5);
    EXPECT_NEAR(f.nu_bar, 3.0, 1e-14);
    EXPECT_NEAR(f.sigma2_bar, 0.0, 1e-14);
    EXPECT_NEAR(f.gamma_bar, 0.25, 1e-14);
}

TEST(TruncatedFunctionals, CauchyClosedForm) {
    LevyModel m{Cauchy{1.0, 0.0}};
    const auto f = m.truncated(0.2);
    EXPECT_NEAR(f.nu_bar, 2.0 / (std::numbers::pi * 0.2), 1e-13);
    EXPECT_NEAR(f.sigma2_bar, 2.0 * 0.2 / std::numbers::pi, 1e-13);
}

TEST(LevyModel, RejectsBadParameters) {
    EXPECT_THROW((LevyModel{Stable{2.5, 0.5, 1.0, 0.0}}), ParameterError);
    EXPECT_THROW((LevyModel{Stable{1.5, 0.9, 1.0, 0.0}}), ParameterError);
    EXPECT_THROW((LevyModel{Brownian{0.0, 0.0}}), ParameterError);
    EXPECT_THROW((LevyModel{Cauchy{-1.0, 0.0}}), ParameterError);
    EXPECT_THROW((LevyModel{GammaSub{0.0, 1.0}}), ParameterError);
}

TEST(LevyModel, VariationAndDrift) {
    EXPECT_TRUE((LevyModel{Cauchy{1.0, 0.0}}).infinite_variation());
    EXPECT_TRUE((LevyModel{Brownian{}}).infinite_variation());
    EXPECT_FALSE((LevyModel{Stable{0.7, 0.5, 1.0, 0.3}}).infinite_variation());
    EXPECT_DOUBLE_EQ((LevyModel{Stable{0.7, 0.5, 1.0, 0.3}}).natural_drift(), 0.3);
    EXPECT_THROW((LevyModel{Stable{1.5, 0.5, 1.0, 0.0}}).natural_drift(), CapabilityError);
}

TEST(SamplePath, GridAndDeterminism) {
    LevyModel m{Stable{1.2, 0.5, 1.0, 0.0}};
    RandomStream a(11), b(11);
    const auto p = sample_path(m, 2.0, 9, a), q = sample_path(m, 2.0, 9, b);
    ASSERT_EQ(p.size(), 9u);
    EXPECT_EQ(p.values, q.values);
    EXPECT_DOUBLE_EQ(p.times.back(), 2.0);
    EXPECT_DOUBLE_EQ(p.times[4], 1.0);
    EXPECT_EQ(p.values[0], 0.0);
    EXPECT_THROW(sample_path(m, 1.0, 1, a), ArgumentError);
}

TEST(StableSampler, KolmogorovAgainstCdf) {
    LevyModel m{Stable{0.8, 0.3, 1.0, 0.0}};
    RandomStream rng(5);
    std::vector<double> x(4000);
    for (auto& v : x)
        v = m.sample_increment(1.0, rng);
    const auto r = stats::ks_one_sample(x, [&](double y) { return m.marginal_cdf(1.0, y).value; });
    EXPECT_GT(r.p_value, 0.01);
}
