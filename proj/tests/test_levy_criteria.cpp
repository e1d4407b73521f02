#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "cmlevy/levy_criteria.hpp"
#include "oracles.hpp"

using namespace cmlevy;

namespace {

template <class F>
double gk(F&& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-12);
}

} // namespace

TEST(GRatio, RoundTrip) {
    for (double alpha : {0.5, 1.5})
        for (double y : {0.01, 2.0})
            EXPECT_NEAR(g_ratio(alpha, 1.3, g_ratio_inverse(alpha, 1.3, y)), y, 1e-12 * y);
    EXPECT_THROW(g_ratio_inverse(1.0, 1.0, 2.0), DomainError);
}

TEST(MarginalLaw, ExactAndGenericRoutesAgree) {
    LevyModel m{Stable{1.5, 0.6, 1.0, 0.0}};
    const MarginalLaw a(m, Route::exact_scaling), b(m, Route::generic);
    for (double t : {1e-4, 0.3})
        for (auto [lo, hi] : std::vector<std::pair<double, double>>{{-inf, -0.5}, {-1.0, 2.0}, {0.1, inf}})
            EXPECT_NEAR(a.interval(t, lo, hi), b.interval(t, lo, hi), 1e-9);
    LevyModel c{Cauchy{1.0, 0.0}};
    const MarginalLaw ce(c, Route::exact_scaling);
    EXPECT_NEAR(ce.interval(0.5, -inf, -1e6), 0.5e-6 / 3.141592653589793, 1e-15);
    LevyModel bm{Brownian{}};
    EXPECT_THROW(MarginalLaw(bm, Route::exact_scaling), CapabilityError);
}

TEST(IsConditions, CauchyLargeShellsMatchQuadrature) {
    LevyModel m{Cauchy{1.0, 0.0}};
    const auto r = is_conditions(m, TestFunction::power(0.5), 1.0, 12);
    for (int k = 1; k <= 12; ++k) {
        const double lo = std::ldexp(1.0, -k), hi = 2.0 * lo;
        const double want = gk([](double t) { return oracle::cauchy_cdf(-std::pow(t, -0.5)) / t; }, lo, hi);
        EXPECT_NEAR(r.large.terms[k - 1], want, 1e-9 * want) << k;
    }
    EXPECT_EQ(r.large.verdict, Verdict::converging);
    EXPECT_FALSE(r.normalization_flag);
}

TEST(IsConditions, VerdictsFollowIntegralOfFPowerMinusAlpha) {
    // int_0 F^{-alpha} with F = t/f: finite for sqrt(t) and t log(e/t), infinite for 1/log(e/t)
    for (auto m : {LevyModel{Cauchy{1.0, 0.0}}, LevyModel{Stable{1.5, 0.5, 1.0, 0.0}}}) {
        EXPECT_EQ(is_conditions(m, TestFunction::power(0.5)).large.verdict, Verdict::converging);
        EXPECT_EQ(is_conditions(m, TestFunction::t_log(1.0)).large.verdict, Verdict::converging);
        EXPECT_EQ(is_conditions(m, TestFunction::inverse_log(1.0)).large.verdict, Verdict::diverging);
    }
}

TEST(IsConditions, BrownianSqrtDiverges) {
    // P(B_t <= -sqrt t) is constant, so the large-jump integral is a multiple of int dt/t
    LevyModel m{Brownian{}};
    const auto r = is_conditions(m, TestFunction::power(0.5), 1.0, 20);
    EXPECT_EQ(r.large.verdict, Verdict::diverging);
    EXPECT_NEAR(r.large.terms[5], 0.5 * std::erfc(1.0 / std::sqrt(2.0)) * std::log(2.0), 1e-9);
    EXPECT_EQ(r.suff_var.verdict, Verdict::diverging);
}

TEST(IsConditions, RequiresInfiniteVariation) {
    LevyModel m{Stable{0.7, 0.5, 1.0, 0.0}};
    EXPECT_THROW(is_conditions(m, TestFunction::power(0.5)), PreconditionError);
    LevyModel c{Cauchy{1.0, 0.0}};
    EXPECT_THROW(is_conditions(c, TestFunction::power(0.5), 1.0, 5), ArgumentError);
}

TEST(IsConditions, FrozenTableIsFlagged) {
    LevyModel m{Cauchy{1.0, 0.0}};
    const auto r = is_conditions(m, TestFunction::custom({1e-12, 1.0}, {1.0, 1.0}), 1.0, 12);
    EXPECT_TRUE(r.normalization_flag);
}

TEST(FsConditions, CauchyLargeVerdicts) {
    // int_0 t^{-1} f(t) dt decides: finite for sqrt(t) and t, infinite for 1/log(e/t)
    LevyModel m{Cauchy{1.0, 0.0}};
    EXPECT_EQ(fs_conditions(m, 0.0, TestFunction::power(0.5)).large.verdict, Verdict::converging);
    EXPECT_EQ(fs_conditions(m, 0.0, TestFunction::power(1.0)).large.verdict, Verdict::converging);
    EXPECT_EQ(fs_conditions(m, 0.0, TestFunction::inverse_log(1.0)).large.verdict, Verdict::diverging);
}

TEST(FsConditions, CauchyLargeShellsMatchQuadrature) {
    // P(0 < V_t <= f(t)) with V_t = X_t/t - s is Cauchy mass of (s, s + f(t)]
    LevyModel m{Cauchy{1.0, 0.0}};
    const double s = 0.4;
    const auto r = fs_conditions(m, s, TestFunction::power(1.0), 1.0, 10);
    for (int k = 1; k <= 10; ++k) {
        const double lo = std::ldexp(1.0, -k), hi = 2.0 * lo;
        const double want = gk(
            [s](double t) { return (oracle::cauchy_cdf(s + t) - oracle::cauchy_cdf(s)) / t; }, lo, hi);
        EXPECT_NEAR(r.large.terms[k - 1], want, 1e-9 * want) << k;
    }
}

TEST(PowerBound, PlainIntegralClosedForm) {
    // beta = 1/2, f = t^{3/2}: shells of t^{-1/2} dt
    const auto r = power_bound_integrals(0.5, TestFunction::power(1.5), 20);
    for (int k = 1; k <= 20; ++k) {
        const double lo = std::ldexp(1.0, -k), hi = 2.0 * lo;
        EXPECT_NEAR(r.plain.terms[k - 1], 2.0 * (std::sqrt(hi) - std::sqrt(lo)), 1e-12);
    }
    EXPECT_EQ(r.plain.verdict, Verdict::converging);
    EXPECT_EQ(r.capped.verdict, Verdict::converging);
    // the inner integral of f'(y)/y reaches up to y = 1, so the derivative form keeps a t^{-1} part
    EXPECT_EQ(r.derivative_form.verdict, Verdict::diverging);
}

TEST(PowerBound, SqrtDiverges) {
    const auto r = power_bound_integrals(0.5, TestFunction::power(0.5));
    EXPECT_EQ(r.plain.verdict, Verdict::diverging);
    EXPECT_EQ(r.capped.verdict, Verdict::diverging);
    EXPECT_THROW(power_bound_integrals(1.5, TestFunction::power(0.5)), ParameterError);
    EXPECT_THROW(power_bound_integrals(0.5, TestFunction::custom({0.5, 1.0}, {0.5, 1.0})), CapabilityError);
}

TEST(Audit, BrownianSecondMomentMatchesVariance) {
    LevyModel m{Brownian{1.0, 0.0}};
    const auto r = truncated_moment_audit(m, {{0.25, 1e6, 1.0, 2.0}, {1.0, 0.5, 0.5, 1.0}}, 40000, RandomStream(3));
    EXPECT_NEAR(r.rows[0].estimate, 0.25, 4 * r.rows[0].standard_error);
    EXPECT_NEAR(r.rows[0].bound, 0.25, 1e-15);
    // E[min(|Z|, 1/2)]: quadrature of the half-normal density
    const double want = gk(
        [](double x) { return std::min(x, 0.5) * std::sqrt(2.0 / 3.141592653589793) * std::exp(-0.5 * x * x); },
        0.0, 40.0);
    EXPECT_NEAR(r.rows[1].estimate, want, 4 * r.rows[1].standard_error);
    EXPECT_EQ(r.violations, 0);
}

TEST(Audit, PlusMinusJumpsBound) {
    LevyModel m{CompoundPoissonDrift{2.0, JumpLaw{JumpLaw::Kind::plus_minus, 1.0, 0.0}, 0.0}};
    const AuditPoint a{0.1, 10.0, 0.5, 2.0};
    EXPECT_NEAR(truncated_moment_bound(m, a), 100.0 * 2.0 * 0.1, 1e-12);
    const auto r = truncated_moment_audit(m, {a}, 20000, RandomStream(1));
    EXPECT_NEAR(r.rows[0].estimate, 0.2, 4 * r.rows[0].standard_error);
}

TEST(Audit, ThreadCountDoesNotChangeResults) {
    LevyModel m{Stable{1.5, 0.5, 1.0, 0.0}};
    const std::vector<AuditPoint> grid{{0.1, 1, 1, 2}, {0.5, 2, 0.5, 1}, {1, 1, 1, 0.5}};
    const auto a = truncated_moment_audit(m, grid, 2000, RandomStream(5), 1);
    const auto b = truncated_moment_audit(m, grid, 2000, RandomStream(5), 3);
    for (std::size_t i = 0; i < grid.size(); ++i)
        EXPECT_EQ(a.rows[i].estimate, b.rows[i].estimate);
    EXPECT_THROW(truncated_moment_audit(m, {{0.1, 1, 2.0, 2}}, 10, RandomStream(1)), ParameterError);
}

TEST(Asymptotics, CauchyCorrectedRatioIsOne) {
    LevyModel m{Cauchy{1.0, 0.0}};
    const auto r = exponent_asymptotics(
        m, ExponentKind::phi, AsymptoticRegime::growing, [](int n) { return std::ldexp(1.0, n); },
        [](int n) { return -static_cast<double>(n); }, 12);
    for (const auto& row : r.rows)
        EXPECT_NEAR(row.corrected, 1.0, 1e-6) << row.n;
}

TEST(Asymptotics, Preconditions) {
    LevyModel s15{Stable{1.5, 0.6, 1.0, 0.0}};
    auto u = [](int n) { return std::ldexp(1.0, n); };
    auto s = [](int n) { return -static_cast<double>(n); };
    EXPECT_THROW(exponent_asymptotics(s15, ExponentKind::psi, AsymptoticRegime::growing, u, s, 10),
                 PreconditionError);
    LevyModel drifted{Stable{1.5, 0.6, 1.0, 0.3}};
    EXPECT_THROW(exponent_asymptotics(drifted, ExponentKind::phi, AsymptoticRegime::growing, u, s, 10),
                 PreconditionError);
    // u_n G^{-1}(1/n) = 2^n / n^3 only grows late; with u_n = 1 it shrinks
    EXPECT_THROW(exponent_asymptotics(
                     s15, ExponentKind::phi, AsymptoticRegime::growing, [](int) { return 1.0; }, s, 10),
                 PreconditionError);
}

TEST(Asymptotics, VanishingRegimeStaysBounded) {
    LevyModel m{Stable{1.5, 0.6, 1.0, 0.0}};
    const auto r = exponent_asymptotics(
        m, ExponentKind::phi, AsymptoticRegime::vanishing, [](int n) { return std::ldexp(1.0, -n); },
        [](int n) { return -static_cast<double>(n); }, 16);
    EXPECT_TRUE(r.bounded);
    for (const auto& row : r.rows)
        EXPECT_LE(row.exponent, row.reference * 10.0);
}
