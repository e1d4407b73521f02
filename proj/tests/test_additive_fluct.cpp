#include <gtest/gtest.h>

#include "cmlevy/additive_fluct.hpp"

using namespace cmlevy;

TEST(RightInverse, SingleJump) {
    const std::vector<Jump> jumps{{0.3, 2.0}};
    EXPECT_DOUBLE_EQ(right_inverse(jumps, 0.0), 0.3);
    EXPECT_DOUBLE_EQ(right_inverse(jumps, 1.99), 0.3);
    EXPECT_TRUE(std::isinf(right_inverse(jumps, 2.0)));
    EXPECT_DOUBLE_EQ(additive_value(jumps, 0.29), 0.0);
    EXPECT_DOUBLE_EQ(additive_value(jumps, 0.3), 2.0);
}

TEST(RightInverse, ImplicationChainOnSimulatedPaths) {
    LevyModel m{Cauchy{1.0, 0.0}};
    const auto mu = MeanJumpMeasure::fs(m, 0.0, 1.0);
    const AdditiveSampler s(mu, 0.0, 4.0, 1e-6);
    RandomStream rng(4);
    std::vector<double> grid;
    for (int i = 1; i <= 40; ++i)
        grid.push_back(i / 10.0);
    long checked = 0;
    for (int p = 0; p < 1000; ++p) {
        const auto draw = s.sample(rng, true);
        const auto c = check_inverse_implications(draw.jumps, grid, grid);
        EXPECT_EQ(c.first_violations, 0);
        EXPECT_EQ(c.second_violations, 0);
        checked += c.checked;
        // round trip: Y at L_t is at least t
        for (double t : {0.01, 0.1, 0.5}) {
            const double l = right_inverse(draw.jumps, t);
            if (std::isfinite(l))
                EXPECT_GE(additive_value(draw.jumps, l), t);
        }
    }
    EXPECT_EQ(checked, 1000L * 1600L);
}

TEST(UpperSeries, ConstantExponentGivesConstantTerms) {
    const auto spec = AdditiveSpec::from_exponent([](double, double) { return 30.0; });
    const double gamma = 0.5;
    const auto r = upper_series_test(
        spec, [](double t) { return t; }, [gamma](double u) { return gamma / u; },
        [](int n) { return std::exp(static_cast<double>(n)); }, 40);
    EXPECT_EQ(r.series.verdict, Verdict::diverging);
    EXPECT_NEAR(r.series.terms.back(), std::exp(gamma - 30.0), 1e-25);
    EXPECT_NEAR(r.f_ratio_limsup, std::exp(1.0), 1e-9);
}

TEST(UpperSeries, RequiresIncreasingTheta) {
    const auto spec = AdditiveSpec::from_exponent([](double, double) { return 1.0; });
    EXPECT_THROW(upper_series_test(
                     spec, [](double t) { return t; }, [](double u) { return 1.0 / u; }, [](int) { return 2.0; }, 20),
                 ArgumentError);
}

TEST(LowerSeries, ZeroExponentGapSeriesDiverges) {
    const auto spec = AdditiveSpec::from_exponent([](double, double) { return 0.0; });
    const auto r = lower_series_test(
        spec, [](double t) { return t; }, [](double u) { return std::log(u) / u; },
        [](int n) { return std::exp(static_cast<double>(n)); }, 40);
    EXPECT_EQ(r.gap_series.verdict, Verdict::diverging);
    EXPECT_NEAR(r.gap_series.terms.back(), 1.0 - std::exp(-40.0), 1e-12);
    EXPECT_TRUE(r.phi_growth_ok);
}

TEST(JumpConditions, MeasureAwayFromBoundaryIsFinite) {
    const auto spec = AdditiveSpec::from_atoms({{0.5, 0.01, 1.0}, {0.9, 0.2, 3.0}});
    const auto v = jump_conditions(spec, TestFunction::power(1.0), 20);
    EXPECT_EQ(v.large.series.verdict, Verdict::converging);
    EXPECT_EQ(v.var.series.verdict, Verdict::converging);
    EXPECT_EQ(v.mean_var.series.verdict, Verdict::converging);
    EXPECT_EQ(v.mean.verdict, Verdict::converging);
    // var: sum of w x^2 / h(t)^2 over atoms with 2h(t) > x
    EXPECT_NEAR(v.var.total, 1.0 * 1e-4 / 0.25 + 3.0 * 0.04 / 0.81, 1e-9);
    EXPECT_NEAR(v.mean_var.total, 1.0 * 0.01 / 0.5 + 3.0 * 0.2 / 0.9, 1e-9);
    EXPECT_EQ(v.large.total, 0.0);
}

TEST(JumpConditions, SparseAtomsLargeJumpsFiniteForEveryScale) {
    const auto spec = AdditiveSpec::from_atoms(sparse_atoms(40));
    for (double c : {0.15, 0.3, 0.7, 4.0}) {
        const auto h = TestFunction::custom({1e-14, 1.0}, {c * 1e-14, c});
        const auto v = jump_conditions(spec, h, 30);
        EXPECT_EQ(v.large.series.verdict, Verdict::converging) << c;
        // atoms x = t/n with x >= ct exactly when n <= 1/c; scales kept off the n = 1/c tie
        double want = 0.0;
        for (int n = 1; n <= 40 && n * c <= 1.0; ++n)
            want += std::ldexp(1.0, n) / n;
        EXPECT_NEAR(v.large.total, want, 1e-9 * std::max(1.0, want)) << c;
    }
}

TEST(InverseConditions, HandCountedAtomsForSquareFunction) {
    const auto spec = AdditiveSpec::from_atoms({{0.5, 0.04, 2.0}, {0.1, 0.09, 3.0}, {0.2, 0.16, 1.0}});
    const auto v = inverse_jump_conditions(spec, TestFunction::power(2.0), 20);
    EXPECT_TRUE(v.h_convex);
    // h^{-1}(x) = sqrt(x); atoms counted when 2t >= sqrt(x)
    EXPECT_NEAR(v.var_inv.total, 2.0 * 0.04 / 0.25 + 1.0 * 0.16 / 0.04, 1e-9);
    EXPECT_NEAR(v.mean_var_inv.total, 2.0 * 0.2 / 0.5 + 1.0 * 0.4 / 0.2, 1e-9);
}

TEST(InverseConditions, IdentityFunctionMatchesDirectForm) {
    LevyModel m{Cauchy{1.0, 0.0}};
    const auto spec = AdditiveSpec::from_measure(MeanJumpMeasure::fs(m, 0.0, 1.0));
    const auto h = TestFunction::power(1.0);
    const auto a = jump_conditions(spec, h, 16);
    const auto b = inverse_jump_conditions(spec, h, 16);
    EXPECT_NEAR(a.var.total, b.var_inv.total, 1e-6 * a.var.total);
    EXPECT_NEAR(a.mean_var.total, b.mean_var_inv.total, 1e-6 * a.mean_var.total);
    EXPECT_EQ(a.var.series.verdict, b.var_inv.series.verdict);
}

TEST(InverseConditions, FlagsNonConvexFunction) {
    const auto spec = AdditiveSpec::from_atoms({{0.5, 0.04, 1.0}});
    EXPECT_FALSE(inverse_jump_conditions(spec, TestFunction::power(0.5), 12).h_convex);
}

TEST(SparseAtoms, EmptyRangeNeverSucceeds) {
    RandomStream rng(1);
    const auto r = sparse_atom_experiment(12, 11, 50, rng);
    EXPECT_EQ(r.successes, 0);
    EXPECT_EQ(r.frequency, 0.0);
}

TEST(SparseAtoms, AtomLayout) {
    const auto a = sparse_atoms(3);
    ASSERT_EQ(a.size(), 3u);
    EXPECT_DOUBLE_EQ(a[2].index, 0.125);
    EXPECT_DOUBLE_EQ(a[2].size, 0.125 / 3.0);
    EXPECT_DOUBLE_EQ(a[2].weight, 8.0 / 3.0);
}

TEST(AdditiveSpec, ExponentOfMixture) {
    auto spec = AdditiveSpec::from_atoms({{0.2, 1.0, 2.0}});
    spec.add_stationary({{0.5, 3.0}});
    const double want = 2.0 * -std::expm1(-1.5) + 0.4 * 3.0 * -std::expm1(-0.75);
    EXPECT_NEAR(spec.psi(0.4, 1.5), want, 1e-14);
    EXPECT_NEAR(spec.psi(0.1, 1.5), 0.1 * 3.0 * -std::expm1(-0.75), 1e-14);
    EXPECT_THROW(spec.psi(0.1, -1.0), ArgumentError);
}
