#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include <hestonis/drift_bs.hpp>

using namespace hestonis;

TEST(DriftBs, RootAtTwo) {
    EXPECT_NEAR(bs_root(1.0, 2.0 - std::log(2.0)), 2.0, 1e-10);
}

TEST(DriftBs, RootResidualAcrossRegimes) {
    for (double v : {1e-3, 0.02, 0.3, 1.0, 5.0})
        for (double c : {-20.0, -1.0, 0.0, 0.1, 1.0, 4.0}) {
            const double b = bs_root(v, c);
            EXPECT_GT(b, 1.0);
            // log(b - 1) cannot be resolved better than one ulp of b relative to b - 1
            const double floor = 4.0 * std::numeric_limits<double>::epsilon() * b / (b - 1.0);
            EXPECT_LE(std::abs(bs_root_residual(v, c, b)), std::max(1e-10, floor)) << v << ' ' << c;
        }
}

TEST(DriftBs, DeepInTheMoneyTendsToOne) {
    EXPECT_LT(bs_root(1.0, -15.0) - 1.0, 1e-6);
    const double b = bs_root(1.0, -40.0);
    EXPECT_GE(b, 1.0);
    EXPECT_LT(b - 1.0, 1e-15);
    EXPECT_EQ(bs_root(1.0, -std::numeric_limits<double>::infinity()), 1.0);
}

TEST(DriftBs, RootRejectsBadInputs) {
    EXPECT_THROW(bs_root(0.0, 1.0), DomainError);
    EXPECT_THROW(bs_root(1.0, std::nan("")), DomainError);
    EXPECT_THROW(bs_root(1e-9, 1e4), OptimError);
}

TEST(DriftBs, ScheduleShapes) {
    const TimeGrid g(10, 1.0);
    const std::vector<double> sigma(11, 0.25), alpha(11, 1.0);
    EXPECT_TRUE(bs_drift(0.0, sigma, alpha, -0.5, g, DriftMode::Deterministic).is_zero());
    const auto d0 = bs_drift(2.0, sigma, alpha, 0.0, g, DriftMode::Deterministic);
    for (double h : d0.h1) EXPECT_EQ(h, 0.0);
    const auto d = bs_drift(2.0, sigma, alpha, -0.5, g, DriftMode::Deterministic);
    for (std::size_t i = 0; i <= 10; ++i) {
        EXPECT_NEAR(d.h1[i], -0.25, 1e-15);
        EXPECT_NEAR(d.h2[i], 0.25 * std::sqrt(3.0), 1e-15);
    }
    EXPECT_THROW(bs_drift(2.0, sigma, alpha, -0.5, g, DriftMode::PerStepAdaptive), DomainError);
}

TEST(DriftBs, ReductionUsesLeftEndpointSums) {
    const HestonParams p;
    const TimeGrid g(4, 1.0);
    const auto spec = PayoffSpec::make(PayoffKind::GeometricAsianCall, 55.0, p);
    const std::vector<double> sigma(5, 0.2);
    const auto r = bs_beta(spec, sigma, spec.require_weight(), g);
    // alpha at t = 0, 1/4, 1/2, 3/4
    const double sa2 = 1.0 + 0.5625 + 0.25 + 0.0625, sa = 1.0 + 0.75 + 0.5 + 0.25;
    EXPECT_NEAR(r.v_quad, 0.04 * sa2 * 0.25, 1e-15);
    EXPECT_NEAR(r.drift_shift, 0.5 * 0.04 * sa * 0.25, 1e-15);
    EXPECT_NEAR(r.threshold, spec.threshold() + r.drift_shift, 1e-15);
    EXPECT_LE(std::abs(bs_root_residual(r.v_quad, r.threshold, r.beta_star)), 1e-10);
}

TEST(DriftBs, FullyAdaptiveFirstStepEqualsStatic) {
    const HestonParams p;
    const TimeGrid g(252, 1.0);
    const auto spec = PayoffSpec::make(PayoffKind::GeometricAsianCall, 55.0, p);
    const BsFullyAdaptive gen(spec, p.rho, g);
    const std::vector<double> sigma(253, std::sqrt(p.v0));
    const auto r = bs_beta(spec, sigma, spec.require_weight(), g);
    const auto d = bs_drift(r.beta_star, sigma, r.alpha, p.rho, g, DriftMode::Deterministic);
    const auto m = gen(0, 0.0, p.v0);
    EXPECT_NEAR(m[0], d.h1[0], 1e-10);
    EXPECT_NEAR(m[1], d.h2[0], 1e-10);
}

TEST(DriftBs, FullyAdaptiveDeepInTheMoneyIsSmall) {
    const HestonParams p;
    const TimeGrid g(252, 1.0);
    const auto spec = PayoffSpec::make(PayoffKind::GeometricAsianCall, 50.0, p);
    const BsFullyAdaptive gen(spec, p.rho, g);
    EXPECT_LT(gen.beta_at(126, 20.0, p.v0) - 1.0, 1e-6);
    const auto m = gen(126, 20.0, p.v0);
    const auto m0 = gen(126, 0.0, p.v0);
    EXPECT_LT(std::hypot(m[0], m[1]), std::hypot(m0[0], m0[1]));
}

TEST(DriftBs, FullyAdaptiveFiniteAtLastStep) {
    const HestonParams p;
    const TimeGrid g(252, 1.0);
    const auto spec = PayoffSpec::make(PayoffKind::GeometricAsianCall, 60.0, p);
    const BsFullyAdaptive gen(spec, p.rho, g);
    for (double agg : {-0.1, 0.0, 0.1, 0.2, 0.5}) {
        const auto m = gen(251, agg, 0.06);
        EXPECT_TRUE(std::isfinite(m[0]) && std::isfinite(m[1]));
    }
}
