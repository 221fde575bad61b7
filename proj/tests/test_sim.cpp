#include <gtest/gtest.h>

#include <cmath>

#include <hestonis/measure.hpp>
#include <hestonis/rng.hpp>
#include <hestonis/sim.hpp>
#include <hestonis/stats.hpp>

using namespace hestonis;

TEST(Rng, PhiloxKnownAnswers) {
    using C = Philox4x32::Counter;
    EXPECT_EQ(Philox4x32(0)(C{0, 0, 0, 0}), (C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
    EXPECT_EQ(Philox4x32(0xffffffffffffffffull)(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}),
              (C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
    EXPECT_EQ(Philox4x32(0x299f31d0a4093822ull)(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}),
              (C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(Rng, InverseNormalQuantiles) {
    EXPECT_NEAR(inverse_normal_cdf(0.5), 0.0, 1e-16);
    EXPECT_NEAR(inverse_normal_cdf(0.975), 1.959963984540054, 1e-14);
    EXPECT_NEAR(inverse_normal_cdf(1e-10), -6.361340902404056, 1e-12);
    EXPECT_NEAR(inverse_normal_cdf(0.1), -inverse_normal_cdf(0.9), 1e-15);
}

TEST(Rng, StreamsAreAddressable) {
    const NormalStream a(5), b(5), c(6), d(5, 1);
    EXPECT_EQ(a.pair(17, 3), b.pair(17, 3));
    EXPECT_NE(a.pair(17, 3), c.pair(17, 3));
    EXPECT_NE(a.pair(17, 3), d.pair(17, 3));
    EXPECT_NE(a.pair(17, 3), a.pair(17, 4));
}

TEST(Rng, NormalMoments) {
    const NormalStream s(20240607);
    std::vector<double> z;
    for (std::uint64_t p = 0; p < 50000; ++p) {
        const auto q = s.pair(p, 0);
        z.push_back(q[0]);
        z.push_back(q[1]);
    }
    const auto st = sample_stats(z);
    EXPECT_LT(std::abs(st.mean) / st.std_err(), 4.0);
    EXPECT_NEAR(st.variance, 1.0, 4.0 * std::sqrt(2.0 / z.size()));
}

TEST(Stats, PairwiseSumAndVariance) {
    const std::vector<double> x{1.0, 2.0, 3.0, 4.0};
    EXPECT_EQ(pairwise_sum(x), 10.0);
    const auto st = sample_stats(x);
    EXPECT_DOUBLE_EQ(st.mean, 2.5);
    EXPECT_DOUBLE_EQ(st.variance, 5.0 / 3.0);
}

TEST(Sim, OneStepZeroNoise) {
    const HestonParams p;
    const TimeGrid g(252, 1.0);
    const HestonStepper s(p, g);
    double x = 0.0, v = s.v_init();
    s.step(x, v, 0.0, 0.0);
    EXPECT_NEAR(v, 0.0403968253968254, 1e-15);
    EXPECT_NEAR(x, -7.93650793650794e-5, 1e-17);
}

TEST(Sim, FullTruncationKeepsNegativeRawState) {
    HestonParams p;
    p.v0 = 1e-4;
    const TimeGrid g(252, 1.0);
    const HestonStepper s(p, g);
    double x = 0.0, v = p.v0;
    s.step(x, v, -0.5, 0.0);
    EXPECT_LT(v, 0.0);
    const double x_before = x;
    const double v_before = v;
    s.step(x, v, 0.3, 0.2);
    EXPECT_EQ(x, x_before);  // V+ = 0 freezes X
    EXPECT_NEAR(v, v_before + p.kappa * p.theta * g.dt(), 1e-15);
}

TEST(Sim, TerminalVarianceMean) {
    const HestonParams p;
    const TimeGrid g(252, 1.0);
    const auto b = simulate_p(p, g, 100000, {});
    std::vector<double> vt(b.n_paths);
    for (std::size_t k = 0; k < b.n_paths; ++k) vt[k] = b.v_raw_at(k, 252);
    const auto st = sample_stats(vt);
    EXPECT_LT(std::abs(st.mean - 0.0832332358381694) / st.std_err(), 4.0);
}

TEST(Sim, ZeroDriftIsBitIdenticalToP) {
    const HestonParams p;
    const TimeGrid g(50, 1.0);
    const auto a = simulate_p(p, g, 300, {7, 0});
    const auto b = simulate_q(p, g, 300, {7, 0}, DriftSchedule::zero(g));
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.v_raw, b.v_raw);
}

TEST(Sim, ShiftedFirstStep) {
    const HestonParams p;
    const TimeGrid g(252, 1.0);
    const double c = 0.7, dt = g.dt();
    auto d = DriftSchedule::zero(g);
    std::fill(d.h1.begin(), d.h1.end(), c);
    const HestonStepper s(p, g);
    for (auto mode : {DriftMode::Deterministic, DriftMode::Adaptive}) {
        d.mode = mode;
        const auto m = d.rates(0, 0.0, p.v0);
        double x = 0.0, v = p.v0;
        s.step(x, v, m[0] * dt, m[1] * dt);
        const double expect = mode == DriftMode::Deterministic
                                  ? p.v0 + p.kappa * (p.theta - p.v0) * dt + p.xi * std::sqrt(p.v0) * c * dt
                                  : p.v0 + p.kappa * (p.theta - p.v0) * dt + p.xi * p.v0 * c * dt;
        EXPECT_NEAR(v, expect, 1e-15);
    }
}

TEST(Sim, AntitheticPairsMirrorIncrements) {
    const HestonParams p;
    const TimeGrid g(30, 1.0);
    const auto b = antithetic_pairs(p, g, 10, {});
    for (std::size_t k = 0; k < 10; k += 2)
        for (std::size_t i = 0; i < 30; ++i) {
            EXPECT_EQ(b.dw_at(k + 1, i), -b.dw_at(k, i));
            EXPECT_EQ(b.dw_perp_at(k + 1, i), -b.dw_perp_at(k, i));
        }
    EXPECT_THROW(antithetic_pairs(p, g, 9, {}), DomainError);
}

TEST(Sim, AntitheticLinearPayoffCancelsWithFrozenVariance) {
    const TimeGrid g(30, 1.0);
    const ConstantVolStepper s(0.2, g, -0.5);
    const NormalStream n(3);
    for (std::uint64_t k = 0; k < 20; ++k) {
        double x_sum = 0.0;
        for (double sign : {1.0, -1.0}) {
            double x = 0.0;
            run_path(s, g, n, k, sign, nullptr, true, nullptr, [&](std::size_t, double xn, double, double, double, double) {
                x = xn;
            });
            x_sum += x + 0.5 * 0.04 * g.t_end();  // centred X_T
        }
        EXPECT_NEAR(x_sum, 0.0, 1e-14);
    }
}

TEST(Sim, ResultsIndependentOfThreadCount) {
    const HestonParams p;
    const TimeGrid g(50, 1.0);
    thread_count_override() = 1;
    const auto a = simulate_p(p, g, 3000, {});
    thread_count_override() = 4;
    const auto b = simulate_p(p, g, 3000, {});
    thread_count_override() = 0;
    EXPECT_EQ(a.x, b.x);
    EXPECT_EQ(a.v_raw, b.v_raw);
}
