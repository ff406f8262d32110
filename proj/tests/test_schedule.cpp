// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "resmaster/errors.hpp"
#include "resmaster/schedule.hpp"

using namespace resmaster;

TEST(Schedule, TwoStepProduct) {
    const auto s = make_linear_schedule(2, 0.1, 0.2);
    EXPECT_DOUBLE_EQ(s.beta(1), 0.1);
    EXPECT_DOUBLE_EQ(s.beta(2), 0.2);
    EXPECT_NEAR(s.alpha_bar(1), 0.9, 1e-15);
    EXPECT_NEAR(s.alpha_bar(2), 0.72, 1e-15);
    EXPECT_EQ(s.alpha(2), 1.0 - s.beta(2));
}

TEST(Schedule, SingleStep) {
    const auto s = make_linear_schedule(1, 0.02, 0.02);
    ASSERT_EQ(s.steps(), 1);
    EXPECT_NEAR(s.alpha_bar(1), 0.98, 1e-15);
    EXPECT_EQ(s.alpha_bar(0), 1.0);
}

TEST(Schedule, DefaultScheduleMatchesExtendedPrecisionProduct) {
    // Product of (1 - beta_i) over the 1000-step linear schedule, evaluated at 40 digits.
    constexpr double kOracle = 4.035829765375683314817635e-05;
    const auto s = make_linear_schedule(1000, 1e-4, 0.02);
    EXPECT_NEAR(s.alpha_bar(1000) / kOracle, 1.0, 1e-12);
}

TEST(Schedule, RejectsBadArguments) {
    EXPECT_THROW(make_linear_schedule(0, 1e-4, 0.02), InvalidArgument);
    EXPECT_THROW(make_linear_schedule(10, 0.0, 0.02), InvalidArgument);
    EXPECT_THROW(make_linear_schedule(10, 0.03, 0.02), InvalidArgument);
    EXPECT_THROW(make_linear_schedule(10, 1e-4, 1.0), InvalidArgument);
    EXPECT_THROW(NoiseSchedule::from_alpha_bars({0.9, 0.95}), InvalidArgument);
    const auto s = make_linear_schedule(10, 1e-4, 0.02);
    EXPECT_THROW(s.beta(0), InvalidArgument);
    EXPECT_THROW(s.alpha_bar(11), InvalidArgument);
}

TEST(Schedule, AlphaBarStrictlyDecreasingForRandomLinearSchedules) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> lo(1e-6, 0.05);
    std::uniform_int_distribution<int> steps(1, 1000);
    for (int trial = 0; trial < 50; ++trial) {
        const double a = lo(rng);
        const double b = std::uniform_real_distribution<double>(a, 0.1)(rng);
        const auto s = make_linear_schedule(steps(rng), a, b);
        double prev = 1.0;
        for (int t = 1; t <= s.steps(); ++t) {
            ASSERT_LT(s.alpha_bar(t), prev);
            ASSERT_GT(s.alpha_bar(t), 0.0);
            ASSERT_EQ(s.alpha(t), 1.0 - s.beta(t));
            prev = s.alpha_bar(t);
        }
    }
}

TEST(Schedule, RejectsUnderflowingProduct) {
    EXPECT_THROW(make_linear_schedule(2000, 0.5, 0.9), InvalidArgument);
}

TEST(Schedule, RespacedTimesteps) {
    const auto ts = respaced_timesteps(1000, 50);
    ASSERT_EQ(ts.size(), 50u);
    EXPECT_EQ(ts.front(), 20);
    EXPECT_EQ(ts.back(), 1000);
    for (std::size_t i = 1; i < ts.size(); ++i) EXPECT_GT(ts[i], ts[i - 1]);
    EXPECT_EQ(respaced_timesteps(7, 7), (std::vector<int>{1, 2, 3, 4, 5, 6, 7}));
    EXPECT_EQ(respaced_timesteps(10, 3), (std::vector<int>{3, 7, 10}));
    EXPECT_THROW(respaced_timesteps(10, 11), InvalidArgument);
}

TEST(Schedule, RespaceKeepsAlphaBarAtVisitedSteps) {
    const auto base = make_linear_schedule(1000, 1e-4, 0.02);
    const auto r = respace(base, 50);
    const auto ts = respaced_timesteps(1000, 50);
    ASSERT_EQ(r.steps(), 50);
    for (int k = 1; k <= 50; ++k) {
        EXPECT_EQ(r.alpha_bar(k), base.alpha_bar(ts[k - 1]));
        EXPECT_NEAR(r.alpha(k), 1.0 - r.beta(k), 0.0);
    }
}

namespace {

struct Fixture {
    std::mt19937_64 rng{5};
    NoiseSchedule s = make_linear_schedule(10, 1e-3, 0.2);
};

}  // namespace

TEST(ForwardDiffuse, ZeroNoiseScalesSignal) {
    Fixture f;
    const auto z0 = oracle::random_grid(f.rng, 4, 5, 2);
    const LatentGrid zero(4, 5, 2);
    const auto zt = forward_diffuse(z0, 7, zero, f.s);
    for (std::size_t i = 0; i < z0.size(); ++i) {
        EXPECT_DOUBLE_EQ(zt.data()[i], std::sqrt(f.s.alpha_bar(7)) * z0.data()[i]);
    }
}

TEST(ForwardDiffuse, NearNoiselessLimitIsIdentity) {
    std::mt19937_64 rng(9);
    const auto s = make_linear_schedule(1, 1e-12, 1e-12);
    const auto z0 = oracle::random_grid(rng, 3, 3, 1);
    const auto eps = oracle::random_grid(rng, 3, 3, 1);
    const auto zt = forward_diffuse(z0, 1, eps, s);
    for (std::size_t i = 0; i < z0.size(); ++i) EXPECT_NEAR(zt.data()[i], z0.data()[i], 2e-6);
}

TEST(ForwardDiffuse, MatchesStepwiseChain) {
    // z_t = sqrt(a_t) z_{t-1} + sqrt(b_t) e_t for t = 1..3, with the matching
    // marginal noise eps = sum_t sqrt(prod_{s>t} a_s) sqrt(b_t) e_t / sqrt(1 - abar_3).
    std::mt19937_64 rng(21);
    const auto s = make_linear_schedule(3, 0.05, 0.3);
    const auto z0 = oracle::random_grid(rng, 5, 4, 3);
    std::vector<LatentGrid> e;
    for (int t = 0; t < 3; ++t) e.push_back(oracle::random_grid(rng, 5, 4, 3));

    LatentGrid chain = z0;
    for (int t = 1; t <= 3; ++t) {
        for (std::size_t i = 0; i < chain.size(); ++i) {
            chain.data()[i] = std::sqrt(s.alpha(t)) * chain.data()[i] + std::sqrt(s.beta(t)) * e[t - 1].data()[i];
        }
    }
    LatentGrid eps(5, 4, 3);
    const long double norm = std::sqrt(1.0L - s.alpha_bar(3));
    for (std::size_t i = 0; i < eps.size(); ++i) {
        long double acc = 0;
        for (int t = 1; t <= 3; ++t) {
            long double later = 1;
            for (int u = t + 1; u <= 3; ++u) later *= s.alpha(u);
            acc += std::sqrt(later) * std::sqrt(static_cast<long double>(s.beta(t))) * e[t - 1].data()[i];
        }
        eps.data()[i] = static_cast<double>(acc / norm);
    }
    const auto direct = forward_diffuse(z0, 3, eps, s);
    for (std::size_t i = 0; i < chain.size(); ++i) EXPECT_NEAR(direct.data()[i], chain.data()[i], 1e-12);
}

TEST(ForwardDiffuse, ShapeAndTimestepErrors) {
    Fixture f;
    const LatentGrid a(2, 2, 1), b(2, 3, 1);
    EXPECT_THROW(forward_diffuse(a, 1, b, f.s), InvalidArgument);
    EXPECT_THROW(forward_diffuse(a, 0, a, f.s), InvalidArgument);
    EXPECT_THROW(forward_diffuse(a, 11, a, f.s), InvalidArgument);
}

TEST(PredictX0, InvertsForwardDiffusion) {
    std::mt19937_64 rng(3);
    const auto s = make_linear_schedule(1000, 1e-4, 0.02);
    for (int t : {1, 2, 100, 999, 1000}) {
        const auto z0 = oracle::random_grid(rng, 6, 7, 3, -5, 5);
        const auto eps = oracle::random_grid(rng, 6, 7, 3, -3, 3);
        const auto back = predict_x0(forward_diffuse(z0, t, eps, s), eps, t, s);
        for (std::size_t i = 0; i < z0.size(); ++i) {
            const double scale = std::max(1.0, std::abs(z0.data()[i]));
            ASSERT_LT(std::abs(back.data()[i] - z0.data()[i]) / scale, 1e-10) << "t=" << t;
        }
    }
}

TEST(PredictX0, ZeroEstimateDividesBySignal) {
    Fixture f;
    const auto zt = oracle::random_grid(f.rng, 3, 3, 2);
    const auto out = predict_x0(zt, LatentGrid(3, 3, 2), 4, f.s);
    for (std::size_t i = 0; i < zt.size(); ++i) {
        EXPECT_NEAR(out.data()[i], zt.data()[i] / std::sqrt(f.s.alpha_bar(4)), 1e-15);
    }
}

TEST(PredictX0, MatchesExtendedPrecisionFormula) {
    Fixture f;
    const auto zt = oracle::random_grid(f.rng, 4, 4, 2, -3, 3);
    const auto eps = oracle::random_grid(f.rng, 4, 4, 2, -3, 3);
    for (int t = 1; t <= 10; ++t) {
        const auto out = predict_x0(zt, eps, t, f.s);
        const long double ab = f.s.alpha_bar(t);
        for (std::size_t i = 0; i < zt.size(); ++i) {
            const long double expect = (zt.data()[i] - std::sqrt(1.0L - ab) * eps.data()[i]) / std::sqrt(ab);
            ASSERT_NEAR(out.data()[i], static_cast<double>(expect), 1e-13);
        }
    }
    EXPECT_THROW(predict_x0(zt, LatentGrid(4, 4, 1), 1, f.s), InvalidArgument);
}

TEST(PosteriorStep, FirstStepReturnsCleanEstimateExactly) {
    Fixture f;
    const auto zt = oracle::random_grid(f.rng, 5, 5, 3);
    const auto z0 = oracle::random_grid(f.rng, 5, 5, 3);
    const auto noise = oracle::random_grid(f.rng, 5, 5, 3);
    EXPECT_EQ(posterior_step(zt, z0, 1, noise, f.s), z0);
    const auto k = posterior_coefficients(1, f.s);
    EXPECT_EQ(k.clean, 1.0);
    EXPECT_EQ(k.variance, 0.0);
}

TEST(PosteriorStep, ZeroInputsGiveZero) {
    Fixture f;
    const LatentGrid zero(3, 3, 1);
    for (int t = 1; t <= 10; ++t) EXPECT_EQ(posterior_step(zero, zero, t, zero, f.s), zero);
}

TEST(PosteriorStep, MatchesExtendedPrecisionPosterior) {
    std::mt19937_64 rng(12);
    const auto s = make_linear_schedule(10, 1e-3, 0.2);
    const auto zt = oracle::random_grid(rng, 4, 6, 2, -2, 2);
    const auto z0 = oracle::random_grid(rng, 4, 6, 2, -2, 2);
    const auto noise = oracle::random_grid(rng, 4, 6, 2, -2, 2);
    // Betas re-derived in long double straight from the linear definition.
    std::vector<long double> beta(11), abar(11);
    abar[0] = 1;
    for (int t = 1; t <= 10; ++t) {
        beta[t] = 1e-3L + (0.2L - 1e-3L) * (t - 1) / 9.0L;
        abar[t] = abar[t - 1] * (1 - beta[t]);
    }
    const int t = 5;
    const long double mu_clean = std::sqrt(abar[t - 1]) * beta[t] / (1 - abar[t]);
    const long double mu_noisy = std::sqrt(1 - beta[t]) * (1 - abar[t - 1]) / (1 - abar[t]);
    const long double sigma = std::sqrt((1 - abar[t - 1]) / (1 - abar[t]) * beta[t]);
    const auto out = posterior_step(zt, z0, t, noise, s);
    for (std::size_t i = 0; i < zt.size(); ++i) {
        const long double expect = mu_clean * z0.data()[i] + mu_noisy * zt.data()[i] + sigma * noise.data()[i];
        EXPECT_NEAR(out.data()[i], static_cast<double>(expect), 1e-13);
    }
}

TEST(PosteriorStep, MeanIsLinearInInputs) {
    std::mt19937_64 rng(8);
    const auto s = make_linear_schedule(20, 1e-3, 0.1);
    const LatentGrid zero(3, 4, 2);
    for (int trial = 0; trial < 20; ++trial) {
        const auto zt = oracle::random_grid(rng, 3, 4, 2);
        const auto z0 = oracle::random_grid(rng, 3, 4, 2);
        const double a = std::uniform_real_distribution<double>(-4, 4)(rng);
        const int t = std::uniform_int_distribution<int>(1, 20)(rng);
        LatentGrid azt = zt, az0 = z0;
        for (auto& v : azt.data()) v *= a;
        for (auto& v : az0.data()) v *= a;
        const auto lhs = posterior_step(azt, az0, t, zero, s);
        const auto rhs = posterior_step(zt, z0, t, zero, s);
        for (std::size_t i = 0; i < lhs.size(); ++i) ASSERT_NEAR(lhs.data()[i], a * rhs.data()[i], 1e-12);
    }
}
