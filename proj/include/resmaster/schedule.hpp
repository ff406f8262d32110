// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "resmaster/grid.hpp"

namespace resmaster {

/// Variance schedule over T steps, indexed by 1-based timestep t in [1, T].
/// alpha_bar(0) is defined as 1 so the final posterior step is well-defined.
class NoiseSchedule {
public:
    /// Builds from per-step betas; every beta must lie in (0, 1).
    static NoiseSchedule from_betas(std::vector<double> betas);

    /// Builds from cumulative products, which must be strictly decreasing in (0, 1).
    /// Betas are recovered as 1 - alpha_bar[t] / alpha_bar[t-1].
    static NoiseSchedule from_alpha_bars(std::vector<double> alpha_bars);

    int steps() const noexcept { return static_cast<int>(beta_.size()); }

    double beta(int t) const { return beta_.at(index(t)); }
    double alpha(int t) const { return alpha_.at(index(t)); }
    double alpha_bar(int t) const { return t == 0 ? 1.0 : alpha_bar_.at(index(t)); }

    const std::vector<double>& betas() const noexcept { return beta_; }
    const std::vector<double>& alpha_bars() const noexcept { return alpha_bar_; }

    /// Throws InvalidArgument unless 1 <= t <= steps().
    void require_timestep(int t) const;

private:
    NoiseSchedule() = default;
    std::size_t index(int t) const;

    std::vector<double> beta_;
    std::vector<double> alpha_;
    std::vector<double> alpha_bar_;
};

NoiseSchedule make_linear_schedule(int steps, double beta_start, double beta_end);

/// Timesteps of `base` visited by a sampler with `sampling_steps` steps:
/// t_k = round(k * T / S) for k = 1..S, so the last entry is T.
std::vector<int> respaced_timesteps(int base_steps, int sampling_steps);

/// Schedule over the respaced timesteps whose alpha_bar values equal the base
/// schedule's at those timesteps. Sampling it step-by-step is DDPM with skipped steps.
NoiseSchedule respace(const NoiseSchedule& base, int sampling_steps);

/// Closed-form marginal z_t = sqrt(abar_t) z0 + sqrt(1 - abar_t) eps.
LatentGrid forward_diffuse(const LatentGrid& z0, int t, const LatentGrid& eps, const NoiseSchedule& s);

/// Clean-latent estimate (z_t - sqrt(1 - abar_t) eps_hat) / sqrt(abar_t).
LatentGrid predict_x0(const LatentGrid& z_t, const LatentGrid& eps_hat, int t, const NoiseSchedule& s);

struct PosteriorCoefficients {
    double clean = 0.0;   // multiplies the clean estimate
    double noisy = 0.0;   // multiplies z_t
    double variance = 0.0;
};

PosteriorCoefficients posterior_coefficients(int t, const NoiseSchedule& s);

/// Draw from q(z_{t-1} | z_t, z0') given a caller-supplied standard-normal `noise`.
/// At t = 1 the result is z0' bit-for-bit.
LatentGrid posterior_step(const LatentGrid& z_t, const LatentGrid& z0_prime, int t, const LatentGrid& noise,
                          const NoiseSchedule& s);

}  // namespace resmaster
