// SPDX-License-Identifier: Apache-2.0
#include "resmaster/schedule.hpp"

#include <cmath>
#include <string>

#include "resmaster/errors.hpp"

namespace resmaster {

NoiseSchedule NoiseSchedule::from_betas(std::vector<double> betas) {
    if (betas.empty()) {
        throw InvalidArgument("NoiseSchedule: at least one step is required");
    }
    NoiseSchedule s;
    s.alpha_.reserve(betas.size());
    s.alpha_bar_.reserve(betas.size());
    double running = 1.0;
    for (std::size_t i = 0; i < betas.size(); ++i) {
        const double b = betas[i];
        if (!(b > 0.0 && b < 1.0)) {
            throw InvalidArgument("NoiseSchedule: beta[" + std::to_string(i + 1) + "] = " + std::to_string(b) +
                                  " outside (0, 1)");
        }
        const double a = 1.0 - b;
        if (a == 1.0) {
            throw InvalidArgument("NoiseSchedule: beta[" + std::to_string(i + 1) + "] is too small to represent");
        }
        running *= a;
        if (!(running > 0.0)) {
            throw InvalidArgument("NoiseSchedule: cumulative alpha underflows to zero at step " +
                                  std::to_string(i + 1));
        }
        s.alpha_.push_back(a);
        s.alpha_bar_.push_back(running);
    }
    s.beta_ = std::move(betas);
    return s;
}

NoiseSchedule NoiseSchedule::from_alpha_bars(std::vector<double> alpha_bars) {
    if (alpha_bars.empty()) {
        throw InvalidArgument("NoiseSchedule: at least one step is required");
    }
    NoiseSchedule s;
    double previous = 1.0;
    for (std::size_t i = 0; i < alpha_bars.size(); ++i) {
        const double ab = alpha_bars[i];
        if (!(ab > 0.0 && ab < previous)) {
            throw InvalidArgument("NoiseSchedule: alpha_bar must be strictly decreasing in (0, 1) at step " +
                                  std::to_string(i + 1));
        }
        const double b = 1.0 - ab / previous;
        s.beta_.push_back(b);
        s.alpha_.push_back(1.0 - b);
        previous = ab;
    }
    s.alpha_bar_ = std::move(alpha_bars);
    return s;
}

void NoiseSchedule::require_timestep(int t) const {
    if (t < 1 || t > steps()) {
        throw InvalidArgument("timestep " + std::to_string(t) + " outside [1, " + std::to_string(steps()) + "]");
    }
}

std::size_t NoiseSchedule::index(int t) const {
    require_timestep(t);
    return static_cast<std::size_t>(t - 1);
}

NoiseSchedule make_linear_schedule(int steps, double beta_start, double beta_end) {
    if (steps < 1) {
        throw InvalidArgument("make_linear_schedule: step count must be >= 1, got " + std::to_string(steps));
    }
    if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0)) {
        throw InvalidArgument("make_linear_schedule: need 0 < beta_start <= beta_end < 1");
    }
    std::vector<double> betas(static_cast<std::size_t>(steps));
    if (steps == 1) {
        betas[0] = beta_start;
    } else {
        const double span = beta_end - beta_start;
        for (int i = 0; i < steps; ++i) {
            betas[static_cast<std::size_t>(i)] = beta_start + span * static_cast<double>(i) / (steps - 1);
        }
    }
    return NoiseSchedule::from_betas(std::move(betas));
}

std::vector<int> respaced_timesteps(int base_steps, int sampling_steps) {
    if (sampling_steps < 1 || sampling_steps > base_steps) {
        throw InvalidArgument("sampling step count " + std::to_string(sampling_steps) + " must lie in [1, " +
                              std::to_string(base_steps) + "]");
    }
    std::vector<int> ts;
    ts.reserve(static_cast<std::size_t>(sampling_steps));
    for (int k = 1; k <= sampling_steps; ++k) {
        // Integer rounding of k*T/S; strictly increasing because S <= T.
        const long long num = static_cast<long long>(k) * base_steps;
        ts.push_back(static_cast<int>((2 * num + sampling_steps) / (2LL * sampling_steps)));
    }
    return ts;
}

NoiseSchedule respace(const NoiseSchedule& base, int sampling_steps) {
    if (sampling_steps == base.steps()) {
        return base;
    }
    std::vector<double> abars;
    for (int t : respaced_timesteps(base.steps(), sampling_steps)) {
        abars.push_back(base.alpha_bar(t));
    }
    return NoiseSchedule::from_alpha_bars(std::move(abars));
}

LatentGrid forward_diffuse(const LatentGrid& z0, int t, const LatentGrid& eps, const NoiseSchedule& s) {
    require_same_shape(z0, eps, "forward_diffuse");
    s.require_timestep(t);
    const double ab = s.alpha_bar(t);
    const double signal = std::sqrt(ab);
    const double noise = std::sqrt(1.0 - ab);
    LatentGrid out = z0;
    auto o = out.data();
    auto e = eps.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        o[i] = signal * o[i] + noise * e[i];
    }
    return out;
}

LatentGrid predict_x0(const LatentGrid& z_t, const LatentGrid& eps_hat, int t, const NoiseSchedule& s) {
    require_same_shape(z_t, eps_hat, "predict_x0");
    s.require_timestep(t);
    const double ab = s.alpha_bar(t);
    const double inv_signal = 1.0 / std::sqrt(ab);
    const double noise = std::sqrt(1.0 - ab);
    LatentGrid out = z_t;
    auto o = out.data();
    auto e = eps_hat.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        o[i] = (o[i] - noise * e[i]) * inv_signal;
    }
    return out;
}

PosteriorCoefficients posterior_coefficients(int t, const NoiseSchedule& s) {
    s.require_timestep(t);
    if (t == 1) {
        return {1.0, 0.0, 0.0};
    }
    const double ab_t = s.alpha_bar(t);
    const double ab_prev = s.alpha_bar(t - 1);
    const double beta = s.beta(t);
    const double denom = 1.0 - ab_t;
    return {
        std::sqrt(ab_prev) * beta / denom,
        std::sqrt(s.alpha(t)) * (1.0 - ab_prev) / denom,
        (1.0 - ab_prev) / denom * beta,
    };
}

LatentGrid posterior_step(const LatentGrid& z_t, const LatentGrid& z0_prime, int t, const LatentGrid& noise,
                          const NoiseSchedule& s) {
    require_same_shape(z_t, z0_prime, "posterior_step");
    require_same_shape(z_t, noise, "posterior_step");
    const PosteriorCoefficients k = posterior_coefficients(t, s);
    if (t == 1) {
        return z0_prime;
    }
    const double sigma = std::sqrt(k.variance);
    LatentGrid out = z0_prime;
    auto o = out.data();
    auto zt = z_t.data();
    auto n = noise.data();
    for (std::size_t i = 0; i < o.size(); ++i) {
        o[i] = k.clean * o[i] + k.noisy * zt[i] + sigma * n[i];
    }
    return out;
}

}  // namespace resmaster
