// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "resmaster/attention.hpp"
#include "resmaster/conditioning.hpp"
#include "resmaster/grid.hpp"
#include "resmaster/schedule.hpp"

namespace resmaster {

/// Noise predictor eps_hat = f(z_t, t, cond). Implementations are stateless
/// after construction; predict may run concurrently on different patches.
class Denoiser {
public:
    virtual ~Denoiser() = default;

    /// `cond` may be null for unconditioned models. Output has the shape of z_t.
    virtual LatentGrid predict(const LatentGrid& z_t, int t, const ConditionBundle* cond,
                               const NoiseSchedule& schedule) const = 0;

    virtual bool uses_condition() const noexcept { return false; }
};

/// z0 ~ N(mean[c], std^2) i.i.d. per cell. A single mean is broadcast to every channel.
struct GaussianDataModel {
    std::vector<double> mean{0.0};
    double std = 1.0;

    double mean_for(std::size_t channel) const noexcept { return mean.size() == 1 ? mean[0] : mean[channel]; }
    void validate() const;
};

/// Bayes-optimal noise prediction for Gaussian data: the exact minimizer of
/// E||eps - eps_hat(z_t)||^2, available in closed form.
class AnalyticGaussianDenoiser final : public Denoiser {
public:
    explicit AnalyticGaussianDenoiser(GaussianDataModel model);

    LatentGrid predict(const LatentGrid& z_t, int t, const ConditionBundle* cond,
                       const NoiseSchedule& schedule) const override;

    /// E[z0 | z_t].
    LatentGrid posterior_mean(const LatentGrid& z_t, int t, const NoiseSchedule& schedule) const;

    const GaussianDataModel& model() const noexcept { return model_; }

private:
    GaussianDataModel model_;
};

struct ToyDenoiserDims {
    std::size_t channels = 3;
    std::size_t text_dim = 32;
    std::size_t image_dim = 32;
    std::size_t head_dim = 16;
};

/// Small conditioned predictor: the analytic Gaussian prediction plus a
/// bounded residual from one decoupled cross-attention. Each cell is a query
/// token holding its channel values and a sinusoidal embedding of t / T; the
/// attention output is projected back to the channels with seeded weights.
class ToyConditionedDenoiser final : public Denoiser {
public:
    ToyConditionedDenoiser(ToyDenoiserDims dims, std::uint64_t seed, GaussianDataModel prior = {},
                           double residual_gain = 0.1);

    LatentGrid predict(const LatentGrid& z_t, int t, const ConditionBundle* cond,
                       const NoiseSchedule& schedule) const override;

    bool uses_condition() const noexcept override { return true; }

    const ToyDenoiserDims& dims() const noexcept { return dims_; }
    const AttentionWeights& weights() const noexcept { return weights_; }

private:
    ToyDenoiserDims dims_;
    AttentionWeights weights_;
    Matrix output_projection_;  // head_dim x channels
    AnalyticGaussianDenoiser prior_;
    double residual_gain_;
};

}  // namespace resmaster
