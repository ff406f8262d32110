// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "resmaster/conditioning.hpp"
#include "resmaster/denoiser.hpp"
#include "resmaster/grid.hpp"
#include "resmaster/schedule.hpp"
#include "resmaster/tiler.hpp"

namespace resmaster {

inline constexpr double kDefaultCutoff = 0.8;

struct PipelineConfig {
    // Reference geometry; the output is low_res * scale on both axes.
    std::size_t low_res_h = 32;
    std::size_t low_res_w = 32;
    std::size_t channels = 3;
    std::size_t scale = 4;

    std::size_t window_h = 64;
    std::size_t window_w = 64;
    std::size_t stride_h = 32;
    std::size_t stride_w = 32;

    // Base linear schedule and the number of sampling steps taken through it.
    int train_steps = 1000;
    double beta_start = 1e-4;
    double beta_end = 0.02;
    int steps = 50;

    double d0 = kDefaultCutoff;
    double lambda = kDefaultImagePromptWeight;
    std::uint64_t seed = 0;
    // Frequency swapping runs while t > guidance_stop_step; 0 keeps it on for every step.
    int guidance_stop_step = 0;
    std::string codec = "identity";

    // Stub encoders.
    std::string prompt = "a detailed high-resolution photograph";
    std::size_t text_tokens = 8;
    std::size_t image_tokens = 4;
    std::size_t text_dim = 32;
    std::size_t image_dim = 32;
    std::uint64_t encoder_seed = 0;

    // Denoiser: "analytic" or "toy".
    std::string denoiser = "analytic";
    std::vector<double> data_mean{0.5};
    double data_std = 0.2;
    std::size_t head_dim = 16;

    // 0: RESMASTER_THREADS if set, otherwise hardware concurrency.
    unsigned threads = 0;

    std::size_t target_h() const noexcept { return low_res_h * scale; }
    std::size_t target_w() const noexcept { return low_res_w * scale; }

    /// Every violated invariant, one message each; empty when valid.
    std::vector<std::string> problems() const;
    /// Throws ConfigError listing all problems.
    void validate() const;

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

NoiseSchedule sampling_schedule(const PipelineConfig& config);
PatchLayout target_layout(const PipelineConfig& config);
unsigned resolve_thread_count(const PipelineConfig& config);

/// Maps images to the latent space the sampler works in and back.
class Codec {
public:
    virtual ~Codec() = default;
    virtual LatentGrid encode(const LatentGrid& image) const = 0;
    virtual LatentGrid decode(const LatentGrid& latent) const = 0;
};

class IdentityCodec final : public Codec {
public:
    LatentGrid encode(const LatentGrid& image) const override { return image; }
    LatentGrid decode(const LatentGrid& latent) const override { return latent; }
};

std::unique_ptr<Codec> make_codec(const std::string& name);

/// Builds the denoiser named in the config ("analytic" or "toy").
std::unique_ptr<Denoiser> make_denoiser(const PipelineConfig& config);

/// Observation points. Callbacks are serialized by the pipeline but may come
/// from worker threads.
struct PipelineHooks {
    std::function<void(int step, std::size_t patch)> progress;
    /// Called with the guided clean estimate of a patch and its reference
    /// latent, right after frequency swapping.
    std::function<void(int step, std::size_t patch, const LatentGrid& guided, const LatentGrid& reference)>
        on_guided_estimate;
};

/// Condition for a whole-image run: the prompt's text embedding plus the
/// image embedding of `image_source`.
ConditionBundle make_condition(const std::string& text, const LatentGrid& image_source, const PipelineConfig& config);

/// Ancestral DDPM sampling from pure noise with no guidance. Noise is drawn
/// from the same counter streams as patch 0 of resmaster_generate.
LatentGrid generate_low_res(const Denoiser& denoiser, const ConditionBundle* cond, std::size_t height,
                            std::size_t width, std::size_t channels, const PipelineConfig& config,
                            const PipelineHooks& hooks = {});

/// Patch-wise high-resolution sampling guided by a low-resolution reference.
/// The reference is bicubic-upsampled to the target size and encoded; each
/// step every patch predicts eps, forms its clean estimate, swaps in the
/// reference's low band, takes a posterior step with its own noise stream,
/// and overlapping patches are averaged. Throws ConfigError on geometry or
/// caption-count mismatches before sampling starts.
LatentGrid resmaster_generate(const LatentGrid& reference, const CaptionManifest& captions,
                              const Denoiser& denoiser, const PipelineConfig& config,
                              const PipelineHooks& hooks = {});

}  // namespace resmaster
