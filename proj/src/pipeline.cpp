// SPDX-License-Identifier: Apache-2.0
#include "resmaster/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "resmaster/errors.hpp"
#include "resmaster/rng.hpp"
#include "resmaster/spectral.hpp"

namespace resmaster {

std::vector<std::string> PipelineConfig::problems() const {
    std::vector<std::string> out;
    auto need = [&](bool ok, std::string msg) {
        if (!ok) out.push_back(std::move(msg));
    };
    need(low_res_h >= 1 && low_res_w >= 1, "low_res: dimensions must be >= 1");
    need(channels >= 1, "channels: must be >= 1");
    need(scale >= 1, "scale: must be an integer >= 1");
    if (low_res_h >= 1 && low_res_w >= 1 && scale >= 1) {
        auto axis = [&](const char* name, std::size_t grid, std::size_t win, std::size_t stride) {
            const std::string n(name);
            if (win < 1 || win > grid) {
                out.push_back("window " + n + ": " + std::to_string(win) + " must lie in [1, " +
                              std::to_string(grid) + "]");
            } else if (stride < 1) {
                out.push_back("stride " + n + ": must be >= 1");
            } else if ((grid - win) % stride != 0) {
                std::string msg = "stride " + n + ": " + std::to_string(stride) + " does not tile " +
                                  std::to_string(grid) + " with window " + std::to_string(win);
                if (auto s = nearest_valid_stride(grid, win, stride)) msg += " (nearest valid: " + std::to_string(*s) + ")";
                out.push_back(msg);
            }
        };
        axis("height", target_h(), window_h, stride_h);
        axis("width", target_w(), window_w, stride_w);
    }
    need(train_steps >= 1, "train_steps: must be >= 1");
    need(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0,
         "beta: need 0 < beta_start <= beta_end < 1");
    need(steps >= 1 && steps <= train_steps, "steps: must lie in [1, train_steps]");
    need(steps < (1 << 24), "steps: must be below 2^24");
    need(d0 > 0.0, "d0: cutoff must be positive");
    need(lambda >= 0.0 && std::isfinite(lambda), "lambda: must be finite and >= 0");
    need(guidance_stop_step >= 0, "guidance_stop_step: must be >= 0");
    need(codec == "identity", "codec: unknown codec '" + codec + "'");
    need(!prompt.empty(), "prompt: must not be empty");
    need(text_tokens >= 1 && image_tokens >= 1, "tokens: text and image token counts must be >= 1");
    need(text_dim >= 1 && image_dim >= 1, "dims: embedding widths must be >= 1");
    need(denoiser == "analytic" || denoiser == "toy", "denoiser: unknown denoiser '" + denoiser + "'");
    need(!data_mean.empty() && (data_mean.size() == 1 || data_mean.size() == channels),
         "data_mean: need one value or one per channel");
    need(data_std >= 0.0 && std::isfinite(data_std), "data_std: must be finite and >= 0");
    need(head_dim >= 1, "head_dim: must be >= 1");
    return out;
}

void PipelineConfig::validate() const {
    const auto issues = problems();
    if (issues.empty()) return;
    std::string msg = "invalid configuration:";
    for (const auto& p : issues) msg += "\n  - " + p;
    throw ConfigError(msg);
}

NoiseSchedule sampling_schedule(const PipelineConfig& config) {
    return respace(make_linear_schedule(config.train_steps, config.beta_start, config.beta_end), config.steps);
}

PatchLayout target_layout(const PipelineConfig& config) {
    return plan_patches(config.target_h(), config.target_w(), config.window_h, config.window_w, config.stride_h,
                        config.stride_w);
}

unsigned resolve_thread_count(const PipelineConfig& config) {
    if (config.threads > 0) return config.threads;
    if (const char* env = std::getenv("RESMASTER_THREADS")) {
        char* end = nullptr;
        const unsigned long n = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && n > 0) return static_cast<unsigned>(n);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::unique_ptr<Codec> make_codec(const std::string& name) {
    if (name == "identity") return std::make_unique<IdentityCodec>();
    throw ConfigError("unknown codec '" + name + "'");
}

std::unique_ptr<Denoiser> make_denoiser(const PipelineConfig& config) {
    GaussianDataModel model{config.data_mean, config.data_std};
    if (config.denoiser == "analytic") return std::make_unique<AnalyticGaussianDenoiser>(model);
    if (config.denoiser == "toy") {
        ToyDenoiserDims dims{config.channels, config.text_dim, config.image_dim, config.head_dim};
        return std::make_unique<ToyConditionedDenoiser>(dims, config.encoder_seed, model);
    }
    throw ConfigError("unknown denoiser '" + config.denoiser + "'");
}

ConditionBundle make_condition(const std::string& text, const LatentGrid& image_source, const PipelineConfig& config) {
    return ConditionBundle(embed_text_stub(text, config.text_tokens, config.text_dim, config.encoder_seed),
                           encode_image_prompt_stub(image_source, config.image_tokens, config.image_dim,
                                                    config.encoder_seed),
                           config.lambda);
}

namespace {

// Runs task(i) for i in [0, count) on up to `threads` workers. Exceptions are rethrown after joining.
template <typename Task>
void parallel_for(std::size_t count, unsigned threads, Task&& task) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        task(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!error) error = std::current_exception();
                        next = count;
                    }
                }
            });
        }
    }
    if (error) std::rethrow_exception(error);
}

}  // namespace

LatentGrid generate_low_res(const Denoiser& denoiser, const ConditionBundle* cond, std::size_t height,
                            std::size_t width, std::size_t channels, const PipelineConfig& config,
                            const PipelineHooks& hooks) {
    config.validate();
    if (height == 0 || width == 0 || channels == 0) {
        throw InvalidArgument("generate_low_res: dimensions must be >= 1");
    }
    const NoiseSchedule schedule = sampling_schedule(config);
    const CounterNormal rng(config.seed);
    LatentGrid z = rng.grid({NoisePurpose::initial_latent, 0, 0}, height, width, channels);
    for (int t = schedule.steps(); t >= 1; --t) {
        const LatentGrid eps = denoiser.predict(z, t, cond, schedule);
        const LatentGrid x0 = predict_x0(z, eps, t, schedule);
        const LatentGrid noise = rng.grid({NoisePurpose::posterior, static_cast<std::uint32_t>(t), 0}, height, width,
                                          channels);
        z = posterior_step(z, x0, t, noise, schedule);
        if (hooks.progress) hooks.progress(t, 0);
    }
    return z;
}

LatentGrid resmaster_generate(const LatentGrid& reference, const CaptionManifest& captions, const Denoiser& denoiser,
                              const PipelineConfig& config, const PipelineHooks& hooks) {
    config.validate();
    if (reference.height() != config.low_res_h || reference.width() != config.low_res_w ||
        reference.channels() != config.channels) {
        throw ConfigError("reference is " + reference.shape_string() + " but the configuration expects " +
                          std::to_string(config.low_res_h) + "x" + std::to_string(config.low_res_w) + "x" +
                          std::to_string(config.channels));
    }
    const PatchLayout layout = target_layout(config);
    if (captions.size() != layout.count()) {
        throw ConfigError("caption manifest has " + std::to_string(captions.size()) + " entries but the layout has " +
                          std::to_string(layout.count()) + " patches");
    }

    const NoiseSchedule schedule = sampling_schedule(config);
    const auto codec = make_codec(config.codec);
    const LatentGrid upsampled = bicubic_upsample(reference, config.target_h(), config.target_w());
    const LatentGrid reference_latent = codec->encode(upsampled);
    if (reference_latent.height() != config.target_h() || reference_latent.width() != config.target_w()) {
        throw ConfigError("codec changed the latent geometry; only size-preserving codecs are supported");
    }

    MaskCache masks;
    const LowFrequencySwapper swapper(masks.get(config.window_h, config.window_w, config.d0));
    const unsigned threads = resolve_thread_count(config);

    // Guidance inputs are fixed for the whole run.
    const std::size_t n = layout.count();
    std::vector<LatentGrid> reference_patches(n);
    std::vector<SpectralGrid> reference_bands(n);
    std::vector<std::unique_ptr<ConditionBundle>> bundles(n);
    parallel_for(n, threads, [&](std::size_t i) {
        reference_patches[i] = extract_patch(reference_latent, layout.rects[i]);
        reference_bands[i] = swapper.reference_band(reference_patches[i]);
        bundles[i] = std::make_unique<ConditionBundle>(
            make_condition(captions.captions[i], extract_patch(upsampled, layout.rects[i]), config));
    });

    const CounterNormal rng(config.seed);
    LatentGrid z = rng.grid({NoisePurpose::initial_latent, 0, 0}, reference_latent.height(),
                            reference_latent.width(), reference_latent.channels());
    std::mutex hook_mutex;
    std::vector<LatentGrid> stepped(n);
    for (int t = schedule.steps(); t >= 1; --t) {
        const bool guided = t > config.guidance_stop_step;
        parallel_for(n, threads, [&](std::size_t i) {
            const PatchRect& rect = layout.rects[i];
            const LatentGrid z_i = extract_patch(z, rect);
            const LatentGrid eps = denoiser.predict(z_i, t, bundles[i].get(), schedule);
            LatentGrid x0 = predict_x0(z_i, eps, t, schedule);
            if (guided) {
                x0 = swapper.apply(x0, reference_bands[i]);
                if (hooks.on_guided_estimate) {
                    std::lock_guard lock(hook_mutex);
                    hooks.on_guided_estimate(t, i, x0, reference_patches[i]);
                }
            }
            const LatentGrid noise = rng.grid(
                {NoisePurpose::posterior, static_cast<std::uint32_t>(t), static_cast<std::uint32_t>(i)}, rect.height,
                rect.width, z.channels());
            stepped[i] = posterior_step(z_i, x0, t, noise, schedule);
            if (hooks.progress) {
                std::lock_guard lock(hook_mutex);
                hooks.progress(t, i);
            }
        });
        z = fuse_patches(stepped, layout);
    }
    return codec->decode(z);
}

}  // namespace resmaster
