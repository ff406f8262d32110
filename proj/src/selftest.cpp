// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "resmaster/attention.hpp"
#include "resmaster/cli.hpp"
#include "resmaster/pipeline.hpp"
#include "resmaster/rng.hpp"
#include "resmaster/schedule.hpp"
#include "resmaster/spectral.hpp"
#include "resmaster/tiler.hpp"

namespace resmaster {
namespace {

LatentGrid noise_grid(std::size_t h, std::size_t w, std::size_t c, std::uint32_t tag) {
    return CounterNormal(0x5e1f7e57).grid({NoisePurpose::test, tag, 0}, h, w, c);
}

double max_abs_diff(const LatentGrid& a, const LatentGrid& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

bool fft_roundtrip() {
    for (std::size_t n : {8, 12, 15}) {
        const LatentGrid g = noise_grid(n, n + 3, 2, static_cast<std::uint32_t>(n));
        if (max_abs_diff(ifft2d(fft2d(g)), g) > 1e-10) return false;
    }
    return true;
}

bool swap_pins_dc() {
    const LatentGrid a = noise_grid(16, 16, 3, 1);
    const LatentGrid b = noise_grid(16, 16, 3, 2);
    const auto out = swap_low_frequency(a, b, gaussian_lowpass_mask(16, 16, 0.8)).channel_means();
    const auto ref = b.channel_means();
    for (std::size_t c = 0; c < 3; ++c) {
        if (std::abs(out[c] - ref[c]) > 1e-10) return false;
    }
    return true;
}

bool fuse_extract_identity() {
    const LatentGrid g = noise_grid(24, 40, 2, 3);
    const PatchLayout layout = plan_patches(24, 40, 8, 16, 4, 8);
    std::vector<LatentGrid> patches;
    for (const auto& r : layout.rects) patches.push_back(extract_patch(g, r));
    return fuse_patches(patches, layout) == g;
}

bool schedule_identities() {
    const NoiseSchedule s = make_linear_schedule(1000, 1e-4, 0.02);
    const LatentGrid z0 = noise_grid(6, 6, 1, 4);
    const LatentGrid eps = noise_grid(6, 6, 1, 5);
    for (int t : {1, 10, 500, 1000}) {
        const LatentGrid back = predict_x0(forward_diffuse(z0, t, eps, s), eps, t, s);
        for (std::size_t i = 0; i < z0.size(); ++i) {
            const double rel = std::abs(back.data()[i] - z0.data()[i]) / std::max(1.0, std::abs(z0.data()[i]));
            if (rel > 1e-10) return false;
        }
    }
    return posterior_step(eps, z0, 1, eps, s) == z0;
}

bool attention_rows_stochastic() {
    Matrix q(5, 4), k(7, 4);
    auto qd = q.data();
    auto kd = k.data();
    for (std::size_t i = 0; i < qd.size(); ++i) qd[i] = std::sin(static_cast<double>(i) * 1.3) * 3.0;
    for (std::size_t i = 0; i < kd.size(); ++i) kd[i] = std::cos(static_cast<double>(i) * 0.7) * 3.0;
    const Matrix p = attention_probabilities(q, k);
    for (std::size_t r = 0; r < p.rows(); ++r) {
        double sum = 0.0;
        for (double v : p.row(r)) sum += v;
        if (std::abs(sum - 1.0) > 1e-12) return false;
    }
    return true;
}

bool pipeline_deterministic() {
    PipelineConfig config;
    config.low_res_h = config.low_res_w = 8;
    config.channels = 1;
    config.scale = 2;
    config.window_h = config.window_w = 8;
    config.stride_h = config.stride_w = 4;
    config.steps = 5;
    config.seed = 11;
    const AnalyticGaussianDenoiser denoiser({{0.5}, 0.2});
    const LatentGrid reference = noise_grid(8, 8, 1, 6);
    const auto captions = CaptionManifest::uniform(config.prompt, target_layout(config).count());
    config.threads = 1;
    const LatentGrid a = resmaster_generate(reference, captions, denoiser, config);
    config.threads = 3;
    const LatentGrid b = resmaster_generate(reference, captions, denoiser, config);
    return a == b;
}

}  // namespace

bool run_selftest(std::ostream& out) {
    const std::vector<std::pair<std::string, std::function<bool()>>> checks = {
        {"fft roundtrip (pow2 and Bluestein sizes)", fft_roundtrip},
        {"low-frequency swap pins channel means", swap_pins_dc},
        {"fuse of extracted patches is identity", fuse_extract_identity},
        {"schedule roundtrip and t=1 posterior", schedule_identities},
        {"softmax rows sum to one", attention_rows_stochastic},
        {"pipeline independent of thread count", pipeline_deterministic},
    };
    bool all = true;
    for (const auto& [name, check] : checks) {
        bool ok = false;
        try {
            ok = check();
        } catch (const std::exception& e) {
            out << "  exception: " << e.what() << "\n";
        }
        out << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
        all = all && ok;
    }
    out << (all ? "selftest passed\n" : "selftest FAILED\n");
    return all;
}

}  // namespace resmaster
