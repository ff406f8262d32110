// SPDX-License-Identifier: Apache-2.0
// Acceptance gate. Prints one PASS/FAIL line per criterion; `acceptance N` runs criterion N only.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "resmaster/attention.hpp"
#include "resmaster/denoiser.hpp"
#include "resmaster/pipeline.hpp"
#include "resmaster/schedule.hpp"
#include "resmaster/spectral.hpp"
#include "resmaster/tiler.hpp"

using namespace resmaster;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(3);
    s << std::scientific << v;
    return s.str();
}

template <typename Container>
double max_abs(const Container& a) {
    double m = 0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

double max_diff(const LatentGrid& a, const LatentGrid& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

Outcome spectral_oracle() {
    std::mt19937_64 rng(101);
    double dft_err = 0, roundtrip = 0;
    for (std::size_t side : {8u, 16u}) {
        for (int i = 0; i < 20; ++i) {
            const auto g = oracle::random_grid(rng, side, side, 3);
            const auto f = fft2d(g);
            const auto expect = oracle::dft_of(g);
            for (std::size_t k = 0; k < expect.size(); ++k) {
                const auto d = oracle::LComplex(f.data()[k].real(), f.data()[k].imag()) - expect[k];
                dft_err = std::max(dft_err, static_cast<double>(std::abs(d)));
            }
            const auto inv = oracle::idft_of(f);
            const auto back = ifft2d(f);
            for (std::size_t k = 0; k < inv.size(); ++k) {
                dft_err = std::max(dft_err, std::abs(back.data()[k] - static_cast<double>(inv[k].real())));
            }
            roundtrip = std::max(roundtrip, max_diff(back, g));
        }
    }
    return {dft_err < 1e-9 && roundtrip < 1e-10, "dft err " + fmt(dft_err) + " (< 1e-9), roundtrip " + fmt(roundtrip) + " (< 1e-10)"};
}

Outcome swap_contract() {
    std::mt19937_64 rng(102);
    double residue = 0, mean_err = 0, pass_err = 0, blend_err = 0;
    const std::array<std::pair<std::size_t, std::size_t>, 3> shapes{{{8, 8}, {16, 16}, {12, 10}}};
    for (int i = 0; i < 50; ++i) {
        const auto [h, w] = shapes[i % 3];
        const double d0 = std::uniform_real_distribution<double>(0.1, 1.5)(rng);
        const auto est = oracle::random_grid(rng, h, w, 3, -2, 2);
        const auto ref = oracle::random_grid(rng, h, w, 3, 0, 1);
        const auto mask = gaussian_lowpass_mask(h, w, d0);
        residue = std::max(residue, ifft2d_complex(swap_low_frequency_spectrum(est, ref, mask)).max_abs_imag());
        const auto out = swap_low_frequency(est, ref, mask);
        const auto om = out.channel_means(), rm = ref.channel_means();
        for (std::size_t c = 0; c < 3; ++c) mean_err = std::max(mean_err, std::abs(om[c] - rm[c]));
        pass_err = std::max(pass_err, max_diff(swap_low_frequency(est, ref, FrequencyMask::all_pass(h, w)), ref));
        const auto direct = oracle::direct_swap(est, ref, mask);
        for (std::size_t k = 0; k < direct.size(); ++k) {
            blend_err = std::max(blend_err, std::abs(out.data()[k] - static_cast<double>(direct[k].real())));
        }
    }
    const bool ok = residue < 1e-9 && mean_err < 1e-10 && pass_err < 1e-10 && blend_err < 1e-8;
    return {ok, "residue " + fmt(residue) + ", mean " + fmt(mean_err) + ", all-pass " + fmt(pass_err) + ", blend " +
                    fmt(blend_err)};
}

Outcome patch_formula() {
    std::mt19937_64 rng(103);
    std::uniform_int_distribution<std::size_t> pick(1, 16);
    int matched = 0;
    const auto scaled_down = plan_patches(256, 256, 128, 128, 64, 64);
    bool ok = scaled_down.count() == 9;
    matched += ok;
    for (int i = 0; i < 19; ++i) {
        const std::size_t wh = pick(rng) * 4, ww = pick(rng) * 4, sh = pick(rng), sw = pick(rng);
        const std::size_t gh = wh + (pick(rng) - 1) * sh, gw = ww + (pick(rng) - 1) * sw;
        const auto layout = plan_patches(gh, gw, wh, ww, sh, sw);
        const bool m = layout.count() == ((gh - wh) / sh + 1) * ((gw - ww) / sw + 1);
        ok = ok && m;
        matched += m;
    }
    return {ok, std::to_string(matched) + "/20 geometries match; 256/128/64 -> N=" + std::to_string(scaled_down.count())};
}

Outcome fusion_identity() {
    std::mt19937_64 rng(104);
    std::uniform_int_distribution<std::size_t> pick(2, 6);
    int exact = 0;
    for (int i = 0; i < 10; ++i) {
        const std::size_t sh = pick(rng), sw = pick(rng);
        const std::size_t wh = sh * 2 + 1, ww = sw * 3;  // window > stride: every layout overlaps
        const std::size_t gh = wh + pick(rng) * sh, gw = ww + pick(rng) * sw;
        const auto g = oracle::random_grid(rng, gh, gw, 3, -1e3, 1e3);
        const auto layout = plan_patches(gh, gw, wh, ww, sh, sw);
        std::vector<LatentGrid> patches;
        for (const auto& r : layout.rects) patches.push_back(extract_patch(g, r));
        exact += fuse_patches(patches, layout) == g;
    }
    return {exact == 10, std::to_string(exact) + "/10 grids reproduced bit-exactly"};
}

Outcome scheduler_identities() {
    const auto s = make_linear_schedule(1000, 1e-4, 0.02);
    std::mt19937_64 rng(105);
    double rel = 0;
    for (int t = 1; t <= 1000; t += 37) {
        const auto x0 = oracle::random_grid(rng, 8, 8, 3, -1, 1);
        LatentGrid eps(8, 8, 3);
        std::normal_distribution<double> n01;
        for (auto& v : eps.data()) v = n01(rng);
        const auto back = predict_x0(forward_diffuse(x0, t, eps, s), eps, t, s);
        rel = std::max(rel, max_diff(back, x0) / max_abs(x0.data()));
    }
    const auto z = oracle::random_grid(rng, 8, 8, 3);
    const auto z0 = oracle::random_grid(rng, 8, 8, 3);
    const auto noise = oracle::random_grid(rng, 8, 8, 3);
    const bool exact = posterior_step(z, z0, 1, noise, s) == z0;
    return {rel < 1e-10 && exact, "roundtrip rel " + fmt(rel) + " (< 1e-10), t=1 step exact: " + (exact ? "yes" : "no")};
}

Outcome denoiser_regression() {
    const auto s = make_linear_schedule(1000, 1e-4, 0.02);
    const AnalyticGaussianDenoiser d({{0.0}, 1.0});
    std::mt19937_64 rng(106);
    std::normal_distribution<double> n01;
    const std::size_t samples = 100000;
    const std::size_t bins = 8;
    int good = 0, total = 0;
    double worst = 0;
    for (int t : {100, 500, 900}) {
        const double ab = s.alpha_bar(t);
        // Bin over [-2, 2] in units of the marginal std of z_t (= 1 for unit data).
        std::vector<double> eps_sum(bins), eps_sq(bins), z_sum(bins);
        std::vector<std::size_t> count(bins);
        for (std::size_t i = 0; i < samples; ++i) {
            const double z0 = n01(rng), e = n01(rng);
            const double zt = std::sqrt(ab) * z0 + std::sqrt(1 - ab) * e;
            const double pos = (zt + 2.0) / 4.0 * bins;
            if (pos < 0 || pos >= bins) continue;
            const auto b = static_cast<std::size_t>(pos);
            eps_sum[b] += e;
            eps_sq[b] += e * e;
            z_sum[b] += zt;
            ++count[b];
        }
        for (std::size_t b = 0; b < bins; ++b) {
            const double n = static_cast<double>(count[b]);
            const double mean = eps_sum[b] / n;
            const double se = std::sqrt((eps_sq[b] / n - mean * mean) / n);
            const double predicted = d.predict(LatentGrid(1, 1, 1, z_sum[b] / n), t, nullptr, s).data()[0];
            const double z_score = std::abs(mean - predicted) / se;
            worst = std::max(worst, z_score);
            good += z_score < 3.0;
            ++total;
        }
    }
    return {good == total, std::to_string(good) + "/" + std::to_string(total) + " bins within 3 SE, worst " +
                               fmt(worst) + " SE"};
}

Outcome generative_marginal() {
    PipelineConfig cfg;
    cfg.steps = 50;
    cfg.seed = 0;
    const double m = 0.5, sd = 0.1;
    const auto out = generate_low_res(AnalyticGaussianDenoiser({{m}, sd}), nullptr, 100, 100, 1, cfg);
    const double k = static_cast<double>(out.size());
    double sum = 0, sq = 0;
    for (double v : out.data()) sum += v;
    const double mean = sum / k;
    for (double v : out.data()) sq += (v - mean) * (v - mean);
    const double var = sq / (k - 1);
    const bool ok = std::abs(mean - m) < 0.004 && std::abs(var / (sd * sd) - 1) < 0.10;
    return {ok, "mean " + fmt(mean) + " (|d| < 0.004), variance " + fmt(var) + " = " + fmt(var / (sd * sd)) +
                    " x 0.01 (within 10%)"};
}

Outcome structural_guidance() {
    PipelineConfig cfg;  // 32x32x3, scale 4, window 64, stride 32, D0 0.8, lambda 0.8, 50 steps
    cfg.data_mean = {0.0};
    cfg.data_std = 1.0;
    const AnalyticGaussianDenoiser d({cfg.data_mean, cfg.data_std});
    PipelineConfig low = cfg;
    low.seed = 1000;
    const auto reference = generate_low_res(d, nullptr, cfg.low_res_h, cfg.low_res_w, cfg.channels, low);
    const auto upsampled = bicubic_upsample(reference, cfg.target_h(), cfg.target_w());
    const auto ref_spectrum = fft2d(upsampled);
    const auto ref_means = upsampled.channel_means();
    const auto captions = CaptionManifest::uniform(cfg.prompt, target_layout(cfg).count());
    const std::size_t h = cfg.target_h(), w = cfg.target_w(), c = cfg.channels;

    double rel_sum = 0, worst_mean = 0;
    const int seeds = 10;
    for (int seed = 0; seed < seeds; ++seed) {
        cfg.seed = static_cast<std::uint64_t>(seed);
        const auto out = resmaster_generate(reference, captions, d, cfg);
        const auto spectrum = fft2d(out);
        double num = 0, den = 0;
        for (std::size_t u = 0; u < h; ++u)
            for (std::size_t v = 0; v < w; ++v) {
                if (normalized_frequency_radius(u, v, h, w) > 0.2) continue;
                for (std::size_t ch = 0; ch < c; ++ch) {
                    num += std::abs(std::abs(spectrum.at(u, v, ch)) - std::abs(ref_spectrum.at(u, v, ch)));
                    den += std::abs(ref_spectrum.at(u, v, ch));
                }
            }
        rel_sum += num / den;
        const auto means = out.channel_means();
        for (std::size_t ch = 0; ch < c; ++ch) worst_mean = std::max(worst_mean, std::abs(means[ch] - ref_means[ch]));
    }
    const double rel = rel_sum / seeds;
    return {rel < 0.05 && worst_mean < 1e-3,
            "low-band relative magnitude error " + fmt(rel) + " (< 0.05), worst channel-mean offset " +
                fmt(worst_mean) + " (< 1e-3)"};
}

Outcome attention_contract() {
    std::mt19937_64 rng(109);
    const auto w = AttentionWeights::seeded(8, 8, 6, 5, 9);
    const auto x = oracle::random_matrix(rng, 4, 8);
    const TextEmbedding text{oracle::random_matrix(rng, 5, 6)};
    const ImageEmbedding image{oracle::random_matrix(rng, 3, 5)};
    const auto text_only = attention_terms(x, ConditionBundle(text, image, 0.0), w).text;
    const double zero_err = max_abs(std::vector<double>([&] {
        const auto a = attend(x, ConditionBundle(text, image, 0.0), w);
        std::vector<double> d(a.data().size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.data()[i] - text_only.data()[i];
        return d;
    }()));
    const double lambda = 0.8;
    const auto out = attend(x, ConditionBundle(text, image, lambda), w);
    const auto q = oracle::naive_matmul(x, w.query);
    const auto t = oracle::naive_attention(q, oracle::naive_matmul(text.values, w.text_key),
                                           oracle::naive_matmul(text.values, w.text_value));
    const auto im = oracle::naive_attention(q, oracle::naive_matmul(image.values, w.image_key),
                                            oracle::naive_matmul(image.values, w.image_value));
    double oracle_err = 0;
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t col = 0; col < out.cols(); ++col)
            oracle_err = std::max(oracle_err, std::abs(out(r, col) - static_cast<double>(t[r][col] + lambda * im[r][col])));
    const auto a0 = attend(x, ConditionBundle(text, image, 0.0), w);
    const auto a1 = attend(x, ConditionBundle(text, image, 1.0), w);
    const auto a2 = attend(x, ConditionBundle(text, image, 2.0), w);
    const auto image_term = attention_terms(x, ConditionBundle(text, image, 1.0), w).image;
    double lin_err = 0;
    for (std::size_t i = 0; i < a0.data().size(); ++i) {
        lin_err = std::max(lin_err, std::abs(a1.data()[i] - a0.data()[i] - image_term.data()[i]));
        lin_err = std::max(lin_err, std::abs(a2.data()[i] - a0.data()[i] - 2 * image_term.data()[i]));
    }
    const bool ok = zero_err <= 1e-12 && oracle_err < 1e-10 && lin_err < 1e-12;
    return {ok, "lambda=0 " + fmt(zero_err) + " (<= 1e-12), oracle " + fmt(oracle_err) + " (< 1e-10), linearity " +
                    fmt(lin_err)};
}

std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Outcome cli_determinism() {
    const fs::path dir = fs::temp_directory_path() / "resmaster_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string cli = RESMASTER_CLI_PATH;
    auto sh = [&](const std::string& cmd) { return std::system((cmd + " > /dev/null").c_str()); };
    if (sh("'" + cli + "' lowres --out '" + (dir / "ref.ppm").string() + "' --seed 1") != 0) {
        return {false, "lowres failed"};
    }
    auto upscale = [&](const std::string& threads, const std::string& name) {
        return sh("RESMASTER_THREADS=" + threads + " '" + cli + "' upscale --in '" + (dir / "ref.ppm").string() +
                  "' --out '" + (dir / name).string() + "' --seed 7");
    };
    if (upscale("1", "a.ppm") != 0 || upscale("1", "b.ppm") != 0 || upscale("4", "c.ppm") != 0) {
        return {false, "upscale failed"};
    }
    const auto a = read_bytes(dir / "a.ppm"), b = read_bytes(dir / "b.ppm"), c = read_bytes(dir / "c.ppm");
    fs::remove_all(dir);
    const bool ok = !a.empty() && a == b && a == c;
    return {ok, std::to_string(a.size()) + "-byte outputs; repeat identical: " + (a == b ? "yes" : "no") +
                    ", threads 1 vs 4 identical: " + (a == c ? "yes" : "no")};
}

struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double time_limit_s;  // 0 = none
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {"spectral oracle equivalence", spectral_oracle, 5},
        {"swap contract", swap_contract, 0},
        {"patch count formula", patch_formula, 0},
        {"fusion partition of unity", fusion_identity, 0},
        {"scheduler identities", scheduler_identities, 0},
        {"analytic denoiser vs Monte Carlo regression", denoiser_regression, 60},
        {"generative marginal (50 steps)", generative_marginal, 0},
        {"end-to-end structural guidance", structural_guidance, 120},
        {"attention contract", attention_contract, 0},
        {"CLI determinism", cli_determinism, 0},
    };
    std::size_t first = 1, last = criteria.size();
    if (argc > 1) {
        first = last = std::strtoul(argv[1], nullptr, 10);
        if (first < 1 || first > criteria.size()) {
            std::cerr << "usage: " << argv[0] << " [1-" << criteria.size() << "]\n";
            return 2;
        }
    }
    bool all = true;
    for (std::size_t i = first; i <= last; ++i) {
        const auto& c = criteria[i - 1];
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.time_limit_s > 0 && secs >= c.time_limit_s) {
            o.pass = false;
            o.detail += "; over time limit";
        }
        std::ostringstream t;
        t.precision(2);
        t << std::fixed << secs;
        std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << i << ". " << c.name << ": " << o.detail << " [" << t.str()
                  << " s]" << std::endl;
        all = all && o.pass;
    }
    return all ? 0 : 1;
}
