// SPDX-License-Identifier: Apache-2.0
#include "resmaster/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "resmaster/config.hpp"
#include "resmaster/errors.hpp"
#include "resmaster/image_io.hpp"
#include "resmaster/manifest.hpp"
#include "resmaster/pipeline.hpp"

namespace resmaster {
namespace {

namespace fs = std::filesystem;

// "64" or "64x32" (height x width).
std::pair<std::size_t, std::size_t> parse_pair(const std::string& text, const char* flag) {
    auto parse_one = [&](const std::string& s) {
        std::size_t used = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) {
            throw CLI::ValidationError(flag, "expected N or HxW, got '" + text + "'");
        }
        return static_cast<std::size_t>(v);
    };
    const auto x = text.find('x');
    if (x == std::string::npos) {
        const auto v = parse_one(text);
        return {v, v};
    }
    return {parse_one(text.substr(0, x)), parse_one(text.substr(x + 1))};
}

struct Options {
    std::string in;
    std::string out;
    std::string manifest;
    std::string config;
    std::string window;
    std::string stride;
    std::optional<std::size_t> scale;
    std::optional<int> steps;
    std::optional<double> d0;
    std::optional<double> lambda;
    std::optional<std::uint64_t> seed;
    std::optional<int> guidance_stop;
    std::optional<std::string> prompt;

    ConfigOverrides overrides() const {
        ConfigOverrides o;
        o.scale = scale;
        o.steps = steps;
        o.d0 = d0;
        o.lambda = lambda;
        o.seed = seed;
        o.guidance_stop_step = guidance_stop;
        o.prompt = prompt;
        if (!window.empty()) std::tie(o.window_h, o.window_w) = parse_pair(window, "--window");
        if (!stride.empty()) std::tie(o.stride_h, o.stride_w) = parse_pair(stride, "--stride");
        return o;
    }

    PipelineConfig load_config() const {
        return parse_config(config.empty() ? std::nullopt : std::optional<fs::path>(config), overrides());
    }
};

void require_file(const std::string& path, const char* what) {
    if (!fs::is_regular_file(path)) {
        throw IoError(std::string(what) + " not found: " + path);
    }
}

// Reference geometry comes from the image, not the config file.
PipelineConfig config_for_reference(const Options& opt, const LatentGrid& reference) {
    PipelineConfig config = opt.load_config();
    config.low_res_h = reference.height();
    config.low_res_w = reference.width();
    config.channels = reference.channels();
    config.validate();
    return config;
}

int cmd_lowres(const Options& opt, std::ostream& out) {
    const PipelineConfig config = opt.load_config();
    if (config.channels != 1 && config.channels != 3) {
        throw ConfigError("lowres: channels must be 1 or 3 to write an image");
    }
    const auto denoiser = make_denoiser(config);
    // Text-to-image: no image prompt, so the image branch is weighted out.
    PipelineConfig cond_config = config;
    cond_config.lambda = 0.0;
    const LatentGrid blank(config.low_res_h, config.low_res_w, config.channels, 0.5);
    const ConditionBundle cond = make_condition(config.prompt, blank, cond_config);
    const LatentGrid image =
        generate_low_res(*denoiser, &cond, config.low_res_h, config.low_res_w, config.channels, config);
    write_image(image, opt.out);
    out << "wrote " << opt.out << " (" << image.shape_string() << ", seed " << config.seed << ")\n";
    return 0;
}

int cmd_plan(const Options& opt, std::ostream& out) {
    require_file(opt.in, "input image");
    const LatentGrid reference = read_image(opt.in);
    const PipelineConfig config = config_for_reference(opt, reference);
    const PatchLayout layout = target_layout(config);
    const std::string doc = write_manifest(layout, config.prompt);
    if (opt.out.empty()) {
        out << doc;
    } else {
        std::ofstream file(opt.out, std::ios::binary | std::ios::trunc);
        if (!file) throw IoError("cannot open " + opt.out + " for writing");
        file << doc;
        out << "wrote " << opt.out << " (" << layout.count() << " patches)\n";
    }
    return 0;
}

int cmd_upscale(const Options& opt, std::ostream& out, std::ostream& err) {
    require_file(opt.in, "input image");
    if (!opt.manifest.empty()) require_file(opt.manifest, "manifest");
    const LatentGrid reference = read_image(opt.in);
    const PipelineConfig config = config_for_reference(opt, reference);
    const PatchLayout layout = target_layout(config);
    CaptionManifest captions = opt.manifest.empty() ? CaptionManifest::uniform(config.prompt, layout.count())
                                                    : load_caption_manifest(opt.manifest, layout.count());
    for (const auto& w : captions.warnings) err << "warning: " << w << "\n";
    const auto denoiser = make_denoiser(config);
    const LatentGrid result = resmaster_generate(reference, captions, *denoiser, config);
    write_image(result, opt.out);
    out << "wrote " << opt.out << " (" << result.shape_string() << ", " << layout.count() << " patches, seed "
        << config.seed << ")\n";
    return 0;
}

void add_common(CLI::App* cmd, Options& opt) {
    cmd->add_option("--config", opt.config, "Configuration file (JSON)");
    cmd->add_option("--seed", opt.seed, "Sampling seed");
    cmd->add_option("--steps", opt.steps, "Number of sampling steps");
    cmd->add_option("--prompt", opt.prompt, "Global text prompt");
}

void add_geometry(CLI::App* cmd, Options& opt) {
    cmd->add_option("--scale", opt.scale, "Integer upscaling factor");
    cmd->add_option("--window", opt.window, "Patch window, N or HxW");
    cmd->add_option("--stride", opt.stride, "Patch stride, N or HxW");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Patch-wise high-resolution diffusion sampling with low-frequency guidance", "resmaster"};
    app.require_subcommand(1);
    Options opt;

    auto* lowres = app.add_subcommand("lowres", "Generate a low-resolution reference image");
    lowres->add_option("--out", opt.out, "Output image (.ppm/.pgm)")->required();
    add_common(lowres, opt);

    auto* plan = app.add_subcommand("plan", "Write a caption manifest skeleton for a reference image");
    plan->add_option("--in", opt.in, "Reference image")->required();
    plan->add_option("--out", opt.out, "Manifest path (default: stdout)");
    add_common(plan, opt);
    add_geometry(plan, opt);

    auto* upscale = app.add_subcommand("upscale", "Generate the high-resolution image from a reference");
    upscale->add_option("--in", opt.in, "Reference image")->required();
    upscale->add_option("--out", opt.out, "Output image")->required();
    upscale->add_option("--manifest", opt.manifest, "Caption manifest");
    upscale->add_option("--d0", opt.d0, "Normalized low-pass cutoff");
    upscale->add_option("--lambda", opt.lambda, "Image-prompt weight");
    upscale->add_option("--guidance-stop", opt.guidance_stop, "Skip frequency swapping for t <= this step");
    add_common(upscale, opt);
    add_geometry(upscale, opt);

    auto* selftest = app.add_subcommand("selftest", "Run the built-in invariant checks");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (lowres->parsed()) return cmd_lowres(opt, out);
        if (plan->parsed()) return cmd_plan(opt, out);
        if (upscale->parsed()) return cmd_upscale(opt, out, err);
        if (selftest->parsed()) return run_selftest(out) ? 0 : 1;
    } catch (const CLI::ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace resmaster
