// SPDX-License-Identifier: Apache-2.0
#include "resmaster/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "resmaster/errors.hpp"

namespace resmaster {
namespace {

using nlohmann::json;

// One reader per key; each appends to `errors` instead of throwing.
using FieldReader = std::function<void(const json&, PipelineConfig&, std::vector<std::string>&)>;

template <typename T>
FieldReader field(T PipelineConfig::*member, const char* name) {
    return [member, name](const json& v, PipelineConfig& c, std::vector<std::string>& errors) {
        try {
            if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t> ||
                          std::is_same_v<T, unsigned>) {
                if (!v.is_number_unsigned()) throw std::runtime_error("expected a non-negative integer");
            } else if constexpr (std::is_same_v<T, int>) {
                if (!v.is_number_integer()) throw std::runtime_error("expected an integer");
            } else if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) throw std::runtime_error("expected a number");
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw std::runtime_error("expected a string");
            }
            c.*member = v.get<T>();
        } catch (const std::exception& e) {
            errors.push_back(std::string(name) + ": " + e.what());
        }
    };
}

const std::map<std::string, FieldReader>& readers() {
    static const std::map<std::string, FieldReader> table = {
        {"low_res_h", field(&PipelineConfig::low_res_h, "low_res_h")},
        {"low_res_w", field(&PipelineConfig::low_res_w, "low_res_w")},
        {"channels", field(&PipelineConfig::channels, "channels")},
        {"scale", field(&PipelineConfig::scale, "scale")},
        {"window_h", field(&PipelineConfig::window_h, "window_h")},
        {"window_w", field(&PipelineConfig::window_w, "window_w")},
        {"stride_h", field(&PipelineConfig::stride_h, "stride_h")},
        {"stride_w", field(&PipelineConfig::stride_w, "stride_w")},
        {"train_steps", field(&PipelineConfig::train_steps, "train_steps")},
        {"beta_start", field(&PipelineConfig::beta_start, "beta_start")},
        {"beta_end", field(&PipelineConfig::beta_end, "beta_end")},
        {"steps", field(&PipelineConfig::steps, "steps")},
        {"d0", field(&PipelineConfig::d0, "d0")},
        {"lambda", field(&PipelineConfig::lambda, "lambda")},
        {"seed", field(&PipelineConfig::seed, "seed")},
        {"guidance_stop_step", field(&PipelineConfig::guidance_stop_step, "guidance_stop_step")},
        {"codec", field(&PipelineConfig::codec, "codec")},
        {"prompt", field(&PipelineConfig::prompt, "prompt")},
        {"text_tokens", field(&PipelineConfig::text_tokens, "text_tokens")},
        {"image_tokens", field(&PipelineConfig::image_tokens, "image_tokens")},
        {"text_dim", field(&PipelineConfig::text_dim, "text_dim")},
        {"image_dim", field(&PipelineConfig::image_dim, "image_dim")},
        {"encoder_seed", field(&PipelineConfig::encoder_seed, "encoder_seed")},
        {"denoiser", field(&PipelineConfig::denoiser, "denoiser")},
        {"data_std", field(&PipelineConfig::data_std, "data_std")},
        {"head_dim", field(&PipelineConfig::head_dim, "head_dim")},
        {"threads", field(&PipelineConfig::threads, "threads")},
        {"data_mean",
         [](const json& v, PipelineConfig& c, std::vector<std::string>& errors) {
             if (v.is_number()) {
                 c.data_mean = {v.get<double>()};
             } else if (v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) {
                 c.data_mean = v.get<std::vector<double>>();
             } else {
                 errors.push_back("data_mean: expected a number or an array of numbers");
             }
         }},
    };
    return table;
}

void apply(const ConfigOverrides& o, PipelineConfig& c) {
    if (o.scale) c.scale = *o.scale;
    if (o.window_h) c.window_h = *o.window_h;
    if (o.window_w) c.window_w = *o.window_w;
    if (o.stride_h) c.stride_h = *o.stride_h;
    if (o.stride_w) c.stride_w = *o.stride_w;
    if (o.steps) c.steps = *o.steps;
    if (o.d0) c.d0 = *o.d0;
    if (o.lambda) c.lambda = *o.lambda;
    if (o.seed) c.seed = *o.seed;
    if (o.guidance_stop_step) c.guidance_stop_step = *o.guidance_stop_step;
    if (o.prompt) c.prompt = *o.prompt;
}

}  // namespace

PipelineConfig parse_config_text(std::string_view text, const ConfigOverrides& overrides, const std::string& origin) {
    PipelineConfig config;
    std::vector<std::string> errors;

    const bool blank = text.find_first_not_of(" \t\r\n") == std::string_view::npos;
    if (!blank) {
        json doc;
        try {
            doc = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ConfigError(origin + ": malformed configuration: " + e.what());
        }
        if (!doc.is_object()) throw ConfigError(origin + ": configuration must be a JSON object");
        for (const auto& [key, value] : doc.items()) {
            if (key == "version") {
                if (!value.is_number_integer() || value.get<int>() != kConfigVersion) {
                    errors.push_back("version: unsupported configuration version " + value.dump());
                }
                continue;
            }
            auto it = readers().find(key);
            if (it == readers().end()) {
                errors.push_back(key + ": unknown key");
                continue;
            }
            it->second(value, config, errors);
        }
    }
    apply(overrides, config);
    for (auto& p : config.problems()) errors.push_back(std::move(p));

    if (!errors.empty()) {
        std::string msg = origin + ": invalid configuration:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw ConfigError(msg);
    }
    return config;
}

PipelineConfig parse_config(const std::optional<std::filesystem::path>& path, const ConfigOverrides& overrides) {
    if (!path) return parse_config_text("", overrides, "<defaults>");
    std::ifstream in(*path, std::ios::binary);
    if (!in) throw IoError("cannot open configuration " + path->string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), overrides, path->string());
}

std::string serialize_config(const PipelineConfig& c) {
    json doc = {
        {"version", kConfigVersion},
        {"low_res_h", c.low_res_h},
        {"low_res_w", c.low_res_w},
        {"channels", c.channels},
        {"scale", c.scale},
        {"window_h", c.window_h},
        {"window_w", c.window_w},
        {"stride_h", c.stride_h},
        {"stride_w", c.stride_w},
        {"train_steps", c.train_steps},
        {"beta_start", c.beta_start},
        {"beta_end", c.beta_end},
        {"steps", c.steps},
        {"d0", c.d0},
        {"lambda", c.lambda},
        {"seed", c.seed},
        {"guidance_stop_step", c.guidance_stop_step},
        {"codec", c.codec},
        {"prompt", c.prompt},
        {"text_tokens", c.text_tokens},
        {"image_tokens", c.image_tokens},
        {"text_dim", c.text_dim},
        {"image_dim", c.image_dim},
        {"encoder_seed", c.encoder_seed},
        {"denoiser", c.denoiser},
        {"data_mean", c.data_mean},
        {"data_std", c.data_std},
        {"head_dim", c.head_dim},
        {"threads", c.threads},
    };
    return doc.dump(2) + "\n";
}

}  // namespace resmaster
