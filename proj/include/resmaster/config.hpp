// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "resmaster/pipeline.hpp"

namespace resmaster {

inline constexpr int kConfigVersion = 1;

/// Values given on the command line; each set field wins over the file.
struct ConfigOverrides {
    std::optional<std::size_t> scale;
    std::optional<std::size_t> window_h, window_w;
    std::optional<std::size_t> stride_h, stride_w;
    std::optional<int> steps;
    std::optional<double> d0;
    std::optional<double> lambda;
    std::optional<std::uint64_t> seed;
    std::optional<int> guidance_stop_step;
    std::optional<std::string> prompt;
};

/// Parses a config document. Empty (or whitespace-only) text means all
/// defaults. Unknown keys, wrong types and violated invariants are collected
/// and reported together in one ConfigError.
PipelineConfig parse_config_text(std::string_view text, const ConfigOverrides& overrides = {},
                                 const std::string& origin = "<config>");

/// As parse_config_text; with no path, starts from defaults.
PipelineConfig parse_config(const std::optional<std::filesystem::path>& path, const ConfigOverrides& overrides = {});

/// Document that parses back to `config`.
std::string serialize_config(const PipelineConfig& config);

}  // namespace resmaster
