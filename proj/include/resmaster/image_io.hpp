// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "resmaster/grid.hpp"

namespace resmaster {

// Binary netpbm: P5 (grayscale) and P6 (RGB), 8-bit samples.

/// Decodes a P5/P6 buffer into [0, 1] values (sample / maxval). `origin`
/// names the source in errors, which also carry the byte offset.
LatentGrid decode_netpbm(const std::vector<std::uint8_t>& bytes, const std::string& origin);

/// Encodes 1-channel grids as P5 and 3-channel grids as P6 with maxval 255.
/// Values are clamped to [0, 1] and rounded half-up; NaN maps to 0.
std::vector<std::uint8_t> encode_netpbm(const LatentGrid& grid);

std::uint8_t quantize_unit(double value) noexcept;

LatentGrid read_image(const std::filesystem::path& path);
void write_image(const LatentGrid& grid, const std::filesystem::path& path);

}  // namespace resmaster
