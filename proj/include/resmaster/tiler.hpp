// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "resmaster/grid.hpp"

namespace resmaster {

struct PatchRect {
    std::size_t top = 0;
    std::size_t left = 0;
    std::size_t height = 0;
    std::size_t width = 0;

    friend bool operator==(const PatchRect&, const PatchRect&) = default;
};

/// Sliding-window tiling of a grid. Rects are stored row-major by (top, left),
/// which is the canonical order for fusion and for per-patch keys.
struct PatchLayout {
    std::size_t grid_h = 0;
    std::size_t grid_w = 0;
    std::size_t win_h = 0;
    std::size_t win_w = 0;
    std::size_t stride_h = 0;
    std::size_t stride_w = 0;
    std::vector<PatchRect> rects;

    std::size_t rows() const noexcept { return (grid_h - win_h) / stride_h + 1; }
    std::size_t cols() const noexcept { return (grid_w - win_w) / stride_w + 1; }
    std::size_t count() const noexcept { return rects.size(); }

    /// Number of rects covering each cell, row-major over the grid.
    std::vector<std::size_t> cover_counts() const;
};

/// Throws GeometryError naming the axis ("height" or "width") when
/// (grid - window) is not a multiple of the stride, or the window does not fit.
PatchLayout plan_patches(std::size_t grid_h, std::size_t grid_w, std::size_t win_h, std::size_t win_w,
                         std::size_t stride_h, std::size_t stride_w);

/// Closest stride to `stride` (ties toward the smaller one) that tiles the
/// axis exactly, or nullopt when the window does not fit.
std::optional<std::size_t> nearest_valid_stride(std::size_t grid, std::size_t window, std::size_t stride);

LatentGrid extract_patch(const LatentGrid& g, const PatchRect& rect);

/// Averages overlapping patches cell by cell. The average is formed as
/// first + sum(v_i - first) / count with "first" taken in canonical rect
/// order, which makes fuse(extract-all(g)) reproduce g bit-for-bit.
LatentGrid fuse_patches(const std::vector<LatentGrid>& patches, const PatchLayout& layout);

/// Keys cubic convolution weight (a = -0.5).
double keys_cubic(double x) noexcept;

/// Separable bicubic resampling with half-pixel centers and clamp-to-edge.
/// Only upsampling (or identity) is supported.
LatentGrid bicubic_upsample(const LatentGrid& g, std::size_t out_h, std::size_t out_w);

}  // namespace resmaster
