// SPDX-License-Identifier: Apache-2.0
#include "resmaster/tiler.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "resmaster/errors.hpp"

namespace resmaster {
namespace {

void check_axis(const char* axis, std::size_t grid, std::size_t window, std::size_t stride) {
    const std::string name(axis);
    if (window < 1 || window > grid) {
        throw GeometryError(name, "patch " + name + ": window " + std::to_string(window) + " must lie in [1, " +
                                      std::to_string(grid) + "]");
    }
    if (stride < 1) {
        throw GeometryError(name, "patch " + name + ": stride must be >= 1");
    }
    if ((grid - window) % stride != 0) {
        std::string msg = "patch " + name + ": (grid " + std::to_string(grid) + " - window " +
                          std::to_string(window) + ") is not divisible by stride " + std::to_string(stride);
        if (auto s = nearest_valid_stride(grid, window, stride)) {
            msg += "; nearest valid stride is " + std::to_string(*s);
        }
        throw GeometryError(name, msg);
    }
}

}  // namespace

std::vector<std::size_t> PatchLayout::cover_counts() const {
    std::vector<std::size_t> counts(grid_h * grid_w, 0);
    for (const auto& r : rects) {
        for (std::size_t y = r.top; y < r.top + r.height; ++y) {
            for (std::size_t x = r.left; x < r.left + r.width; ++x) ++counts[y * grid_w + x];
        }
    }
    return counts;
}

std::optional<std::size_t> nearest_valid_stride(std::size_t grid, std::size_t window, std::size_t stride) {
    if (window < 1 || window > grid) return std::nullopt;
    const std::size_t span = grid - window;
    if (span == 0) return std::size_t{1};
    std::optional<std::size_t> best;
    std::size_t best_gap = 0;
    for (std::size_t d = 1; d <= span; ++d) {
        if (span % d != 0) continue;
        const std::size_t gap = d > stride ? d - stride : stride - d;
        if (!best || gap < best_gap) {
            best = d;
            best_gap = gap;
        }
    }
    return best;
}

PatchLayout plan_patches(std::size_t grid_h, std::size_t grid_w, std::size_t win_h, std::size_t win_w,
                         std::size_t stride_h, std::size_t stride_w) {
    check_axis("height", grid_h, win_h, stride_h);
    check_axis("width", grid_w, win_w, stride_w);
    PatchLayout layout{grid_h, grid_w, win_h, win_w, stride_h, stride_w, {}};
    const std::size_t rows = layout.rows();
    const std::size_t cols = layout.cols();
    layout.rects.reserve(rows * cols);
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            layout.rects.push_back({i * stride_h, j * stride_w, win_h, win_w});
        }
    }
    return layout;
}

LatentGrid extract_patch(const LatentGrid& g, const PatchRect& rect) {
    if (rect.height == 0 || rect.width == 0 || rect.top + rect.height > g.height() ||
        rect.left + rect.width > g.width()) {
        throw InvalidArgument("extract_patch: rect (" + std::to_string(rect.top) + ", " + std::to_string(rect.left) +
                              ", " + std::to_string(rect.height) + ", " + std::to_string(rect.width) +
                              ") outside grid " + g.shape_string());
    }
    const std::size_t c = g.channels();
    LatentGrid out(rect.height, rect.width, c);
    auto src = g.data();
    auto dst = out.data();
    const std::size_t row_len = rect.width * c;
    for (std::size_t y = 0; y < rect.height; ++y) {
        const std::size_t s = ((rect.top + y) * g.width() + rect.left) * c;
        std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(s), row_len,
                    dst.begin() + static_cast<std::ptrdiff_t>(y * row_len));
    }
    return out;
}

LatentGrid fuse_patches(const std::vector<LatentGrid>& patches, const PatchLayout& layout) {
    if (patches.size() != layout.count()) {
        throw InvalidArgument("fuse_patches: got " + std::to_string(patches.size()) + " patches for a layout of " +
                              std::to_string(layout.count()));
    }
    if (patches.empty()) {
        throw InvalidArgument("fuse_patches: layout has no patches");
    }
    const std::size_t c = patches.front().channels();
    for (std::size_t i = 0; i < patches.size(); ++i) {
        const auto& p = patches[i];
        const auto& r = layout.rects[i];
        if (p.height() != r.height || p.width() != r.width || p.channels() != c) {
            throw InvalidArgument("fuse_patches: patch " + std::to_string(i) + " has shape " + p.shape_string() +
                                  ", expected " + std::to_string(r.height) + "x" + std::to_string(r.width) + "x" +
                                  std::to_string(c));
        }
    }

    const std::size_t cells = layout.grid_h * layout.grid_w;
    LatentGrid anchor(layout.grid_h, layout.grid_w, c);
    std::vector<double> delta(cells * c, 0.0);
    std::vector<std::size_t> count(cells, 0);
    auto a = anchor.data();

    for (std::size_t i = 0; i < patches.size(); ++i) {
        const auto& r = layout.rects[i];
        auto src = patches[i].data();
        for (std::size_t y = 0; y < r.height; ++y) {
            for (std::size_t x = 0; x < r.width; ++x) {
                const std::size_t cell = (r.top + y) * layout.grid_w + (r.left + x);
                const std::size_t s = (y * r.width + x) * c;
                if (count[cell]++ == 0) {
                    for (std::size_t ch = 0; ch < c; ++ch) a[cell * c + ch] = src[s + ch];
                } else {
                    for (std::size_t ch = 0; ch < c; ++ch) delta[cell * c + ch] += src[s + ch] - a[cell * c + ch];
                }
            }
        }
    }

    for (std::size_t cell = 0; cell < cells; ++cell) {
        if (count[cell] == 0) {
            throw InvalidArgument("fuse_patches: layout leaves cell " + std::to_string(cell) + " uncovered");
        }
        if (count[cell] == 1) continue;
        const double n = static_cast<double>(count[cell]);
        for (std::size_t ch = 0; ch < c; ++ch) a[cell * c + ch] += delta[cell * c + ch] / n;
    }
    return anchor;
}

double keys_cubic(double x) noexcept {
    constexpr double a = -0.5;
    x = std::abs(x);
    if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
    return 0.0;
}

namespace {

struct Taps {
    std::array<std::size_t, 4> index;
    std::array<double, 4> weight;
};

// Source taps for each output coordinate along one axis. Weights sum to one,
// so samples are accumulated as offsets from tap 1; flat regions stay exact.
std::vector<Taps> axis_taps(std::size_t in, std::size_t out) {
    std::vector<Taps> taps(out);
    const double ratio = static_cast<double>(in) / static_cast<double>(out);
    const auto last = static_cast<long long>(in) - 1;
    for (std::size_t o = 0; o < out; ++o) {
        const double src = (static_cast<double>(o) + 0.5) * ratio - 0.5;
        const double base = std::floor(src);
        const double frac = src - base;
        for (int k = 0; k < 4; ++k) {
            const long long idx = static_cast<long long>(base) + k - 1;
            taps[o].index[k] = static_cast<std::size_t>(std::clamp(idx, 0LL, last));
            taps[o].weight[k] = keys_cubic(frac - static_cast<double>(k - 1));
        }
    }
    return taps;
}

}  // namespace

LatentGrid bicubic_upsample(const LatentGrid& g, std::size_t out_h, std::size_t out_w) {
    if (g.empty()) {
        throw InvalidArgument("bicubic_upsample: empty input");
    }
    if (out_h < g.height() || out_w < g.width()) {
        throw InvalidArgument("bicubic_upsample: downscaling " + g.shape_string() + " to " + std::to_string(out_h) +
                              "x" + std::to_string(out_w) + " is not supported");
    }
    const std::size_t c = g.channels();
    const auto rows = axis_taps(g.height(), out_h);
    const auto cols = axis_taps(g.width(), out_w);

    // Horizontal pass: in_h x out_w.
    LatentGrid wide(g.height(), out_w, c);
    for (std::size_t y = 0; y < g.height(); ++y) {
        for (std::size_t x = 0; x < out_w; ++x) {
            const auto& t = cols[x];
            for (std::size_t ch = 0; ch < c; ++ch) {
                const double anchor = g.at(y, t.index[1], ch);
                double acc = 0.0;
                for (int k = 0; k < 4; ++k) acc += t.weight[k] * (g.at(y, t.index[k], ch) - anchor);
                wide.at(y, x, ch) = anchor + acc;
            }
        }
    }
    LatentGrid out(out_h, out_w, c);
    for (std::size_t y = 0; y < out_h; ++y) {
        const auto& t = rows[y];
        for (std::size_t x = 0; x < out_w; ++x) {
            for (std::size_t ch = 0; ch < c; ++ch) {
                const double anchor = wide.at(t.index[1], x, ch);
                double acc = 0.0;
                for (int k = 0; k < 4; ++k) acc += t.weight[k] * (wide.at(t.index[k], x, ch) - anchor);
                out.at(y, x, ch) = anchor + acc;
            }
        }
    }
    return out;
}

}  // namespace resmaster
