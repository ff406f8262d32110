// SPDX-License-Identifier: Apache-2.0
#include "resmaster/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "resmaster/errors.hpp"

namespace resmaster {
namespace {

constexpr double kResidueTolerance = 1e-9;

void require_nonempty(std::size_t h, std::size_t w, const char* what) {
    if (h == 0 || w == 0) {
        throw InvalidArgument(std::string(what) + ": height and width must be >= 1");
    }
}

}  // namespace

SpectralGrid::SpectralGrid(std::size_t height, std::size_t width, std::size_t channels)
    : height_(height), width_(width), channels_(channels), data_(height * width * channels) {}

double SpectralGrid::max_abs_imag() const noexcept {
    double m = 0.0;
    for (const auto& z : data_) m = std::max(m, std::abs(z.imag()));
    return m;
}

FrequencyMask FrequencyMask::from_values(std::size_t height, std::size_t width, std::vector<double> values) {
    require_nonempty(height, width, "FrequencyMask");
    if (values.size() != height * width) {
        throw InvalidArgument("FrequencyMask: expected " + std::to_string(height * width) + " values");
    }
    for (double v : values) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw InvalidArgument("FrequencyMask: weights must lie in [0, 1]");
        }
    }
    if (values[0] != 1.0) {
        throw InvalidArgument("FrequencyMask: DC weight must be 1");
    }
    for (std::size_t u = 0; u < height; ++u) {
        for (std::size_t v = 0; v < width; ++v) {
            const std::size_t mu = (height - u) % height;
            const std::size_t mv = (width - v) % width;
            if (values[u * width + v] != values[mu * width + mv]) {
                throw InvalidArgument("FrequencyMask: weights are not conjugate-symmetric at (" +
                                      std::to_string(u) + ", " + std::to_string(v) + ")");
            }
        }
    }
    return FrequencyMask(height, width, std::move(values));
}

FrequencyMask FrequencyMask::all_pass(std::size_t height, std::size_t width) {
    require_nonempty(height, width, "FrequencyMask");
    return FrequencyMask(height, width, std::vector<double>(height * width, 1.0));
}

double normalized_frequency_radius(std::size_t u, std::size_t v, std::size_t height, std::size_t width) {
    const double fu = static_cast<double>(std::min(u, height - u)) / static_cast<double>(height);
    const double fv = static_cast<double>(std::min(v, width - v)) / static_cast<double>(width);
    return std::sqrt(fu * fu + fv * fv) * std::numbers::sqrt2;
}

FrequencyMask gaussian_lowpass_mask(std::size_t height, std::size_t width, double cutoff) {
    require_nonempty(height, width, "gaussian_lowpass_mask");
    if (!(cutoff > 0.0)) {
        throw InvalidArgument("gaussian_lowpass_mask: cutoff D0 must be positive");
    }
    std::vector<double> values(height * width);
    const double denom = 2.0 * cutoff * cutoff;
    for (std::size_t u = 0; u < height; ++u) {
        for (std::size_t v = 0; v < width; ++v) {
            const double d = normalized_frequency_radius(u, v, height, width);
            values[u * width + v] = std::isinf(cutoff) ? 1.0 : std::exp(-(d * d) / denom);
        }
    }
    return FrequencyMask::from_values(height, width, std::move(values));
}

Fft2d::Fft2d(std::size_t height, std::size_t width) : rows_(height), cols_(width) {}

void Fft2d::transform(std::vector<Complex>& plane, bool inverse) const {
    const std::size_t h = rows_.size();
    const std::size_t w = cols_.size();
    for (std::size_t r = 0; r < h; ++r) {
        std::span<Complex> row(plane.data() + r * w, w);
        inverse ? cols_.inverse(row) : cols_.forward(row);
    }
    std::vector<Complex> column(h);
    for (std::size_t c = 0; c < w; ++c) {
        for (std::size_t r = 0; r < h; ++r) column[r] = plane[r * w + c];
        inverse ? rows_.inverse(column) : rows_.forward(column);
        for (std::size_t r = 0; r < h; ++r) plane[r * w + c] = column[r];
    }
}

SpectralGrid Fft2d::forward(const LatentGrid& g) const {
    if (g.height() != height() || g.width() != width()) {
        throw InvalidArgument("fft2d: grid " + g.shape_string() + " does not match plan");
    }
    const std::size_t cells = height() * width();
    const std::size_t channels = g.channels();
    SpectralGrid out(height(), width(), channels);
    auto src = g.data();
    auto dst = out.data();
    std::vector<Complex> plane(cells);
    for (std::size_t ch = 0; ch < channels; ++ch) {
        for (std::size_t i = 0; i < cells; ++i) plane[i] = {src[i * channels + ch], 0.0};
        transform(plane, false);
        for (std::size_t i = 0; i < cells; ++i) dst[i * channels + ch] = plane[i];
    }
    return out;
}

SpectralGrid Fft2d::inverse_complex(const SpectralGrid& f) const {
    if (f.height() != height() || f.width() != width()) {
        throw InvalidArgument("ifft2d: spectrum does not match plan");
    }
    const std::size_t cells = height() * width();
    const std::size_t channels = f.channels();
    const double scale = 1.0 / static_cast<double>(cells);
    SpectralGrid out(height(), width(), channels);
    auto src = f.data();
    auto dst = out.data();
    std::vector<Complex> plane(cells);
    for (std::size_t ch = 0; ch < channels; ++ch) {
        for (std::size_t i = 0; i < cells; ++i) plane[i] = src[i * channels + ch];
        transform(plane, true);
        for (std::size_t i = 0; i < cells; ++i) dst[i * channels + ch] = plane[i] * scale;
    }
    return out;
}

LatentGrid Fft2d::inverse(const SpectralGrid& f) const { return real_part_checked(inverse_complex(f)); }

LatentGrid real_part_checked(const SpectralGrid& f) {
    double peak = 1.0;
    for (const auto& z : f.data()) peak = std::max(peak, std::abs(z.real()));
    const double residue = f.max_abs_imag();
    if (residue > kResidueTolerance * peak) {
        throw NumericalError("ifft2d: imaginary residue " + std::to_string(residue) +
                             " exceeds tolerance; input spectrum is not conjugate-symmetric");
    }
    std::vector<double> real(f.data().size());
    std::transform(f.data().begin(), f.data().end(), real.begin(), [](const Complex& z) { return z.real(); });
    return LatentGrid(f.height(), f.width(), f.channels(), std::move(real));
}

SpectralGrid fft2d(const LatentGrid& g) { return Fft2d(g.height(), g.width()).forward(g); }

SpectralGrid ifft2d_complex(const SpectralGrid& f) { return Fft2d(f.height(), f.width()).inverse_complex(f); }

LatentGrid ifft2d(const SpectralGrid& f) { return Fft2d(f.height(), f.width()).inverse(f); }

namespace {

void check_swap_shapes(const LatentGrid& high, const LatentGrid& low, const FrequencyMask& mask) {
    require_same_shape(high, low, "swap_low_frequency");
    if (mask.height() != high.height() || mask.width() != high.width()) {
        throw InvalidArgument("swap_low_frequency: mask " + std::to_string(mask.height()) + "x" +
                              std::to_string(mask.width()) + " does not match grid " + high.shape_string());
    }
}

// f_high <- f_low * G + f_high * (1 - G); f_low already carries the G factor when premasked.
void blend_into(SpectralGrid& f_high, const SpectralGrid& f_low, const FrequencyMask& mask, bool premasked) {
    const std::size_t channels = f_high.channels();
    auto hi = f_high.data();
    auto lo = f_low.data();
    auto g = mask.values();
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double keep = g[i];
        for (std::size_t ch = 0; ch < channels; ++ch) {
            const std::size_t k = i * channels + ch;
            hi[k] = (premasked ? lo[k] : lo[k] * keep) + hi[k] * (1.0 - keep);
        }
    }
}

}  // namespace

SpectralGrid swap_low_frequency_spectrum(const LatentGrid& high, const LatentGrid& low, const FrequencyMask& mask) {
    check_swap_shapes(high, low, mask);
    const Fft2d plan(high.height(), high.width());
    SpectralGrid f_high = plan.forward(high);
    blend_into(f_high, plan.forward(low), mask, false);
    return f_high;
}

LatentGrid swap_low_frequency(const LatentGrid& estimate, const LatentGrid& reference, const FrequencyMask& mask) {
    return ifft2d(swap_low_frequency_spectrum(estimate, reference, mask));
}

namespace {

std::shared_ptr<const FrequencyMask> non_null(std::shared_ptr<const FrequencyMask> mask) {
    if (!mask) throw InvalidArgument("LowFrequencySwapper: null mask");
    return mask;
}

}  // namespace

LowFrequencySwapper::LowFrequencySwapper(std::shared_ptr<const FrequencyMask> mask)
    : mask_(non_null(std::move(mask))), plan_(mask_->height(), mask_->width()) {}

SpectralGrid LowFrequencySwapper::reference_band(const LatentGrid& reference) const {
    SpectralGrid f = plan_.forward(reference);
    const std::size_t channels = f.channels();
    auto data = f.data();
    auto g = mask_->values();
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t ch = 0; ch < channels; ++ch) data[i * channels + ch] *= g[i];
    }
    return f;
}

LatentGrid LowFrequencySwapper::apply(const LatentGrid& estimate, const SpectralGrid& reference_band) const {
    if (reference_band.height() != estimate.height() || reference_band.width() != estimate.width() ||
        reference_band.channels() != estimate.channels()) {
        throw InvalidArgument("LowFrequencySwapper: reference band does not match estimate " +
                              estimate.shape_string());
    }
    SpectralGrid f = plan_.forward(estimate);
    blend_into(f, reference_band, *mask_, true);
    return plan_.inverse(f);
}

std::shared_ptr<const FrequencyMask> MaskCache::get(std::size_t height, std::size_t width, double cutoff) {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(height, width, cutoff);
    auto it = masks_.find(key);
    if (it != masks_.end()) return it->second;
    auto mask = std::make_shared<const FrequencyMask>(gaussian_lowpass_mask(height, width, cutoff));
    masks_.emplace(key, mask);
    return mask;
}

std::size_t MaskCache::size() const {
    std::lock_guard lock(mutex_);
    return masks_.size();
}

}  // namespace resmaster
