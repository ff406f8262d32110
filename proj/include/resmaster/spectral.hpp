// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <tuple>
#include <vector>

#include "resmaster/fft.hpp"
#include "resmaster/grid.hpp"

namespace resmaster {

/// Complex H x W x C grid in unshifted layout (DC at (0, 0)), same element
/// ordering as LatentGrid.
class SpectralGrid {
public:
    SpectralGrid() = default;
    SpectralGrid(std::size_t height, std::size_t width, std::size_t channels);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t channels() const noexcept { return channels_; }

    Complex& at(std::size_t u, std::size_t v, std::size_t ch) noexcept {
        return data_[(u * width_ + v) * channels_ + ch];
    }
    const Complex& at(std::size_t u, std::size_t v, std::size_t ch) const noexcept {
        return data_[(u * width_ + v) * channels_ + ch];
    }

    std::span<Complex> data() noexcept { return data_; }
    std::span<const Complex> data() const noexcept { return data_; }

    /// Largest |imag| over all entries.
    double max_abs_imag() const noexcept;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::size_t channels_ = 0;
    std::vector<Complex> data_;
};

/// Real weights in [0, 1] over an unshifted H x W spectrum. Always has a DC
/// weight of 1 and satisfies mask[u, v] = mask[-u mod H, -v mod W], so blending
/// two real spectra with it yields a real signal.
class FrequencyMask {
public:
    /// Validates range, DC = 1 and conjugate symmetry.
    static FrequencyMask from_values(std::size_t height, std::size_t width, std::vector<double> values);
    static FrequencyMask all_pass(std::size_t height, std::size_t width);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    double at(std::size_t u, std::size_t v) const noexcept { return values_[u * width_ + v]; }
    std::span<const double> values() const noexcept { return values_; }

private:
    FrequencyMask(std::size_t h, std::size_t w, std::vector<double> values)
        : height_(h), width_(w), values_(std::move(values)) {}

    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> values_;
};

/// Radial frequency of bin (u, v), scaled so the Nyquist corner sits at 1:
/// sqrt(fu^2 + fv^2) * sqrt(2) with fu = min(u, H-u)/H, fv = min(v, W-v)/W.
double normalized_frequency_radius(std::size_t u, std::size_t v, std::size_t height, std::size_t width);

/// exp(-D^2 / (2 D0^2)) on the normalized radius above. D0 = +inf gives an all-pass mask.
FrequencyMask gaussian_lowpass_mask(std::size_t height, std::size_t width, double cutoff);

/// Row/column plans for one H x W geometry. Thread-safe for concurrent use.
class Fft2d {
public:
    Fft2d(std::size_t height, std::size_t width);

    std::size_t height() const noexcept { return rows_.size(); }
    std::size_t width() const noexcept { return cols_.size(); }

    SpectralGrid forward(const LatentGrid& g) const;
    /// Inverse with 1/(H W) normalization, keeping the imaginary part.
    SpectralGrid inverse_complex(const SpectralGrid& f) const;
    /// Inverse returning the real part; throws NumericalError when the
    /// imaginary residue exceeds 1e-9 relative to max(1, peak real magnitude).
    LatentGrid inverse(const SpectralGrid& f) const;

private:
    void transform(std::vector<Complex>& plane, bool inverse) const;

    FftPlan rows_;  // length H, applied down columns
    FftPlan cols_;  // length W, applied along rows
};

SpectralGrid fft2d(const LatentGrid& g);
SpectralGrid ifft2d_complex(const SpectralGrid& f);
LatentGrid ifft2d(const SpectralGrid& f);

/// Real part of a complex grid after the residue check used by ifft2d.
LatentGrid real_part_checked(const SpectralGrid& f);

/// F' = FFT(low) * G + FFT(high) * (1 - G), per channel.
SpectralGrid swap_low_frequency_spectrum(const LatentGrid& high, const LatentGrid& low, const FrequencyMask& mask);

/// Replaces the low band of `estimate` with that of `reference`: IFFT of the blend above.
LatentGrid swap_low_frequency(const LatentGrid& estimate, const LatentGrid& reference, const FrequencyMask& mask);

/// Swapper bound to one patch geometry. The reference side of the blend is
/// fixed across timesteps, so its masked spectrum is computed once.
class LowFrequencySwapper {
public:
    LowFrequencySwapper(std::shared_ptr<const FrequencyMask> mask);

    /// FFT(reference) * G.
    SpectralGrid reference_band(const LatentGrid& reference) const;

    LatentGrid apply(const LatentGrid& estimate, const SpectralGrid& reference_band) const;

    const FrequencyMask& mask() const noexcept { return *mask_; }

private:
    std::shared_ptr<const FrequencyMask> mask_;
    Fft2d plan_;
};

/// Gaussian masks keyed by (H, W, D0); internally synchronized.
class MaskCache {
public:
    std::shared_ptr<const FrequencyMask> get(std::size_t height, std::size_t width, double cutoff);
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::map<std::tuple<std::size_t, std::size_t, double>, std::shared_ptr<const FrequencyMask>> masks_;
};

}  // namespace resmaster
