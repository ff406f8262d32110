// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace resmaster {

/// Real-valued H x W x C grid stored row-major with interleaved channels:
/// element (row, col, ch) lives at ((row * width) + col) * channels + ch.
/// Used for images, latents and noise alike.
class LatentGrid {
public:
    LatentGrid() = default;
    LatentGrid(std::size_t height, std::size_t width, std::size_t channels, double fill = 0.0);
    LatentGrid(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> data);

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& at(std::size_t row, std::size_t col, std::size_t ch) noexcept {
        return data_[(row * width_ + col) * channels_ + ch];
    }
    double at(std::size_t row, std::size_t col, std::size_t ch) const noexcept {
        return data_[(row * width_ + col) * channels_ + ch];
    }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    bool same_shape(const LatentGrid& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
    }

    std::string shape_string() const;

    /// Per-channel arithmetic mean.
    std::vector<double> channel_means() const;

    bool all_finite() const noexcept;

    friend bool operator==(const LatentGrid&, const LatentGrid&) = default;

private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::size_t channels_ = 0;
    std::vector<double> data_;
};

// Throws InvalidArgument naming `what` when shapes differ.
void require_same_shape(const LatentGrid& a, const LatentGrid& b, const char* what);

}  // namespace resmaster
