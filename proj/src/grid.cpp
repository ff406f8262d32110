// SPDX-License-Identifier: Apache-2.0
#include "resmaster/grid.hpp"

#include <cmath>

#include "resmaster/errors.hpp"

namespace resmaster {

LatentGrid::LatentGrid(std::size_t height, std::size_t width, std::size_t channels, double fill)
    : height_(height), width_(width), channels_(channels), data_(height * width * channels, fill) {
    if (channels == 0) {
        throw InvalidArgument("LatentGrid: channel count must be at least 1");
    }
}

LatentGrid::LatentGrid(std::size_t height, std::size_t width, std::size_t channels, std::vector<double> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
    if (channels == 0) {
        throw InvalidArgument("LatentGrid: channel count must be at least 1");
    }
    if (data_.size() != height * width * channels) {
        throw InvalidArgument("LatentGrid: data length " + std::to_string(data_.size()) +
                              " does not match " + shape_string());
    }
}

std::string LatentGrid::shape_string() const {
    return std::to_string(height_) + "x" + std::to_string(width_) + "x" + std::to_string(channels_);
}

std::vector<double> LatentGrid::channel_means() const {
    // Offsets from the first cell keep the mean of a constant channel exact.
    std::vector<double> means(channels_, 0.0);
    const std::size_t cells = height_ * width_;
    if (cells == 0) return means;
    std::vector<double> offsets(channels_, 0.0);
    for (std::size_t i = 1; i < cells; ++i) {
        for (std::size_t c = 0; c < channels_; ++c) {
            offsets[c] += data_[i * channels_ + c] - data_[c];
        }
    }
    for (std::size_t c = 0; c < channels_; ++c) {
        means[c] = data_[c] + offsets[c] / static_cast<double>(cells);
    }
    return means;
}

bool LatentGrid::all_finite() const noexcept {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void require_same_shape(const LatentGrid& a, const LatentGrid& b, const char* what) {
    if (!a.same_shape(b)) {
        throw InvalidArgument(std::string(what) + ": shape mismatch (" + a.shape_string() + " vs " +
                              b.shape_string() + ")");
    }
}

}  // namespace resmaster
