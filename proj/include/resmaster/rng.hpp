// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>

#include "resmaster/grid.hpp"

namespace resmaster {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
/// easy as 1, 2, 3"). Pure: the same (counter, key) always gives the same block.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key) noexcept;

/// What a noise draw is used for. Part of the counter so different uses never collide.
enum class NoisePurpose : std::uint32_t {
    initial_latent = 1,
    posterior = 2,
    test = 0xff,
};

/// Address of one noise field: every element of the field gets its own counter.
struct NoiseKey {
    NoisePurpose purpose = NoisePurpose::posterior;
    std::uint32_t step = 0;
    std::uint32_t patch = 0;
};

/// Stateless standard-normal source. Value for (key, element) is independent
/// of evaluation order or thread, which keeps parallel sampling reproducible.
class CounterNormal {
public:
    explicit CounterNormal(std::uint64_t seed) noexcept;

    std::uint64_t seed() const noexcept { return seed_; }

    /// Uniform in (0, 1] built from 53 bits.
    static double to_unit(std::uint32_t hi, std::uint32_t lo) noexcept;

    double normal(const NoiseKey& key, std::uint64_t element) const noexcept;

    LatentGrid grid(const NoiseKey& key, std::size_t height, std::size_t width, std::size_t channels) const;

private:
    std::uint64_t seed_;
    std::array<std::uint32_t, 2> key_;
};

}  // namespace resmaster
