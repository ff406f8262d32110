// SPDX-License-Identifier: Apache-2.0
#include "resmaster/rng.hpp"

#include <cmath>
#include <numbers>

namespace resmaster {
namespace {

constexpr std::uint32_t kMulA = 0xD2511F53;
constexpr std::uint32_t kMulB = 0xCD9E8D57;
constexpr std::uint32_t kWeylA = 0x9E3779B9;
constexpr std::uint32_t kWeylB = 0xBB67AE85;

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) noexcept {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeylA;
            key[1] += kWeylB;
        }
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMulA) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMulB) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

CounterNormal::CounterNormal(std::uint64_t seed) noexcept
    : seed_(seed), key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

double CounterNormal::to_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
    return (static_cast<double>(bits) + 1.0) * 0x1.0p-53;
}

double CounterNormal::normal(const NoiseKey& key, std::uint64_t element) const noexcept {
    const std::array<std::uint32_t, 4> ctr{
        static_cast<std::uint32_t>(element),
        static_cast<std::uint32_t>(element >> 32),
        key.patch,
        (static_cast<std::uint32_t>(key.purpose) << 24) ^ key.step,
    };
    const auto r = philox4x32(ctr, key_);
    // Box-Muller, cosine branch.
    const double u1 = to_unit(r[0], r[1]);
    const double u2 = to_unit(r[2], r[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

LatentGrid CounterNormal::grid(const NoiseKey& key, std::size_t height, std::size_t width,
                               std::size_t channels) const {
    LatentGrid g(height, width, channels);
    auto d = g.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = normal(key, i);
    return g;
}

}  // namespace resmaster
