// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string_view>

namespace resmaster {

// Fixed-width integer hashing used by the seeded stubs; results are identical on every platform.

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ULL ^ splitmix64(seed);
    for (char c : bytes) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept {
    return splitmix64(h ^ splitmix64(v));
}

/// Maps the top 53 bits to [-1, 1).
constexpr double to_signed_unit(std::uint64_t h) noexcept {
    return static_cast<double>(h >> 11) * 0x1.0p-52 - 1.0;
}

}  // namespace resmaster
