#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace affectsense {

/// 64-bit FNV-1a. Used for stable prompt digests and seed derivation, never for security.
constexpr std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ULL) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Mixes a base seed with a label; deterministic across platforms.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
    return splitmix64(splitmix64(seed ^ fnv1a64(label)) + index);
}

/// 16 lowercase hex digits.
std::string hex_digest(std::string_view data);

} // namespace affectsense
