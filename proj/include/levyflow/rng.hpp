#pragma once

#include <cstdint>
#include <random>

namespace levyflow {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream for (master seed, index); results never depend on the
/// order in which streams are consumed.
inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(stream_seed(seed, index)),
                      static_cast<std::uint32_t>(stream_seed(seed, index) >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(seed)};
    return Rng(seq);
}

}  // namespace levyflow
