#pragma once

#include <cstdint>

namespace tailrisk::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

/// Counter-based uniform generator with splittable streams. Draw i of
/// stream s under seed k depends only on (k, s, i), so any partitioning of
/// the work over threads reproduces the same values bit for bit.
class Stream {
  public:
    Stream(std::uint64_t seed, std::uint64_t stream)
        : key_(mix64(mix64(seed + kGolden) ^ (kGolden * (stream + 1)))) {}

    /// Uniform draw in the open interval (0, 1).
    double uniform(std::uint64_t i) const {
        const std::uint64_t z = mix64(key_ + kGolden * (i + 1));
        return (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t bits(std::uint64_t i) const { return mix64(key_ + kGolden * (i + 1)); }

  private:
    std::uint64_t key_;
};

}  // namespace tailrisk::rng
