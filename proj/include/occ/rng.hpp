#pragma once

#include <cstdint>

namespace occ {

// splitmix64. Standard-library engines and distributions differ across
// implementations; frame sampling and splits must reproduce byte-for-byte on
// any platform, so the generator is pinned here.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n) via the multiply-shift reduction. The modulo bias is
    // below 2^-64 * n, immaterial for the range sizes used here.
    std::uint64_t bounded(std::uint64_t n) {
        using u128 = unsigned __int128;
        return static_cast<std::uint64_t>((static_cast<u128>(next()) * static_cast<u128>(n)) >> 64);
    }

    // Uniform double in [0, 1), 53 significant bits.
    double unit() { return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0); }

private:
    std::uint64_t state_;
};

}  // namespace occ
