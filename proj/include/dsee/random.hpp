#pragma once

#include <cstdint>
#include <random>

namespace dsee {

// Deterministic RNG stream for simulation runs. Wraps mt19937_64 but
// produces uniforms directly from the raw engine output so sequences do
// not depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(scramble(seed)) {}

    // uniform double in [0, 1)
    double uniform01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    // uniform integer in [0, n)
    std::size_t uniform_index(std::size_t n) {
        // rejection sampling keeps the draw exactly uniform
        const std::uint64_t span = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= span);
        return static_cast<std::size_t>(x % n);
    }

    std::uint64_t next_u64() { return eng_(); }

private:
    // splitmix64 step; avoids correlated mt19937_64 states for adjacent seeds
    static std::uint64_t scramble(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    std::mt19937_64 eng_;
};

} // namespace dsee
