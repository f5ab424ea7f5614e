#pragma once

#include <array>
#include <cstdint>

namespace growseg {

/// splitmix64 step; also used to derive substream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// xoshiro256** seeded through splitmix64. Same seed, same stream, on every
/// platform; the standard library engines/distributions give no such
/// guarantee for distributions.
class Prng {
public:
    explicit Prng(std::uint64_t seed = 0) noexcept : seed_(seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) {
            w = splitmix64(sm);
        }
    }

    std::uint64_t seed() const noexcept { return seed_; }

    /// Independent generator for a named sub-task (restart index, ...).
    /// Depends only on this generator's seed, not on how far it has advanced.
    Prng substream(std::uint64_t index) const noexcept {
        std::uint64_t mix = seed_ ^ 0xD1B54A32D192ED03ULL;
        const std::uint64_t a = splitmix64(mix);
        std::uint64_t idx = index;
        const std::uint64_t b = splitmix64(idx);
        return Prng(a ^ (b * 0x9E3779B97F4A7C15ULL));
    }

    std::uint64_t next() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n), unbiased by rejection. n must be > 0.
    std::uint64_t below(std::uint64_t n) noexcept {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return v % n;
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t seed_;
    std::array<std::uint64_t, 4> s_{};
};

}  // namespace growseg
