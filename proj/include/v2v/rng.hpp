#pragma once

// All randomness in the library flows from explicit 64-bit seeds through the
// two generators below:
//   * SplitMix64 (Steele, Lea & Flood) for seeding and counter hashing;
//   * xoshiro256** (Blackman & Vigna) for sequential streams.
// Distribution transforms are implemented here rather than taken from
// <random>, whose distributions are implementation-defined.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <utility>

namespace v2v {

inline constexpr const char* kPrngDescription = "xoshiro256** seeded by splitmix64; counter masks via splitmix64 finalizer";

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        state_ += 0x9e3779b97f4a7c15ULL;
        return splitmix64_mix(state_);
    }

private:
    std::uint64_t state_;
};

/// Stateless hash of a seed and a tuple of counters. Used where a random
/// draw must be addressable by position (dropout masks) instead of by
/// sequence.
constexpr std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                     std::uint64_t c = 0, std::uint64_t d = 0) noexcept {
    std::uint64_t h = splitmix64_mix(seed + 0x9e3779b97f4a7c15ULL);
    h = splitmix64_mix(h ^ (a + 0x632be59bd9b4e019ULL));
    h = splitmix64_mix(h ^ (b + 0x8cb92ba72f3d8dd7ULL));
    h = splitmix64_mix(h ^ (c + 0xd1b54a32d192ed03ULL));
    h = splitmix64_mix(h ^ (d + 0xaef17502108ef2d9ULL));
    return h;
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double to_unit_double(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed) noexcept {
        SplitMix64 sm(seed);
        for (auto& word : s_) word = sm.next();
    }

    /// Independent stream for a (seed, purpose) pair.
    static Xoshiro256 stream(std::uint64_t seed, std::uint64_t purpose) noexcept {
        return Xoshiro256(counter_hash(seed, purpose));
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

    double uniform() noexcept { return to_unit_double(next()); }

    /// Uniform integer in [0, bound) by rejection (no modulo bias).
    std::uint64_t below(std::uint64_t bound) noexcept {
        if (bound <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t x = next();
        while (x >= limit) x = next();
        return x % bound;
    }

    /// Standard normal via Box-Muller; the second variate is cached.
    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::span<T> items) noexcept {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4]{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace v2v
