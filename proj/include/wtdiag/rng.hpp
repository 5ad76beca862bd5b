#pragma once

#include <cmath>
#include <cstdint>

namespace wtdiag {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Deterministic substream seed for chunk/replicate `idx` of a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t idx) {
    std::uint64_t sm = master;
    std::uint64_t a = splitmix64(sm);
    std::uint64_t b = idx + 0x9E3779B97F4A7C15ull;
    b = (b ^ (b >> 30)) * 0xBF58476D1CE4E5B9ull;
    b = (b ^ (b >> 27)) * 0x94D049BB133111EBull;
    return a ^ (b ^ (b >> 31));
}

/// xoshiro256++ with platform-independent output; normal variates via
/// Box-Muller so that results do not depend on the standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    /// Substream `idx` of a master seed; used for per-chunk / per-replicate
    /// streams with a fixed merge order.
    static Rng stream(std::uint64_t master, std::uint64_t idx) {
        return Rng(derive_seed(master, idx));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0,1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in (0,1], safe as a log() argument.
    double uniform_pos() { return 1.0 - uniform(); }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u = uniform_pos();
        double v = uniform();
        double r = std::sqrt(-2.0 * std::log(u));
        double c = std::cos(6.283185307179586476925286766559 * v);
        double s = std::sin(6.283185307179586476925286766559 * v);
        cached_ = r * s;
        have_cached_ = true;
        return r * c;
    }

    /// Integer in [lo, hi] inclusive (hi - lo must fit in uint64).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<std::int64_t>(next_u64() % span);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t s_[4];
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace wtdiag
