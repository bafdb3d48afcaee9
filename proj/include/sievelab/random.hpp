#pragma once

#include <cstdint>
#include <cmath>

namespace sievelab {

// splitmix64, used both as a seed scrambler and to derive per-replicate
// streams from a master seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t s = master ^ (0x6a09e667f3bcc909ULL + index * 0x9e3779b97f4a7c15ULL);
    splitmix64(s);
    return splitmix64(s);
}

// xoshiro256++ with hand-rolled floating point conversions, so every stream
// is reproducible independently of the standard library implementation.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : state_) w = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // uniform on (0,1), both endpoints excluded
    double uniform() {
        for (;;) {
            double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
            if (u > 0.0) return u;
        }
    }

    // Exp(1)
    double exponential() { return -std::log(uniform()); }

    // standard normal, Marsaglia polar; second value cached
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double x, y, s;
        do {
            x = 2.0 * uniform() - 1.0;
            y = 2.0 * uniform() - 1.0;
            s = x * x + y * y;
        } while (s >= 1.0 || s == 0.0);
        const double m = std::sqrt(-2.0 * std::log(s) / s);
        cached_ = y * m;
        have_cached_ = true;
        return x * m;
    }

    // exact Poisson(mean): sequential inversion below 30, PTRD rejection above
    std::uint64_t poisson(double mean);

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace sievelab
