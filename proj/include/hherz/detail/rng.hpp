#pragma once

#include <cstdint>

// Self-contained counter-seeded generator so that results are bit-identical
// across platforms and standard-library versions. std::mt19937_64 would be
// portable but the <random> distributions are not.

namespace hherz::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Derives an independent substream seed for stratum/purpose pairs.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    std::uint64_t s = seed ^ (0xA0761D6478BD642FULL * (tag + 1));
    std::uint64_t a = splitmix64(s);
    s ^= 0xE7037ED1A0B428DBULL * (index + 0x8EBC6AF09C88C6E3ULL);
    return a ^ splitmix64(s);
}

class Xoshiro256pp {
public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    std::uint64_t next() {
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

    // uniform in [0,1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

} // namespace hherz::rng
