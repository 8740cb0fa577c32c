#pragma once

#include <cmath>
#include <cstdint>

namespace shapesense {

// Seed scrambler, also used to derive independent per-sensor streams
// from (seed ^ sensor_id).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// xoshiro256++. Self-contained so that streams are reproducible across
// platforms and standard-library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) {
            s = splitmix64(s);
            word = s;
        }
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

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Box-Muller; two draws per call, no cached spare.
    double normal(double mean, double stddev) {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return mean + stddev * std::sqrt(-2.0 * std::log(u1)) *
                          std::cos(6.28318530717958647692 * u2);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4];
};

// Stream for one sensor. The run seed is scrambled before the sensor id
// is mixed in: xor-ing raw small seeds with small ids would give two runs
// the same stream set, merely permuted across sensors. `salt` separates
// the consumers of randomness within a run (route sampling, dropout,
// slope noise) so they do not share a stream.
inline Rng sensor_stream(std::uint64_t seed, std::uint64_t sensor_id,
                         std::uint64_t salt = 0) {
    const std::uint64_t id_mix =
        splitmix64(sensor_id + (salt + 1) * 0x9e3779b97f4a7c15ULL);
    return Rng(splitmix64(seed) ^ id_mix);
}

}  // namespace shapesense
