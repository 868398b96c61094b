#pragma once

// Deterministic per-trial random streams. Each stream is a splitmix64
// sequence whose state is hashed from (seed, delay index, trial index), so
// parallel and serial execution produce identical draws.

#include <cmath>
#include <cstdint>

namespace mqs {

class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in (0, 1]: never returns 0, safe inside log().
    double next_unit() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Exponential waiting time with the given rate.
    double next_exponential(double rate) { return -std::log(next_unit()) / rate; }

private:
    std::uint64_t state_;
};

// Collision-resistant stream derivation for (seed, index pair).
inline SplitMix64 make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    SplitMix64 mixer(seed);
    std::uint64_t s = mixer.next_u64();
    s ^= SplitMix64(a + 0x632be59bd9b4e019ULL).next_u64();
    s ^= SplitMix64(b + 0x9e3779b97f4a7c15ULL).next_u64() * 0xff51afd7ed558ccdULL;
    return SplitMix64(s);
}

} // namespace mqs
