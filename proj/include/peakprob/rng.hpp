#pragma once

#include <cstdint>
#include <random>

#include "peakprob/stats.hpp"

namespace peakprob {

// splitmix64 step; used to mix seeds into well-separated streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic seed derivation: mixes an arbitrary list of words into one
// seed. Used to give each (year, day, scenario, ...) its own stream so that
// results do not depend on evaluation order or worker count.
inline std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t state = 0x243f6a8885a308d3ULL; // arbitrary nonzero constant
    for (std::uint64_t part : parts) {
        state ^= splitmix64(state) ^ part;
        (void)splitmix64(state);
    }
    return splitmix64(state);
}

// Random stream with pinned-down output: uniforms come straight from the
// mt19937_64 bit stream (which the standard fully specifies) and normals go
// through the inverse normal CDF, so sequences are reproducible across
// platforms and standard-library implementations.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : gen_(seed) {}

    // Uniform on the open interval (0,1).
    double uniform() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() { return norm_quantile(uniform()); }

    std::uint64_t next_word() { return gen_(); }

private:
    std::mt19937_64 gen_;
};

} // namespace peakprob
