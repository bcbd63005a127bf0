#pragma once

#include <cstdint>
#include <random>

namespace taoi {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seedable stream keyed by (seed, stream index); distinct keys give
/// independent substreams for parallel replications. Draws are produced
/// through explicit 53-bit uniforms so sequences are platform-stable.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t key = seed ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
        const std::uint64_t s0 = splitmix64(key), s1 = splitmix64(key);
        const std::uint64_t s2 = splitmix64(key), s3 = splitmix64(key);
        std::seed_seq seq{static_cast<std::uint32_t>(s0), static_cast<std::uint32_t>(s0 >> 32),
                          static_cast<std::uint32_t>(s1), static_cast<std::uint32_t>(s1 >> 32),
                          static_cast<std::uint32_t>(s2), static_cast<std::uint32_t>(s2 >> 32),
                          static_cast<std::uint32_t>(s3), static_cast<std::uint32_t>(s3 >> 32)};
        engine_.seed(seq);
    }

    double uniform01() { return (engine_() >> 11) * 0x1.0p-53; }
    bool bernoulli(double p) { return uniform01() < p; }

private:
    std::mt19937_64 engine_;
};

}  // namespace taoi
