#pragma once

#include <cstdint>

namespace pomdp {

// SplitMix64 in counter mode: draw k of stream `seed` is mix(seed + k*phi).
// Pure 64-bit integer arithmetic plus one IEEE multiply, so streams are
// bit-identical across platforms and seekable. Draws map to the open
// interval (0,1) via ((z >> 11) + 0.5) * 2^-53; a probability row sampled
// this way can never be all zero before normalization.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t next_u64() { return mix(seed_ + (++counter_) * kPhi); }

    double next_u01() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // Independent sub-stream seed, e.g. per decomposable component or per
    // Monte-Carlo scenario.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t salt) {
        return mix(seed ^ mix(salt + kPhi));
    }

    // One deterministic uniform draw addressed by (seed, a, b, c); used for
    // scenario randomness so that every policy consumes identical draws.
    static double u01_at(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
        std::uint64_t h = derive(derive(derive(seed, a), b), c);
        return (static_cast<double>(mix(h + kPhi) >> 11) + 0.5) * 0x1.0p-53;
    }

private:
    static constexpr std::uint64_t kPhi = 0x9E3779B97F4A7C15ull;
    std::uint64_t seed_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace pomdp
