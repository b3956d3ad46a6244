#pragma once

#include <cstdint>
#include <string_view>

namespace clausevec {

// SplitMix64. Used everywhere randomness is needed so that generated
// problems, initial weights and splits are byte-identical across platforms
// (std::uniform_int_distribution is implementation-defined).
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [lo, hi], inclusive. Plain modulo; bias is irrelevant here,
    // cross-platform reproducibility is not.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
    }

    // Uniform in [0, 1).
    double uniform_real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [-a, a].
    double uniform_sym(double a) { return (2.0 * uniform_real() - 1.0) * a; }

    bool bernoulli(double p) { return uniform_real() < p; }

private:
    uint64_t state_;
};

// FNV-1a, for deriving per-name RNG streams from a global seed.
inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline Rng seeded_stream(uint64_t seed, std::string_view name) {
    return Rng(seed ^ fnv1a(name));
}

}  // namespace clausevec
