#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace naim {

// Deterministic RNG used everywhere. Wraps a splitmix64 stream so that the
// same seed gives bit-identical draws on every platform and compiler; the
// standard <random> distributions are implementation-defined and would break
// that guarantee.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform on [0,1) with 53 bits of mantissa.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; caches the second draw.
    double normal();

    // Inclusive range. Modulo bias is < 2^-32 for the ranges used here.
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Fisher-Yates permutation of 0..n-1.
    std::vector<int> permutation(int n);

private:
    uint64_t state_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

// Derives one sub-seed per named component from a master seed, so every
// module consumes an independent stream. Tag hashing is FNV-1a.
uint64_t derive_seed(uint64_t master, std::string_view tag);

}  // namespace naim
