// Deterministic random helpers. The standard distributions are
// implementation-defined, so anything that must reproduce bit-identically
// across toolchains draws through these instead.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace topores {

// Uniform double in [0, 1) from the top 53 bits of the engine output.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline uint64_t uniform_below(std::mt19937_64& rng, uint64_t n) {
    // Rejection sampling; unbiased and portable.
    if (n <= 1) return 0;
    const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

template <typename T>
void shuffle_deterministic(std::vector<T>& v, std::mt19937_64& rng) {
    for (size_t i = v.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(uniform_below(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace topores
