#ifndef GCT_RNG_HPP
#define GCT_RNG_HPP

#include <cstdint>
#include <random>

namespace gct {

// splitmix64; used to derive well-separated substream seeds from a
// single user seed so parallel trials stay reproducible.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed for substream `index` of the stream rooted at `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ splitmix64(index));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline Rng make_rng(std::uint64_t seed, std::uint64_t index) {
    return Rng(derive_seed(seed, index));
}

} // namespace gct

#endif
