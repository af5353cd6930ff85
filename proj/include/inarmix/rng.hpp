#ifndef INARMIX_RNG_HPP
#define INARMIX_RNG_HPP

#include <cstdint>
#include <random>

namespace inarmix {

using Rng = std::mt19937_64;

/// splitmix64 step; used to derive independent stream seeds from a base seed
/// so that parallel tasks draw from non-overlapping generators regardless of
/// scheduling order.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t s = base ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

inline Rng make_rng(std::uint64_t base, std::uint64_t stream = 0) {
    return Rng(derive_seed(base, stream));
}

inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

} // namespace inarmix

#endif
