#ifndef meetpat_random_hpp
#define meetpat_random_hpp

#include <cstdint>
#include <random>

namespace meetpat {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to derive independent per-run seeds
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

} // namespace meetpat

#endif
