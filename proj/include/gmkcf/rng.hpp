#pragma once

#include <cstdint>
#include <random>

#include "gmkcf/types.hpp"

namespace gmkcf {

// splitmix64 finalizer; a bijection on 64-bit words.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seed of subtask `index` under a base seed. Injective in `index` for a fixed
// base: the pre-mix state is offset by an odd multiple and mix64 is a bijection.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return mix64(base + index * 0x9e3779b97f4a7c15ULL);
}

// 53-bit uniform draw in [0, 1); identical across standard libraries.
inline double uniform01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Column-major fill with Uniform(0,1) draws.
inline Matrix uniform_matrix(Index rows, Index cols, std::mt19937_64& gen) {
    Matrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) m(i, j) = uniform01(gen);
    return m;
}

}  // namespace gmkcf
