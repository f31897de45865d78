#include "litpipe/rng.hpp"

#include <numeric>

#include "litpipe/error.hpp"

namespace litpipe {

std::uint64_t Rng::uniform_below(std::uint64_t bound) {
    if (bound == 0) throw InvalidArgument("uniform_below: bound must be positive");
    // Values below 2^64 mod bound are rejected so x % bound is unbiased.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        std::uint64_t x = engine_();
        if (x >= threshold) return x % bound;
    }
}

std::vector<std::size_t> Rng::sample_indices(std::size_t pool, std::size_t n) {
    if (n > pool) throw InvalidArgument("sample_indices: n exceeds pool size");
    std::vector<std::size_t> idx(pool);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
        auto j = i + static_cast<std::size_t>(uniform_below(pool - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(n);
    return idx;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace litpipe
