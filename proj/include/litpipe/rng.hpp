#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace litpipe {

// Seeded generator used for every reproducible draw in the toolkit.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. Bounded integers are produced here by rejection sampling rather
// than through std::uniform_int_distribution (whose algorithm differs between
// standard libraries), so a seed reproduces the same draws on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    // Uniform integer in [0, bound). bound must be > 0.
    std::uint64_t uniform_below(std::uint64_t bound);

    // Fisher-Yates, walking from the back.
    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            auto j = static_cast<std::size_t>(uniform_below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    // n distinct indices from [0, pool), in draw order (partial Fisher-Yates).
    std::vector<std::size_t> sample_indices(std::size_t pool, std::size_t n);

private:
    std::mt19937_64 engine_;
};

// SplitMix64 finalizer; derives independent stream seeds from one seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace litpipe
