#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "litpipe/task_store.hpp"

namespace litpipe {

// Sorted, duplicate-free token ids of one lowercased, whitespace-split text.
using TokenSet = std::vector<std::uint32_t>;

// Interns lowercase whitespace tokens to dense ids.
class TokenDictionary {
public:
    TokenSet token_set(std::string_view text);
    std::size_t size() const { return ids_.size(); }

private:
    std::unordered_map<std::string, std::uint32_t> ids_;
};

// |a ∩ b| / |a ∪ b|; two empty sets are identical (1.0).
double jaccard(const TokenSet& a, const TokenSet& b);

// Jaccard over lowercase whitespace tokens of the two strings.
double token_jaccard(std::string_view a, std::string_view b);

// Greedy near-duplicate filter. Items are visited in order; an item is
// dropped when its similarity to any earlier kept item is >= threshold.
// The comparison against the kept set runs as an OpenMP parallel loop once
// the kept set is large enough.
class NearDuplicateFilter {
public:
    explicit NearDuplicateFilter(double threshold);

    // Returns true and records the text when it is kept.
    bool offer(std::string_view text);
    // Max similarity against the kept set without recording anything.
    bool is_near_duplicate(std::string_view text);

    double threshold() const { return threshold_; }
    std::size_t kept_count() const { return kept_.size(); }

private:
    bool matches_kept(const TokenSet& candidate) const;

    double threshold_;
    TokenDictionary dict_;
    std::vector<TokenSet> kept_;
};

struct DedupResult {
    std::vector<InstructionTriplet> kept;
    std::vector<InstructionTriplet> dropped;
};

// Instruction-level dedup; threshold must lie in [0, 1].
DedupResult dedup_triplets(std::span<const InstructionTriplet> triplets, double threshold);

// Per-item keep mask for the same rule, tokenizing in parallel.
std::vector<bool> dedup_keep_mask(std::span<const std::string_view> texts, double threshold);

namespace reference {
// Serial std::set-based implementation kept as an oracle for the kernels.
DedupResult dedup_triplets(std::span<const InstructionTriplet> triplets, double threshold);
double token_jaccard(std::string_view a, std::string_view b);
}  // namespace reference

}  // namespace litpipe
