#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace litpipe {

// True when ranks form a standard competition ranking over k = ranks.size()
// items ("1224"): every value lies in [1, k] and, once sorted, each tie group
// starting at position p (0-based) carries rank p + 1.
bool is_competition_ranking(std::span<const int> ranks);

// Explains why ranks are not a competition ranking; empty when valid.
std::string competition_ranking_problem(std::span<const int> ranks);

// Competition ranks where a higher score ranks better (rank 1).
std::vector<int> competition_ranks_from_scores(std::span<const int> scores);

// Blind labels "A", "B", ... for k responses (k <= 26).
std::vector<std::string> blind_labels(std::size_t k);

}  // namespace litpipe
