#include "litpipe/ranking.hpp"

#include <algorithm>

#include "litpipe/error.hpp"

namespace litpipe {

std::string competition_ranking_problem(std::span<const int> ranks) {
    const auto k = static_cast<int>(ranks.size());
    for (int r : ranks) {
        if (r < 1 || r > k) {
            return "rank " + std::to_string(r) + " is outside [1, " + std::to_string(k) + "]";
        }
    }
    std::vector<int> sorted(ranks.begin(), ranks.end());
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        bool continues_tie = i > 0 && sorted[i] == sorted[i - 1];
        if (!continues_tie && sorted[i] != static_cast<int>(i) + 1) {
            return "invalid tie structure: after " + std::to_string(i) +
                   " better-ranked responses the next rank must be " + std::to_string(i + 1) +
                   ", got " + std::to_string(sorted[i]);
        }
    }
    return {};
}

bool is_competition_ranking(std::span<const int> ranks) {
    return competition_ranking_problem(ranks).empty();
}

std::vector<int> competition_ranks_from_scores(std::span<const int> scores) {
    std::vector<int> ranks(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        int better = 0;
        for (int s : scores) better += (s > scores[i]) ? 1 : 0;
        ranks[i] = better + 1;
    }
    return ranks;
}

std::vector<std::string> blind_labels(std::size_t k) {
    if (k > 26) throw InvalidArgument("at most 26 models can be blinded");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < k; ++i) out.emplace_back(1, static_cast<char>('A' + i));
    return out;
}

}  // namespace litpipe
