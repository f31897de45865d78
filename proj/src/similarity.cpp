#include "litpipe/similarity.hpp"

#include <algorithm>

#include "litpipe/error.hpp"
#include "litpipe/text.hpp"

namespace litpipe {

namespace {

// Below this many kept sets the fork/join cost outweighs the scan.
constexpr std::size_t kParallelCutoff = 512;

void check_threshold(double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw InvalidArgument("dedup threshold must lie in [0, 1]");
    }
}

std::vector<std::string> lower_tokens(std::string_view text) {
    std::vector<std::string> out;
    for (auto tok : split_whitespace(text)) out.push_back(to_lower(tok));
    return out;
}

}  // namespace

TokenSet TokenDictionary::token_set(std::string_view text) {
    TokenSet out;
    for (auto tok : split_whitespace(text)) {
        auto [it, inserted] =
            ids_.try_emplace(to_lower(tok), static_cast<std::uint32_t>(ids_.size()));
        out.push_back(it->second);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double jaccard(const TokenSet& a, const TokenSet& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t shared = 0;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (*ia < *ib) {
            ++ia;
        } else if (*ib < *ia) {
            ++ib;
        } else {
            ++shared;
            ++ia;
            ++ib;
        }
    }
    const std::size_t uni = a.size() + b.size() - shared;
    return static_cast<double>(shared) / static_cast<double>(uni);
}

double token_jaccard(std::string_view a, std::string_view b) {
    TokenDictionary dict;
    auto sa = dict.token_set(a);
    auto sb = dict.token_set(b);
    return jaccard(sa, sb);
}

NearDuplicateFilter::NearDuplicateFilter(double threshold) : threshold_(threshold) {
    check_threshold(threshold);
}

bool NearDuplicateFilter::matches_kept(const TokenSet& candidate) const {
    const auto n = static_cast<std::ptrdiff_t>(kept_.size());
    bool dup = false;
#pragma omp parallel for if (kept_.size() >= kParallelCutoff) reduction(|| : dup) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        if (jaccard(candidate, kept_[static_cast<std::size_t>(i)]) >= threshold_) dup = true;
    }
    return dup;
}

bool NearDuplicateFilter::is_near_duplicate(std::string_view text) {
    return matches_kept(dict_.token_set(text));
}

bool NearDuplicateFilter::offer(std::string_view text) {
    auto set = dict_.token_set(text);
    if (matches_kept(set)) return false;
    kept_.push_back(std::move(set));
    return true;
}

std::vector<bool> dedup_keep_mask(std::span<const std::string_view> texts, double threshold) {
    check_threshold(threshold);
    const auto n = static_cast<std::ptrdiff_t>(texts.size());

    // Lowercasing and splitting is independent per item.
    std::vector<std::vector<std::string>> tokens(texts.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        tokens[static_cast<std::size_t>(i)] = lower_tokens(texts[static_cast<std::size_t>(i)]);
    }

    // Interning is serial so ids do not depend on thread timing.
    std::unordered_map<std::string, std::uint32_t> ids;
    std::vector<TokenSet> sets(texts.size());
    for (std::size_t i = 0; i < texts.size(); ++i) {
        auto& set = sets[i];
        for (auto& tok : tokens[i]) {
            auto [it, inserted] =
                ids.try_emplace(std::move(tok), static_cast<std::uint32_t>(ids.size()));
            set.push_back(it->second);
        }
        std::sort(set.begin(), set.end());
        set.erase(std::unique(set.begin(), set.end()), set.end());
    }

    std::vector<bool> keep(texts.size(), false);
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < sets.size(); ++i) {
        const auto& cand = sets[i];
        const auto m = static_cast<std::ptrdiff_t>(kept.size());
        bool dup = false;
#pragma omp parallel for if (kept.size() >= kParallelCutoff) reduction(|| : dup) schedule(static)
        for (std::ptrdiff_t j = 0; j < m; ++j) {
            if (jaccard(cand, sets[kept[static_cast<std::size_t>(j)]]) >= threshold) dup = true;
        }
        if (!dup) {
            keep[i] = true;
            kept.push_back(i);
        }
    }
    return keep;
}

DedupResult dedup_triplets(std::span<const InstructionTriplet> triplets, double threshold) {
    std::vector<std::string_view> texts;
    texts.reserve(triplets.size());
    for (const auto& t : triplets) texts.push_back(t.instruction);
    auto keep = dedup_keep_mask(texts, threshold);
    DedupResult out;
    for (std::size_t i = 0; i < triplets.size(); ++i) {
        (keep[i] ? out.kept : out.dropped).push_back(triplets[i]);
    }
    return out;
}

}  // namespace litpipe
