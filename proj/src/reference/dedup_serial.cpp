// Straightforward serial dedup over std::set<std::string>. It shares no code
// with the interned-id kernel and is used to check it.
#include <cctype>
#include <set>

#include "litpipe/error.hpp"
#include "litpipe/similarity.hpp"
#include "litpipe/text.hpp"

namespace litpipe::reference {

namespace {

std::set<std::string> token_set(std::string_view text) {
    std::set<std::string> out;
    std::string cur;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.insert(cur);
            cur.clear();
        } else {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (!cur.empty()) out.insert(cur);
    return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t shared = 0;
    for (const auto& t : a) shared += b.count(t);
    std::set<std::string> uni = a;
    uni.insert(b.begin(), b.end());
    return static_cast<double>(shared) / static_cast<double>(uni.size());
}

}  // namespace

double token_jaccard(std::string_view a, std::string_view b) {
    return jaccard(token_set(a), token_set(b));
}

DedupResult dedup_triplets(std::span<const InstructionTriplet> triplets, double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw InvalidArgument("dedup threshold must lie in [0, 1]");
    }
    DedupResult out;
    std::vector<std::set<std::string>> kept_sets;
    for (const auto& t : triplets) {
        auto set = token_set(t.instruction);
        bool dup = false;
        for (const auto& k : kept_sets) {
            if (jaccard(set, k) >= threshold) {
                dup = true;
                break;
            }
        }
        if (dup) {
            out.dropped.push_back(t);
        } else {
            kept_sets.push_back(std::move(set));
            out.kept.push_back(t);
        }
    }
    return out;
}

}  // namespace litpipe::reference
