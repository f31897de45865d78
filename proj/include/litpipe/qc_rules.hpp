#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace litpipe {

// Facet names, in report order.
inline constexpr const char* kFacetNames[] = {"background", "methodology", "results",
                                              "conclusions"};
inline constexpr std::size_t kFacetCount = 4;

struct StudyDesignRule {
    std::string label;
    std::vector<std::string> cues;
};

// Keyword tables behind the QC heuristics. Loaded from data/qc_rules.json;
// the copy compiled into the library is the default.
struct QcRules {
    std::string version;
    std::unordered_set<std::string> determiners;
    std::unordered_set<std::string> non_imperative_starters;
    std::unordered_set<std::string> subject_boundaries;
    std::size_t max_subject_tokens = 4;
    std::vector<std::string> facet_cues[kFacetCount];
    std::vector<StudyDesignRule> study_designs;  // first match wins, in order
    std::string fallback_design = "other";

    static QcRules from_json(std::string_view text);
    static QcRules load(const std::string& path);
    static const QcRules& defaults();

    // Every label classify_study_design can return, fallback last.
    std::vector<std::string> design_labels() const;
};

// Cue matching used by both classifiers: the lowercased cue must occur at a
// word start (preceded by start of text or a non-alphanumeric byte); it may
// end mid-word, so "method" matches "methods". Appending text therefore
// never removes a match.
bool contains_cue(std::string_view lowered_text, std::string_view cue);

}  // namespace litpipe
