#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "litpipe/qc_rules.hpp"
#include "litpipe/task_store.hpp"

namespace litpipe {

struct VerbSubject {
    std::string verb;
    std::string subject;

    auto operator<=>(const VerbSubject&) const = default;
};

// verb: lowercased first token, which must be a word that is not a question
// or framing word; subject: up to max_subject_tokens following tokens, after
// leading determiners, stopping at a boundary word or clause punctuation.
std::optional<VerbSubject> extract_verb_subject(std::string_view instruction,
                                                const QcRules& rules = QcRules::defaults());

enum class Completeness { complete, incomplete };

struct CompletenessResult {
    Completeness verdict = Completeness::incomplete;
    std::array<bool, kFacetCount> facets{};  // indexed like kFacetNames

    std::vector<std::string> facet_names() const;
};

// complete iff all four facets have at least one cue in the text.
CompletenessResult classify_completeness(std::string_view input_text,
                                         const QcRules& rules = QcRules::defaults());

// First design (in rule order) with a cue in the text, else the fallback.
std::string classify_study_design(std::string_view input_text,
                                  const QcRules& rules = QcRules::defaults());

// Width-25 word-count buckets over [0, 500) plus one overflow bucket.
inline constexpr std::size_t kLengthBucketWidth = 25;
inline constexpr std::size_t kLengthBucketCount = 21;
std::size_t length_bucket(std::size_t words);
std::string length_bucket_label(std::size_t bucket);

struct PairCount {
    VerbSubject pair;
    std::size_t count = 0;

    bool operator==(const PairCount&) const = default;
};

struct QcReport {
    std::size_t total = 0;
    std::size_t unique_instructions = 0;
    std::size_t unique_inputs = 0;
    std::size_t instructions_with_pair = 0;
    std::vector<PairCount> verb_subject_pairs;  // count desc, then pair asc
    std::size_t unique_pair_count = 0;
    std::uint64_t seed = 0;
    std::size_t sample_size = 0;
    std::vector<std::size_t> sample_indices;  // sorted ascending
    std::size_t complete = 0;
    std::size_t incomplete = 0;
    std::map<std::string, std::size_t> facet_histogram;
    std::map<std::string, std::size_t> study_design_histogram;
    std::array<std::size_t, kLengthBucketCount> length_histogram{};  // over every input
    std::string rules_version;

    bool operator==(const QcReport&) const = default;

    std::string to_json() const;
    // Long-format rows (section,key,value) for external charting.
    std::string to_plot_csv() const;
};

// Uniqueness, verb-subject pairs and the length histogram cover the whole
// dataset; completeness and study design cover sample_n inputs drawn with
// the seeded sampler. Per-item analysis runs as OpenMP parallel loops.
QcReport qc_report(std::span<const InstructionTriplet> dataset, std::size_t sample_n,
                   std::uint64_t seed, const QcRules& rules = QcRules::defaults());

namespace reference {
// Single-threaded version of qc_report used to check the parallel kernel.
QcReport qc_report(std::span<const InstructionTriplet> dataset, std::size_t sample_n,
                   std::uint64_t seed, const QcRules& rules = QcRules::defaults());
}  // namespace reference

}  // namespace litpipe
