#include "litpipe/qc.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include <nlohmann/json.hpp>

#include "litpipe/error.hpp"
#include "litpipe/rng.hpp"
#include "litpipe/text.hpp"

namespace litpipe {

namespace {

bool is_clause_punct(char c) {
    return c == '.' || c == ',' || c == ';' || c == ':' || c == '?' || c == '!';
}

// Drops surrounding punctuation such as quotes, brackets and clause marks.
std::string_view strip_punct(std::string_view tok) {
    auto keep = [](char c) {
        auto u = static_cast<unsigned char>(c);
        return std::isalnum(u) != 0 || u >= 0x80;
    };
    std::size_t b = 0;
    std::size_t e = tok.size();
    while (b < e && !keep(tok[b])) ++b;
    while (e > b && !keep(tok[e - 1])) --e;
    return tok.substr(b, e - b);
}

bool is_word(std::string_view s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        auto u = static_cast<unsigned char>(c);
        return std::isalpha(u) != 0 || c == '-' || c == '\'' || u >= 0x80;
    });
}

}  // namespace

std::optional<VerbSubject> extract_verb_subject(std::string_view instruction,
                                                const QcRules& rules) {
    auto tokens = split_whitespace(instruction);
    if (tokens.empty() || !starts_with_word_char(tokens.front())) return std::nullopt;

    std::string verb = to_lower(strip_punct(tokens.front()));
    if (!is_word(verb) || rules.non_imperative_starters.contains(verb)) return std::nullopt;

    std::string subject;
    std::size_t taken = 0;
    for (std::size_t i = 1; i < tokens.size() && taken < rules.max_subject_tokens; ++i) {
        std::string word = to_lower(strip_punct(tokens[i]));
        const bool clause_ends = is_clause_punct(tokens[i].back());
        if (word.empty()) {
            if (taken > 0) break;
            continue;
        }
        if (taken == 0 && rules.determiners.contains(word)) {
            if (clause_ends) break;
            continue;
        }
        if (rules.subject_boundaries.contains(word)) break;
        if (!subject.empty()) subject += ' ';
        subject += word;
        ++taken;
        if (clause_ends) break;
    }
    if (subject.empty()) return std::nullopt;
    return VerbSubject{std::move(verb), std::move(subject)};
}

std::vector<std::string> CompletenessResult::facet_names() const {
    std::vector<std::string> out;
    for (std::size_t f = 0; f < kFacetCount; ++f) {
        if (facets[f]) out.emplace_back(kFacetNames[f]);
    }
    return out;
}

CompletenessResult classify_completeness(std::string_view input_text, const QcRules& rules) {
    CompletenessResult r;
    const std::string lowered = to_lower(input_text);
    bool all = true;
    for (std::size_t f = 0; f < kFacetCount; ++f) {
        r.facets[f] = std::any_of(rules.facet_cues[f].begin(), rules.facet_cues[f].end(),
                                  [&](const std::string& cue) { return contains_cue(lowered, cue); });
        all = all && r.facets[f];
    }
    r.verdict = all ? Completeness::complete : Completeness::incomplete;
    return r;
}

std::string classify_study_design(std::string_view input_text, const QcRules& rules) {
    const std::string lowered = to_lower(input_text);
    for (const auto& design : rules.study_designs) {
        for (const auto& cue : design.cues) {
            if (contains_cue(lowered, cue)) return design.label;
        }
    }
    return rules.fallback_design;
}

std::size_t length_bucket(std::size_t words) {
    return std::min(words / kLengthBucketWidth, kLengthBucketCount - 1);
}

std::string length_bucket_label(std::size_t bucket) {
    if (bucket + 1 >= kLengthBucketCount) {
        return std::to_string((kLengthBucketCount - 1) * kLengthBucketWidth) + "+";
    }
    return std::to_string(bucket * kLengthBucketWidth) + "-" +
           std::to_string((bucket + 1) * kLengthBucketWidth - 1);
}

namespace {

void check_qc_args(std::span<const InstructionTriplet> dataset, std::size_t sample_n) {
    if (dataset.empty()) throw InvalidArgument("qc_report: dataset is empty");
    if (sample_n > dataset.size()) {
        throw InvalidArgument("qc_report: sample of " + std::to_string(sample_n) +
                              " exceeds dataset size " + std::to_string(dataset.size()));
    }
}

std::vector<std::size_t> qc_sample(std::size_t size, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    auto idx = rng.sample_indices(size, n);
    std::sort(idx.begin(), idx.end());
    return idx;
}

void init_histograms(QcReport& r, const QcRules& rules) {
    for (const auto* name : kFacetNames) r.facet_histogram[name] = 0;
    for (const auto& label : rules.design_labels()) r.study_design_histogram[label] = 0;
}

void finish_pairs(QcReport& r, const std::map<VerbSubject, std::size_t>& tally) {
    for (const auto& [pair, n] : tally) r.verb_subject_pairs.push_back({pair, n});
    std::stable_sort(r.verb_subject_pairs.begin(), r.verb_subject_pairs.end(),
                     [](const PairCount& a, const PairCount& b) { return a.count > b.count; });
    r.unique_pair_count = tally.size();
}

}  // namespace

QcReport qc_report(std::span<const InstructionTriplet> dataset, std::size_t sample_n,
                   std::uint64_t seed, const QcRules& rules) {
    check_qc_args(dataset, sample_n);
    QcReport r;
    r.total = dataset.size();
    r.seed = seed;
    r.rules_version = rules.version;
    auto uniq = uniqueness_stats(dataset);
    r.unique_instructions = uniq.unique_instructions;
    r.unique_inputs = uniq.unique_inputs;
    init_histograms(r, rules);

    const auto n = static_cast<std::ptrdiff_t>(dataset.size());
    std::vector<std::optional<VerbSubject>> pairs(dataset.size());
    std::vector<std::size_t> buckets(dataset.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto& t = dataset[static_cast<std::size_t>(i)];
        pairs[static_cast<std::size_t>(i)] = extract_verb_subject(t.instruction, rules);
        buckets[static_cast<std::size_t>(i)] = length_bucket(count_words(t.input));
    }

    r.sample_indices = qc_sample(dataset.size(), sample_n, seed);
    r.sample_size = sample_n;
    const auto m = static_cast<std::ptrdiff_t>(r.sample_indices.size());
    std::vector<CompletenessResult> completeness(r.sample_indices.size());
    std::vector<std::size_t> designs(r.sample_indices.size());
    const auto labels = rules.design_labels();
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t s = 0; s < m; ++s) {
        const auto& text = dataset[r.sample_indices[static_cast<std::size_t>(s)]].input;
        completeness[static_cast<std::size_t>(s)] = classify_completeness(text, rules);
        auto label = classify_study_design(text, rules);
        designs[static_cast<std::size_t>(s)] = static_cast<std::size_t>(
            std::find(labels.begin(), labels.end(), label) - labels.begin());
    }

    // Reductions are serial and in index order so the report is bit-stable.
    std::map<VerbSubject, std::size_t> tally;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        ++r.length_histogram[buckets[i]];
        if (pairs[i]) {
            ++r.instructions_with_pair;
            ++tally[*pairs[i]];
        }
    }
    finish_pairs(r, tally);
    for (std::size_t s = 0; s < completeness.size(); ++s) {
        const auto& c = completeness[s];
        (c.verdict == Completeness::complete ? r.complete : r.incomplete) += 1;
        for (std::size_t f = 0; f < kFacetCount; ++f) {
            if (c.facets[f]) ++r.facet_histogram[kFacetNames[f]];
        }
        ++r.study_design_histogram[labels[designs[s]]];
    }
    return r;
}

namespace reference {

QcReport qc_report(std::span<const InstructionTriplet> dataset, std::size_t sample_n,
                   std::uint64_t seed, const QcRules& rules) {
    check_qc_args(dataset, sample_n);
    QcReport r;
    r.total = dataset.size();
    r.seed = seed;
    r.rules_version = rules.version;
    init_histograms(r, rules);

    std::set<std::string> instructions;
    std::set<std::string> inputs;
    std::map<VerbSubject, std::size_t> tally;
    for (const auto& t : dataset) {
        instructions.emplace(trim(t.instruction));
        inputs.emplace(trim(t.input));
        ++r.length_histogram[length_bucket(count_words(t.input))];
        if (auto p = extract_verb_subject(t.instruction, rules)) {
            ++r.instructions_with_pair;
            ++tally[*p];
        }
    }
    r.unique_instructions = instructions.size();
    r.unique_inputs = inputs.size();
    finish_pairs(r, tally);

    r.sample_indices = qc_sample(dataset.size(), sample_n, seed);
    r.sample_size = sample_n;
    for (auto idx : r.sample_indices) {
        const auto& text = dataset[idx].input;
        auto c = classify_completeness(text, rules);
        if (c.verdict == Completeness::complete) {
            ++r.complete;
        } else {
            ++r.incomplete;
        }
        for (const auto& f : c.facet_names()) ++r.facet_histogram[f];
        ++r.study_design_histogram[classify_study_design(text, rules)];
    }
    return r;
}

}  // namespace reference

std::string QcReport::to_json() const {
    nlohmann::ordered_json j;
    j["total"] = total;
    j["unique_instructions"] = unique_instructions;
    j["unique_inputs"] = unique_inputs;
    j["instructions_with_pair"] = instructions_with_pair;
    j["unique_pair_count"] = unique_pair_count;
    j["verb_subject_pairs"] = nlohmann::ordered_json::array();
    for (const auto& p : verb_subject_pairs) {
        j["verb_subject_pairs"].push_back(
            {{"verb", p.pair.verb}, {"subject", p.pair.subject}, {"count", p.count}});
    }
    j["seed"] = seed;
    j["sample_size"] = sample_size;
    j["completeness"] = {{"complete", complete}, {"incomplete", incomplete}};
    j["facet_histogram"] = nlohmann::ordered_json::object();
    for (const auto* name : kFacetNames) j["facet_histogram"][name] = facet_histogram.at(name);
    j["study_design_histogram"] = nlohmann::ordered_json::object();
    for (const auto& [label, n] : study_design_histogram) j["study_design_histogram"][label] = n;
    j["length_histogram"] = nlohmann::ordered_json::object();
    for (std::size_t b = 0; b < kLengthBucketCount; ++b) {
        j["length_histogram"][length_bucket_label(b)] = length_histogram[b];
    }
    j["rules_version"] = rules_version;
    return j.dump(2);
}

std::string QcReport::to_plot_csv() const {
    auto quote = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"') q += '"';
            q += c;
        }
        return q + "\"";
    };
    std::string out = "section,key,value\n";
    for (const auto& p : verb_subject_pairs) {
        out += "verb_subject," + quote(p.pair.verb + " " + p.pair.subject) + "," +
               std::to_string(p.count) + "\n";
    }
    for (const auto& [label, n] : study_design_histogram) {
        out += "study_design," + quote(label) + "," + std::to_string(n) + "\n";
    }
    for (const auto* name : kFacetNames) {
        out += "facet," + std::string(name) + "," + std::to_string(facet_histogram.at(name)) + "\n";
    }
    out += "completeness,complete," + std::to_string(complete) + "\n";
    out += "completeness,incomplete," + std::to_string(incomplete) + "\n";
    for (std::size_t b = 0; b < kLengthBucketCount; ++b) {
        out += "length," + length_bucket_label(b) + "," + std::to_string(length_histogram[b]) + "\n";
    }
    return out;
}

}  // namespace litpipe
