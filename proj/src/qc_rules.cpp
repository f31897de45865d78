#include "litpipe/qc_rules.hpp"

#include <cctype>

#include <nlohmann/json.hpp>

#include "litpipe/embedded_data.hpp"
#include "litpipe/error.hpp"
#include "litpipe/text.hpp"

namespace litpipe {

using nlohmann::json;

namespace {

std::vector<std::string> string_list(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_array()) {
        throw Error(std::string("qc rules: \"") + key + "\" must be an array of strings");
    }
    std::vector<std::string> out;
    for (const auto& v : *it) {
        if (!v.is_string()) {
            throw Error(std::string("qc rules: \"") + key + "\" must hold only strings");
        }
        auto s = to_lower(trim(v.get<std::string>()));
        if (!s.empty()) out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

QcRules QcRules::from_json(std::string_view text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw Error("qc rules: not a JSON object");
    QcRules r;
    r.version = j.value("version", std::string{"unversioned"});
    for (auto& s : string_list(j, "determiners")) r.determiners.insert(std::move(s));
    for (auto& s : string_list(j, "non_imperative_starters")) {
        r.non_imperative_starters.insert(std::move(s));
    }
    for (auto& s : string_list(j, "subject_boundaries")) r.subject_boundaries.insert(std::move(s));
    r.max_subject_tokens = j.value("max_subject_tokens", std::size_t{4});
    if (r.max_subject_tokens == 0) throw Error("qc rules: max_subject_tokens must be positive");

    auto facets = j.find("facets");
    if (facets == j.end() || !facets->is_object()) throw Error("qc rules: missing \"facets\"");
    for (std::size_t f = 0; f < kFacetCount; ++f) {
        r.facet_cues[f] = string_list(*facets, kFacetNames[f]);
    }

    auto designs = j.find("study_designs");
    if (designs == j.end() || !designs->is_array()) {
        throw Error("qc rules: \"study_designs\" must be an array");
    }
    for (const auto& d : *designs) {
        if (!d.is_object() || !d.contains("label") || !d["label"].is_string()) {
            throw Error("qc rules: every study design needs a string label");
        }
        r.study_designs.push_back({d["label"].get<std::string>(), string_list(d, "cues")});
    }
    r.fallback_design = j.value("fallback_design", std::string{"other"});
    return r;
}

QcRules QcRules::load(const std::string& path) { return from_json(read_file(path)); }

const QcRules& QcRules::defaults() {
    static const QcRules rules = from_json(embedded::qc_rules_json());
    return rules;
}

std::vector<std::string> QcRules::design_labels() const {
    std::vector<std::string> out;
    for (const auto& d : study_designs) out.push_back(d.label);
    out.push_back(fallback_design);
    return out;
}

bool contains_cue(std::string_view lowered_text, std::string_view cue) {
    if (cue.empty()) return false;
    std::size_t pos = lowered_text.find(cue);
    while (pos != std::string_view::npos) {
        bool at_word_start =
            pos == 0 || std::isalnum(static_cast<unsigned char>(lowered_text[pos - 1])) == 0;
        if (at_word_start) return true;
        pos = lowered_text.find(cue, pos + 1);
    }
    return false;
}

}  // namespace litpipe
