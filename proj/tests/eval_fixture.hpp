#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "litpipe/eval_session.hpp"
#include "litpipe/inference.hpp"

namespace testutil {

inline std::vector<litpipe::PromptCase> prompt_cases(std::size_t n) {
    std::vector<litpipe::PromptCase> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({"case" + std::to_string(i + 1), "Instruction " + std::to_string(i + 1),
                       i % 2 ? "" : "Input text " + std::to_string(i + 1)});
    }
    return out;
}

inline litpipe::ResponseMatrix full_matrix(const std::vector<litpipe::PromptCase>& cases,
                                           const std::vector<std::string>& models) {
    std::vector<std::string> ids;
    for (const auto& c : cases) ids.push_back(c.case_id);
    litpipe::ResponseMatrix m(ids, models);
    for (const auto& c : cases) {
        for (const auto& model : models) {
            litpipe::ModelResponse r;
            r.case_id = c.case_id;
            r.model_id = model;
            r.text = "answer " + std::to_string(std::hash<std::string>{}(c.case_id + "/" + model) % 100000);
            m.insert(r);
        }
    }
    return m;
}

inline litpipe::EvaluationSession make_session(std::size_t n_cases, const std::vector<std::string>& models,
                                               std::vector<std::string> evaluator_ids, std::uint64_t seed = 9) {
    auto cases = prompt_cases(n_cases);
    std::vector<litpipe::Evaluator> evs;
    for (auto& id : evaluator_ids) evs.push_back({id, litpipe::EvaluatorKind::human});
    return litpipe::create_session(cases, full_matrix(cases, models), models, seed, evs);
}

// Translates per-model ranks and grades to the case's labels and records them.
inline void judge_by_model(litpipe::EvaluationSession& s, const std::string& evaluator,
                           const std::string& case_id, const std::map<std::string, int>& model_ranks,
                           const std::map<std::string, litpipe::Grade>& model_grades) {
    const auto& order = s.label_to_model.at(case_id);
    std::map<std::string, int> ranks;
    std::map<std::string, litpipe::Grade> grades;
    for (std::size_t i = 0; i < order.size(); ++i) {
        std::string label(1, static_cast<char>('A' + i));
        ranks[label] = model_ranks.at(order[i]);
        grades[label] = model_grades.at(order[i]);
    }
    litpipe::record_judgment(s, evaluator, case_id, ranks, grades);
}

}  // namespace testutil
