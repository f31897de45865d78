#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "litpipe/inference.hpp"
#include "litpipe/rng.hpp"

namespace litpipe {

enum class Grade { Fail, Pass, Excellent };
inline constexpr std::size_t kGradeCount = 3;
const char* grade_name(Grade g);
// Case-insensitive.
std::optional<Grade> parse_grade(std::string_view name);

enum class EvaluatorKind { human, llm };
const char* evaluator_kind_name(EvaluatorKind k);
EvaluatorKind parse_evaluator_kind(const std::string& name);

struct Evaluator {
    std::string id;
    EvaluatorKind kind = EvaluatorKind::human;

    bool operator==(const Evaluator&) const = default;
};

// What a judge sees: no model identifiers, responses under labels A, B, ...
struct BlindedCase {
    std::string case_id;
    std::string instruction;
    std::string input;
    std::vector<std::pair<std::string, std::string>> labeled_responses;  // (label, text)

    bool operator==(const BlindedCase&) const = default;
    nlohmann::ordered_json to_json() const;
};

struct BlindAssignment {
    BlindedCase blinded;
    std::vector<std::string> label_to_model;  // index = label position
};

// Assigns the k responses to labels by a uniformly random permutation drawn
// from rng. Throws when a model in model_ids has no response.
BlindAssignment blind_case(const PromptCase& c, const std::map<std::string, std::string>& responses,
                           std::span<const std::string> model_ids, Rng& rng);

struct Judgment {
    std::string evaluator_id;
    EvaluatorKind evaluator_kind = EvaluatorKind::human;
    std::string case_id;
    std::map<std::string, int> ranks;     // label -> rank in [1, k]
    std::map<std::string, Grade> grades;  // label -> grade

    bool operator==(const Judgment&) const = default;
};

// Rejected judgment submissions. Messages name labels, never models.
class JudgmentError : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

// Session state transition or lookup failures (open vs complete, unknown ids).
class SessionStateError : public Error {
public:
    using Error::Error;
};

enum class SessionStatus { open, complete };

struct EvaluationSession {
    std::string session_id;
    std::vector<PromptCase> cases;
    std::vector<std::string> model_ids;
    std::uint64_t blind_seed = 0;
    std::vector<Evaluator> evaluators;
    std::map<std::string, BlindedCase> blinded;                       // by case_id
    std::map<std::string, std::vector<std::string>> label_to_model;   // by case_id
    std::map<std::pair<std::string, std::string>, Judgment> judgments;  // (evaluator, case)
    SessionStatus status = SessionStatus::open;

    std::size_t k() const { return model_ids.size(); }
    const Evaluator* find_evaluator(const std::string& id) const;
    bool has_case(const std::string& case_id) const { return blinded.contains(case_id); }

    // (evaluator, case) pairs still lacking a judgment.
    std::vector<std::pair<std::string, std::string>> missing_judgments() const;
    std::size_t judged_count(const std::string& evaluator_id) const;
    // First case, in session order, the evaluator has not judged.
    const BlindedCase* next_case(const std::string& evaluator_id) const;

    // Full state including the permutations; for disk, never for the API.
    nlohmann::json to_json() const;
    static EvaluationSession from_json(const nlohmann::json& j);
};

// One permutation per case, drawn in case order from Rng(blind_seed).
// Throws listing every missing (case, model) cell when the matrix is
// incomplete for cases x model_ids.
EvaluationSession create_session(std::span<const PromptCase> cases, const ResponseMatrix& matrix,
                                 std::span<const std::string> model_ids, std::uint64_t blind_seed,
                                 std::vector<Evaluator> evaluators, std::string session_id = {});

// Validates and stores a judgment, replacing any earlier one by the same
// evaluator for the same case.
const Judgment& record_judgment(EvaluationSession& session, const std::string& evaluator_id,
                                const std::string& case_id, const std::map<std::string, int>& ranks,
                                const std::map<std::string, Grade>& grades);

// Validation without storing; throws JudgmentError.
void validate_judgment(const EvaluationSession& session, const Judgment& judgment);

// Adds an evaluator to an open session; no-op when already registered.
void register_evaluator(EvaluationSession& session, Evaluator evaluator);

// Closes judging. Throws SessionStateError listing gaps when any registered
// evaluator has not judged every case.
void complete_session(EvaluationSession& session);

// case_id -> (label -> model_id). Only for complete sessions.
std::map<std::string, std::map<std::string, std::string>> unblind(const EvaluationSession& session);

}  // namespace litpipe
