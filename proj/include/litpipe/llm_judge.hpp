#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "litpipe/chat_backend.hpp"
#include "litpipe/eval_session.hpp"

namespace litpipe {

// Raised when the judge reply stays unparseable after the reprompt.
class JudgeReplyError : public Error {
public:
    JudgeReplyError(const std::string& what, std::string raw_reply)
        : Error(what), raw_reply_(std::move(raw_reply)) {}
    const std::string& raw_reply() const noexcept { return raw_reply_; }

private:
    std::string raw_reply_;
};

// Rubric text, then the case and one "[Response X]" ... "[End of Response X]"
// block per label, then the required reply format.
std::string build_judge_prompt(const BlindedCase& c, std::string_view rubric);

struct JudgeReply {
    std::map<std::string, int> ranks;
    std::map<std::string, Grade> grades;
};

// Extracts the first JSON object in reply and checks it covers exactly the
// given labels with a valid competition ranking. On failure returns nullopt
// and sets *problem.
std::optional<JudgeReply> parse_judge_reply(std::string_view reply, std::span<const std::string> labels,
                                            std::string* problem = nullptr);

struct JudgeConfig {
    std::string model_name = "mock";
    double temperature = 0.0;
    std::size_t max_tokens = 512;
    RetryPolicy retry{};
};

// Judges one case. One reprompt with a format reminder on a bad reply.
Judgment llm_judge(const EvaluationSession& session, const BlindedCase& c, ChatBackend& backend,
                   std::string_view rubric, const std::string& evaluator_id,
                   const JudgeConfig& config = {});

// Registers evaluator_id as an llm evaluator and records a judgment for every
// case it has not judged yet. Returns the number of judgments recorded.
std::size_t llm_judge_session(EvaluationSession& session, ChatBackend& backend, std::string_view rubric,
                              const std::string& evaluator_id, const JudgeConfig& config = {});

}  // namespace litpipe
