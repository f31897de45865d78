#include "litpipe/llm_judge.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "litpipe/ranking.hpp"

namespace litpipe {

using nlohmann::json;

namespace {

std::string format_instructions(std::span<const std::string> labels) {
    std::string ranks, grades;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i) {
            ranks += ", ";
            grades += ", ";
        }
        ranks += "\"" + labels[i] + "\": <rank>";
        grades += "\"" + labels[i] + "\": \"<Fail|Pass|Excellent>\"";
    }
    return "Reply with a single JSON object and nothing else, in the form\n{\"ranks\": {" + ranks +
           "}, \"grades\": {" + grades + "}}\n";
}

std::vector<std::string> labels_of(const BlindedCase& c) {
    std::vector<std::string> out;
    for (const auto& [label, text] : c.labeled_responses) out.push_back(label);
    return out;
}

// Balanced-brace scan; string-aware so braces inside values do not count.
std::optional<std::string_view> first_json_object(std::string_view s) {
    auto start = s.find('{');
    while (start != std::string_view::npos) {
        int depth = 0;
        bool in_str = false, esc = false;
        for (std::size_t i = start; i < s.size(); ++i) {
            char ch = s[i];
            if (in_str) {
                if (esc) esc = false;
                else if (ch == '\\') esc = true;
                else if (ch == '"') in_str = false;
                continue;
            }
            if (ch == '"') in_str = true;
            else if (ch == '{') ++depth;
            else if (ch == '}' && --depth == 0) {
                auto cand = s.substr(start, i - start + 1);
                if (json::accept(cand)) return cand;
                break;
            }
        }
        start = s.find('{', start + 1);
    }
    return std::nullopt;
}

}  // namespace

std::string build_judge_prompt(const BlindedCase& c, std::string_view rubric) {
    std::string p(rubric);
    if (!p.empty() && p.back() != '\n') p += '\n';
    p += "\n### Instruction:\n" + c.instruction + "\n";
    if (!c.input.empty()) p += "\n### Input:\n" + c.input + "\n";
    for (const auto& [label, text] : c.labeled_responses) {
        p += "\n[Response " + label + "]\n" + text + "\n[End of Response " + label + "]\n";
    }
    p += "\n" + format_instructions(labels_of(c));
    return p;
}

std::optional<JudgeReply> parse_judge_reply(std::string_view reply, std::span<const std::string> labels,
                                            std::string* problem) {
    auto fail = [&](std::string why) -> std::optional<JudgeReply> {
        if (problem) *problem = std::move(why);
        return std::nullopt;
    };
    auto obj = first_json_object(reply);
    if (!obj) return fail("no JSON object found");
    json j = json::parse(*obj);
    if (!j.contains("ranks") || !j["ranks"].is_object()) return fail("missing \"ranks\" object");
    if (!j.contains("grades") || !j["grades"].is_object()) return fail("missing \"grades\" object");

    JudgeReply out;
    for (const auto& [label, v] : j["ranks"].items()) {
        if (!v.is_number_integer()) return fail("rank for " + label + " is not an integer");
        out.ranks[label] = v.get<int>();
    }
    for (const auto& [label, v] : j["grades"].items()) {
        if (!v.is_string()) return fail("grade for " + label + " is not a string");
        auto g = parse_grade(v.get<std::string>());
        if (!g) return fail("grade for " + label + " is not Fail, Pass or Excellent");
        out.grades[label] = *g;
    }
    if (out.ranks.size() != labels.size() || out.grades.size() != labels.size()) {
        return fail("expected exactly " + std::to_string(labels.size()) + " labels in ranks and grades");
    }
    std::vector<int> ranks;
    for (const auto& label : labels) {
        if (!out.ranks.contains(label) || !out.grades.contains(label)) return fail("label " + label + " missing");
        ranks.push_back(out.ranks.at(label));
    }
    if (auto why = competition_ranking_problem(ranks); !why.empty()) return fail(why);
    return out;
}

Judgment llm_judge(const EvaluationSession& session, const BlindedCase& c, ChatBackend& backend,
                   std::string_view rubric, const std::string& evaluator_id, const JudgeConfig& config) {
    if (!session.has_case(c.case_id)) throw InvalidArgument("case '" + c.case_id + "' is not part of this session");
    const auto labels = labels_of(c);
    ChatRequest req;
    req.model = config.model_name;
    req.messages.push_back({"user", build_judge_prompt(c, rubric)});
    req.params["temperature"] = config.temperature;
    req.params["max_tokens"] = config.max_tokens;

    std::string problem;
    std::string reply = complete_with_retry(backend, req, config.retry);
    auto parsed = parse_judge_reply(reply, labels, &problem);
    if (!parsed) {
        req.messages.push_back({"assistant", reply});
        req.messages.push_back({"user", "Your reply could not be used (" + problem + "). " +
                                            format_instructions(labels)});
        reply = complete_with_retry(backend, req, config.retry);
        parsed = parse_judge_reply(reply, labels, &problem);
        if (!parsed) {
            throw JudgeReplyError("judge reply for case " + c.case_id + " unparseable after reprompt: " + problem,
                                  reply);
        }
    }
    Judgment j;
    j.evaluator_id = evaluator_id;
    j.evaluator_kind = EvaluatorKind::llm;
    j.case_id = c.case_id;
    j.ranks = std::move(parsed->ranks);
    j.grades = std::move(parsed->grades);
    return j;
}

std::size_t llm_judge_session(EvaluationSession& session, ChatBackend& backend, std::string_view rubric,
                              const std::string& evaluator_id, const JudgeConfig& config) {
    register_evaluator(session, {evaluator_id, EvaluatorKind::llm});
    std::size_t n = 0;
    while (const BlindedCase* c = session.next_case(evaluator_id)) {
        auto j = llm_judge(session, *c, backend, rubric, evaluator_id, config);
        record_judgment(session, evaluator_id, j.case_id, j.ranks, j.grades);
        ++n;
    }
    return n;
}

}  // namespace litpipe
