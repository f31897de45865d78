#include "litpipe/eval_session.hpp"

#include <algorithm>
#include <cctype>

#include "litpipe/digest.hpp"
#include "litpipe/ranking.hpp"

namespace litpipe {

using nlohmann::json;
using nlohmann::ordered_json;

const char* grade_name(Grade g) {
    switch (g) {
        case Grade::Fail: return "Fail";
        case Grade::Pass: return "Pass";
        case Grade::Excellent: return "Excellent";
    }
    return "Fail";
}

std::optional<Grade> parse_grade(std::string_view name) {
    std::string lower;
    for (char c : name) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "fail") return Grade::Fail;
    if (lower == "pass") return Grade::Pass;
    if (lower == "excellent") return Grade::Excellent;
    return std::nullopt;
}

const char* evaluator_kind_name(EvaluatorKind k) { return k == EvaluatorKind::llm ? "llm" : "human"; }

EvaluatorKind parse_evaluator_kind(const std::string& name) {
    if (name == "human") return EvaluatorKind::human;
    if (name == "llm") return EvaluatorKind::llm;
    throw InvalidArgument("unknown evaluator kind '" + name + "' (expected human or llm)");
}

ordered_json BlindedCase::to_json() const {
    ordered_json j;
    j["case_id"] = case_id;
    j["instruction"] = instruction;
    j["input"] = input;
    j["responses"] = json::array();
    for (const auto& [label, text] : labeled_responses) {
        j["responses"].push_back({{"label", label}, {"text", text}});
    }
    return j;
}

BlindAssignment blind_case(const PromptCase& c, const std::map<std::string, std::string>& responses,
                           std::span<const std::string> model_ids, Rng& rng) {
    if (model_ids.empty()) throw InvalidArgument("blind_case: no models");
    for (const auto& m : model_ids) {
        if (!responses.contains(m)) {
            throw InvalidArgument("blind_case: case " + c.case_id + " has no response from model " + m);
        }
    }
    std::vector<std::string> order(model_ids.begin(), model_ids.end());
    rng.shuffle(std::span<std::string>(order));
    auto labels = blind_labels(order.size());

    BlindAssignment out;
    out.blinded.case_id = c.case_id;
    out.blinded.instruction = c.instruction;
    out.blinded.input = c.input;
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.blinded.labeled_responses.emplace_back(labels[i], responses.at(order[i]));
    }
    out.label_to_model = std::move(order);
    return out;
}

const Evaluator* EvaluationSession::find_evaluator(const std::string& id) const {
    for (const auto& e : evaluators) {
        if (e.id == id) return &e;
    }
    return nullptr;
}

std::vector<std::pair<std::string, std::string>> EvaluationSession::missing_judgments() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& e : evaluators) {
        for (const auto& c : cases) {
            if (!judgments.contains({e.id, c.case_id})) out.emplace_back(e.id, c.case_id);
        }
    }
    return out;
}

std::size_t EvaluationSession::judged_count(const std::string& evaluator_id) const {
    std::size_t n = 0;
    for (const auto& c : cases) n += judgments.contains({evaluator_id, c.case_id}) ? 1 : 0;
    return n;
}

const BlindedCase* EvaluationSession::next_case(const std::string& evaluator_id) const {
    for (const auto& c : cases) {
        if (!judgments.contains({evaluator_id, c.case_id})) return &blinded.at(c.case_id);
    }
    return nullptr;
}

EvaluationSession create_session(std::span<const PromptCase> cases, const ResponseMatrix& matrix,
                                 std::span<const std::string> model_ids, std::uint64_t blind_seed,
                                 std::vector<Evaluator> evaluators, std::string session_id) {
    if (cases.empty()) throw InvalidArgument("create_session: no cases");
    if (model_ids.empty()) throw InvalidArgument("create_session: no models");
    {
        std::vector<std::string> sorted(model_ids.begin(), model_ids.end());
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw InvalidArgument("create_session: duplicate model id");
        }
    }
    std::vector<std::string> missing;
    for (const auto& c : cases) {
        for (const auto& m : model_ids) {
            if (!matrix.find(c.case_id, m)) missing.push_back("(" + c.case_id + ", " + m + ")");
        }
    }
    if (!missing.empty()) {
        std::string msg = "response matrix is incomplete; missing cells:";
        for (const auto& cell : missing) msg += " " + cell;
        throw InvalidArgument(msg);
    }

    EvaluationSession s;
    s.cases.assign(cases.begin(), cases.end());
    s.model_ids.assign(model_ids.begin(), model_ids.end());
    s.blind_seed = blind_seed;
    s.evaluators = std::move(evaluators);
    if (session_id.empty()) {
        std::string basis = std::to_string(blind_seed);
        for (const auto& c : cases) basis += "\n" + c.case_id;
        session_id = "s" + sha256_hex(basis).substr(0, 12);
    }
    s.session_id = std::move(session_id);

    Rng rng(blind_seed);
    for (const auto& c : cases) {
        if (s.blinded.contains(c.case_id)) {
            throw InvalidArgument("create_session: duplicate case id " + c.case_id);
        }
        std::map<std::string, std::string> responses;
        for (const auto& m : model_ids) responses[m] = matrix.find(c.case_id, m)->text;
        auto assignment = blind_case(c, responses, model_ids, rng);
        s.blinded[c.case_id] = std::move(assignment.blinded);
        s.label_to_model[c.case_id] = std::move(assignment.label_to_model);
    }
    return s;
}

void validate_judgment(const EvaluationSession& session, const Judgment& j) {
    if (session.status != SessionStatus::open) {
        throw SessionStateError("session " + session.session_id + " is complete; judgments are closed");
    }
    if (!session.find_evaluator(j.evaluator_id)) {
        throw JudgmentError("evaluator '" + j.evaluator_id + "' is not registered in this session");
    }
    if (!session.has_case(j.case_id)) {
        throw JudgmentError("case '" + j.case_id + "' is not part of this session");
    }
    const auto labels = blind_labels(session.k());
    for (const auto& [label, rank] : j.ranks) {
        if (std::find(labels.begin(), labels.end(), label) == labels.end()) {
            throw JudgmentError("unknown label '" + label + "' in ranks");
        }
    }
    for (const auto& [label, grade] : j.grades) {
        if (std::find(labels.begin(), labels.end(), label) == labels.end()) {
            throw JudgmentError("unknown label '" + label + "' in grades");
        }
    }
    std::vector<int> ranks;
    for (const auto& label : labels) {
        auto r = j.ranks.find(label);
        if (r == j.ranks.end()) throw JudgmentError("missing rank for label " + label);
        if (!j.grades.contains(label)) throw JudgmentError("missing grade for label " + label);
        ranks.push_back(r->second);
    }
    auto problem = competition_ranking_problem(ranks);
    if (!problem.empty()) throw JudgmentError(problem);
}

const Judgment& record_judgment(EvaluationSession& session, const std::string& evaluator_id,
                                const std::string& case_id, const std::map<std::string, int>& ranks,
                                const std::map<std::string, Grade>& grades) {
    Judgment j;
    j.evaluator_id = evaluator_id;
    j.case_id = case_id;
    j.ranks = ranks;
    j.grades = grades;
    validate_judgment(session, j);
    j.evaluator_kind = session.find_evaluator(evaluator_id)->kind;
    auto& slot = session.judgments[{evaluator_id, case_id}];
    slot = std::move(j);
    return slot;
}

void register_evaluator(EvaluationSession& session, Evaluator evaluator) {
    if (session.status != SessionStatus::open) {
        throw SessionStateError("cannot add evaluators to a complete session");
    }
    if (evaluator.id.empty()) throw InvalidArgument("evaluator id is empty");
    if (const auto* existing = session.find_evaluator(evaluator.id)) {
        if (existing->kind != evaluator.kind) {
            throw InvalidArgument("evaluator '" + evaluator.id + "' is registered with another kind");
        }
        return;
    }
    session.evaluators.push_back(std::move(evaluator));
}

void complete_session(EvaluationSession& session) {
    if (session.status == SessionStatus::complete) return;
    if (session.evaluators.empty()) throw SessionStateError("session has no registered evaluators");
    auto gaps = session.missing_judgments();
    if (!gaps.empty()) {
        std::string msg = std::to_string(gaps.size()) + " judgments missing:";
        for (const auto& [e, c] : gaps) msg += " (" + e + ", " + c + ")";
        throw SessionStateError(msg);
    }
    session.status = SessionStatus::complete;
}

std::map<std::string, std::map<std::string, std::string>> unblind(const EvaluationSession& session) {
    if (session.status != SessionStatus::complete) {
        throw SessionStateError("session " + session.session_id + " is still open; labels stay hidden");
    }
    std::map<std::string, std::map<std::string, std::string>> out;
    for (const auto& [case_id, models] : session.label_to_model) {
        auto labels = blind_labels(models.size());
        for (std::size_t i = 0; i < models.size(); ++i) out[case_id][labels[i]] = models[i];
    }
    return out;
}

json EvaluationSession::to_json() const {
    ordered_json j;
    j["session_id"] = session_id;
    j["status"] = status == SessionStatus::open ? "open" : "complete";
    j["blind_seed"] = blind_seed;
    j["model_ids"] = model_ids;
    j["evaluators"] = json::array();
    for (const auto& e : evaluators) {
        j["evaluators"].push_back({{"id", e.id}, {"kind", evaluator_kind_name(e.kind)}});
    }
    j["cases"] = json::array();
    for (const auto& c : cases) {
        ordered_json cj;
        cj["case_id"] = c.case_id;
        cj["instruction"] = c.instruction;
        cj["input"] = c.input;
        cj["labels"] = label_to_model.at(c.case_id);
        cj["responses"] = json::array();
        for (const auto& [label, text] : blinded.at(c.case_id).labeled_responses) {
            cj["responses"].push_back({{"label", label}, {"text", text}});
        }
        j["cases"].push_back(cj);
    }
    j["judgments"] = json::array();
    for (const auto& [key, jd] : judgments) {
        ordered_json o;
        o["evaluator_id"] = jd.evaluator_id;
        o["evaluator_kind"] = evaluator_kind_name(jd.evaluator_kind);
        o["case_id"] = jd.case_id;
        o["ranks"] = jd.ranks;
        ordered_json g = json::object();
        for (const auto& [label, grade] : jd.grades) g[label] = grade_name(grade);
        o["grades"] = g;
        j["judgments"].push_back(o);
    }
    return j;
}

EvaluationSession EvaluationSession::from_json(const json& j) {
    EvaluationSession s;
    try {
        s.session_id = j.at("session_id").get<std::string>();
        s.status = j.at("status").get<std::string>() == "complete" ? SessionStatus::complete
                                                                   : SessionStatus::open;
        s.blind_seed = j.at("blind_seed").get<std::uint64_t>();
        s.model_ids = j.at("model_ids").get<std::vector<std::string>>();
        for (const auto& e : j.at("evaluators")) {
            s.evaluators.push_back({e.at("id").get<std::string>(),
                                    parse_evaluator_kind(e.at("kind").get<std::string>())});
        }
        for (const auto& cj : j.at("cases")) {
            PromptCase c{cj.at("case_id").get<std::string>(), cj.at("instruction").get<std::string>(),
                         cj.value("input", std::string{})};
            BlindedCase b{c.case_id, c.instruction, c.input, {}};
            for (const auto& r : cj.at("responses")) {
                b.labeled_responses.emplace_back(r.at("label").get<std::string>(),
                                                 r.at("text").get<std::string>());
            }
            s.label_to_model[c.case_id] = cj.at("labels").get<std::vector<std::string>>();
            s.blinded[c.case_id] = std::move(b);
            s.cases.push_back(std::move(c));
        }
        for (const auto& o : j.at("judgments")) {
            Judgment jd;
            jd.evaluator_id = o.at("evaluator_id").get<std::string>();
            jd.evaluator_kind = parse_evaluator_kind(o.at("evaluator_kind").get<std::string>());
            jd.case_id = o.at("case_id").get<std::string>();
            jd.ranks = o.at("ranks").get<std::map<std::string, int>>();
            for (const auto& [label, g] : o.at("grades").items()) {
                auto grade = parse_grade(g.get<std::string>());
                if (!grade) throw Error("unknown grade in session file");
                jd.grades[label] = *grade;
            }
            s.judgments[{jd.evaluator_id, jd.case_id}] = std::move(jd);
        }
    } catch (const json::exception& e) {
        throw Error(std::string("malformed session file: ") + e.what());
    }
    return s;
}

}  // namespace litpipe
