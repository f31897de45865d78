#include "litpipe/aggregate.hpp"

#include <algorithm>
#include <charconv>

#include "litpipe/ranking.hpp"

namespace litpipe {

namespace {

std::int64_t parse_int(std::string_view s, const std::string& whole) {
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || p != s.data() + s.size()) {
        throw InvalidArgument("malformed weight '" + whole + "'");
    }
    return v;
}

std::map<std::string, Rational> normalized_weights(const EvaluationSession& s,
                                                   const std::map<std::string, Rational>& weights) {
    std::map<std::string, Rational> raw;
    for (const auto& e : s.evaluators) {
        if (weights.empty()) {
            raw[e.id] = Rational(1);
            continue;
        }
        auto it = weights.find(e.id);
        if (it == weights.end()) throw InvalidArgument("no weight given for evaluator '" + e.id + "'");
        if (it->second <= 0) throw InvalidArgument("weight for evaluator '" + e.id + "' must be positive");
        raw[e.id] = it->second;
    }
    for (const auto& [id, w] : weights) {
        if (!s.find_evaluator(id)) throw InvalidArgument("weight given for unknown evaluator '" + id + "'");
    }
    Rational total(0);
    for (const auto& [id, w] : raw) total += w;
    for (auto& [id, w] : raw) w /= total;
    return raw;
}

// label holding model_id in a case
std::string label_of(const EvaluationSession& s, const std::string& case_id, const std::string& model_id) {
    const auto& models = s.label_to_model.at(case_id);
    auto labels = blind_labels(models.size());
    for (std::size_t i = 0; i < models.size(); ++i) {
        if (models[i] == model_id) return labels[i];
    }
    throw InvalidArgument("model '" + model_id + "' is not part of this session");
}

void require_complete(const EvaluationSession& s) {
    if (s.status != SessionStatus::complete) {
        throw SessionStateError("session " + s.session_id + " is still open");
    }
    if (!s.missing_judgments().empty()) {
        throw SessionStateError("session " + s.session_id + " has missing judgments");
    }
}

}  // namespace

Rational parse_weight(const std::string& text) {
    if (text.empty()) throw InvalidArgument("empty weight");
    Rational r;
    if (auto slash = text.find('/'); slash != std::string::npos) {
        auto den = parse_int(std::string_view(text).substr(slash + 1), text);
        if (den == 0) throw InvalidArgument("weight '" + text + "' divides by zero");
        r = Rational(parse_int(std::string_view(text).substr(0, slash), text), den);
    } else if (auto dot = text.find('.'); dot != std::string::npos) {
        auto frac = std::string_view(text).substr(dot + 1);
        if (frac.size() > 12) throw InvalidArgument("weight '" + text + "' has too many decimals");
        std::int64_t scale = 1;
        for (std::size_t i = 0; i < frac.size(); ++i) scale *= 10;
        auto whole = dot == 0 ? 0 : parse_int(std::string_view(text).substr(0, dot), text);
        auto part = frac.empty() ? 0 : parse_int(frac, text);
        r = Rational(whole * scale + part, scale);
    } else {
        r = Rational(parse_int(text, text));
    }
    if (r <= 0) throw InvalidArgument("weight '" + text + "' must be positive");
    return r;
}

double to_double(const Rational& r) {
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

std::string rational_string(const Rational& r) {
    if (r.denominator() == 1) return std::to_string(r.numerator());
    return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

const ModelAggregate* AggregateReport::find(const std::string& model_id) const {
    for (const auto& m : models) {
        if (m.model_id == model_id) return &m;
    }
    return nullptr;
}

HeadToHead head_to_head(const EvaluationSession& s, const std::map<std::string, Rational>& weights,
                        const std::string& candidate, const std::string& reference) {
    require_complete(s);
    auto w = normalized_weights(s, weights);
    HeadToHead h;
    h.candidate = candidate;
    h.reference = reference;
    for (const auto& c : s.cases) {
        auto lc = label_of(s, c.case_id, candidate);
        auto lr = label_of(s, c.case_id, reference);
        Rational rc(0), rr(0);
        for (const auto& e : s.evaluators) {
            const auto& j = s.judgments.at({e.id, c.case_id});
            rc += w.at(e.id) * j.ranks.at(lc);
            rr += w.at(e.id) * j.ranks.at(lr);
        }
        if (rc < rr) {
            ++h.wins;
        } else if (rc == rr) {
            ++h.ties;
        } else {
            ++h.losses;
        }
    }
    h.cases = s.cases.size();
    h.preferred_or_tied = Rational(static_cast<std::int64_t>(h.wins + h.ties),
                                   static_cast<std::int64_t>(h.cases));
    return h;
}

AggregateReport aggregate_report(const EvaluationSession& s, const std::map<std::string, Rational>& weights,
                                 const std::optional<std::string>& reference) {
    require_complete(s);
    AggregateReport rep;
    rep.session_id = s.session_id;
    rep.cases = s.cases.size();
    rep.weights = normalized_weights(s, weights);
    const auto n_cases = static_cast<std::int64_t>(s.cases.size());

    for (const auto& m : s.model_ids) {
        ModelAggregate agg;
        agg.model_id = m;
        for (const auto& e : s.evaluators) {
            std::array<std::int64_t, kGradeCount> counts{};
            std::int64_t rank_sum = 0;
            for (const auto& c : s.cases) {
                const auto& j = s.judgments.at({e.id, c.case_id});
                auto label = label_of(s, c.case_id, m);
                ++counts[static_cast<std::size_t>(j.grades.at(label))];
                rank_sum += j.ranks.at(label);
            }
            const auto& we = rep.weights.at(e.id);
            for (std::size_t g = 0; g < kGradeCount; ++g) agg.grade_counts[g] += we * counts[g];
            agg.mean_rank += we * Rational(rank_sum, n_cases);
        }
        rep.models.push_back(std::move(agg));
    }

    if (reference) {
        if (std::find(s.model_ids.begin(), s.model_ids.end(), *reference) == s.model_ids.end()) {
            throw InvalidArgument("reference model '" + *reference + "' is not part of this session");
        }
        for (const auto& m : s.model_ids) {
            if (m != *reference) rep.head_to_head.push_back(head_to_head(s, weights, m, *reference));
        }
    }
    return rep;
}

nlohmann::ordered_json AggregateReport::to_json() const {
    nlohmann::ordered_json j;
    j["session_id"] = session_id;
    j["cases"] = cases;
    j["weights"] = nlohmann::ordered_json::object();
    for (const auto& [id, w] : weights) j["weights"][id] = rational_string(w);
    j["models"] = nlohmann::ordered_json::array();
    for (const auto& m : models) {
        nlohmann::ordered_json mj;
        mj["model_id"] = m.model_id;
        nlohmann::ordered_json grades;
        for (std::size_t g = 0; g < kGradeCount; ++g) {
            grades[grade_name(static_cast<Grade>(g))] = to_double(m.grade_counts[g]);
        }
        mj["grades"] = grades;
        mj["mean_rank"] = to_double(m.mean_rank);
        mj["mean_rank_exact"] = rational_string(m.mean_rank);
        j["models"].push_back(mj);
    }
    j["head_to_head"] = nlohmann::ordered_json::array();
    for (const auto& h : head_to_head) {
        j["head_to_head"].push_back({{"candidate", h.candidate},
                                     {"reference", h.reference},
                                     {"wins", h.wins},
                                     {"ties", h.ties},
                                     {"losses", h.losses},
                                     {"cases", h.cases},
                                     {"preferred_or_tied_pct", h.preferred_or_tied_pct()}});
    }
    return j;
}

}  // namespace litpipe
