#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/rational.hpp>
#include <nlohmann/json.hpp>

#include "litpipe/eval_session.hpp"

namespace litpipe {

// Exact arithmetic keeps aggregates independent of evaluator order.
using Rational = boost::rational<std::int64_t>;

// Accepts "2", "1/3", "0.25". Must be positive.
Rational parse_weight(const std::string& text);
double to_double(const Rational& r);
std::string rational_string(const Rational& r);  // "1/3", or "2" when integral

struct ModelAggregate {
    std::string model_id;
    std::array<Rational, kGradeCount> grade_counts{};  // weighted mean of per-evaluator counts
    Rational mean_rank;                                // weighted mean over evaluators and cases
};

struct HeadToHead {
    std::string candidate;
    std::string reference;
    std::size_t wins = 0;
    std::size_t ties = 0;
    std::size_t losses = 0;
    std::size_t cases = 0;
    Rational preferred_or_tied;  // (wins + ties) / cases

    double preferred_or_tied_pct() const { return 100.0 * to_double(preferred_or_tied); }
};

struct AggregateReport {
    std::string session_id;
    std::size_t cases = 0;
    std::map<std::string, Rational> weights;  // normalized to sum 1
    std::vector<ModelAggregate> models;       // session model order
    std::vector<HeadToHead> head_to_head;     // every other model vs the reference

    const ModelAggregate* find(const std::string& model_id) const;
    nlohmann::ordered_json to_json() const;
};

// Requires a complete session. weights maps evaluator id to a positive weight;
// an empty map weights every evaluator equally, otherwise every evaluator
// must be listed. reference names the model the others are compared against
// case by case on weighted mean rank.
AggregateReport aggregate_report(const EvaluationSession& session,
                                 const std::map<std::string, Rational>& weights = {},
                                 const std::optional<std::string>& reference = std::nullopt);

HeadToHead head_to_head(const EvaluationSession& session, const std::map<std::string, Rational>& weights,
                        const std::string& candidate, const std::string& reference);

}  // namespace litpipe
