#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "litpipe/aggregate.hpp"
#include "litpipe/eval_session.hpp"

namespace litpipe {

// Thread-safe registry of sessions. Writes take the lock exclusively, so
// a (evaluator, case) replacement is atomic and reports see a snapshot.
// With a state directory every mutation rewrites <dir>/<session_id>.json.
class EvalService {
public:
    explicit EvalService(std::optional<std::filesystem::path> state_dir = std::nullopt);

    // Loads every *.json session in the state directory; returns the count.
    std::size_t load_state();

    std::string add(EvaluationSession session);
    // Body: cases, responses (case_id, model_id, text), model_ids,
    // blind_seed, evaluators (ids or {id, kind}), optional session_id.
    std::string create(const nlohmann::json& body);

    EvaluationSession snapshot(const std::string& session_id) const;
    void register_evaluator(const std::string& session_id, Evaluator evaluator);
    std::optional<BlindedCase> next_case(const std::string& session_id, const std::string& evaluator_id,
                                         std::size_t* judged = nullptr, std::size_t* total = nullptr) const;
    void submit(const std::string& session_id, const std::string& evaluator_id, const std::string& case_id,
                const std::map<std::string, int>& ranks, const std::map<std::string, Grade>& grades);
    void complete(const std::string& session_id);
    AggregateReport report(const std::string& session_id, const std::map<std::string, Rational>& weights,
                           const std::optional<std::string>& reference) const;
    std::map<std::string, std::map<std::string, std::string>> unblind(const std::string& session_id) const;

private:
    EvaluationSession& get(const std::string& id);
    const EvaluationSession& get(const std::string& id) const;
    void persist(const EvaluationSession& s) const;

    std::optional<std::filesystem::path> state_dir_;
    mutable std::shared_mutex mu_;
    std::map<std::string, EvaluationSession> sessions_;
};

class SessionNotFound : public Error {
public:
    using Error::Error;
};

struct EvalServerOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port with start()
    std::optional<std::filesystem::path> ui_dir;  // static assets mounted at /
    std::optional<std::string> reference_model;   // default for /report
    std::map<std::string, Rational> weights;      // default for /report
};

// REST front end over an EvalService. While a session is open no response
// body carries model identifiers.
class EvalServer {
public:
    EvalServer(std::shared_ptr<EvalService> service, EvalServerOptions options);
    ~EvalServer();
    EvalServer(const EvalServer&) = delete;
    EvalServer& operator=(const EvalServer&) = delete;

    int start();  // background thread; returns the bound port
    void serve_forever();
    void stop();
    std::string base_url() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// "e1:1,e2:1/3" -> weights
std::map<std::string, Rational> parse_weight_list(const std::string& text);

}  // namespace litpipe
