#include "litpipe/eval_server.hpp"

#include <mutex>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "litpipe/ranking.hpp"
#include "litpipe/text.hpp"

namespace litpipe {

using nlohmann::json;
using nlohmann::ordered_json;

std::map<std::string, Rational> parse_weight_list(const std::string& text) {
    std::map<std::string, Rational> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto comma = text.find(',', pos);
        auto item = trim(std::string_view(text).substr(pos, comma == std::string::npos ? std::string::npos
                                                                                        : comma - pos));
        if (!item.empty()) {
            auto colon = item.rfind(':');
            if (colon == std::string_view::npos || colon == 0) {
                throw InvalidArgument("weight entry '" + std::string(item) + "' is not evaluator:weight");
            }
            out[std::string(item.substr(0, colon))] = parse_weight(std::string(item.substr(colon + 1)));
        }
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

EvalService::EvalService(std::optional<std::filesystem::path> state_dir) : state_dir_(std::move(state_dir)) {
    if (state_dir_) std::filesystem::create_directories(*state_dir_);
}

std::size_t EvalService::load_state() {
    if (!state_dir_) return 0;
    std::unique_lock lock(mu_);
    std::size_t n = 0;
    for (const auto& entry : std::filesystem::directory_iterator(*state_dir_)) {
        if (entry.path().extension() != ".json") continue;
        json j = json::parse(read_file(entry.path().string()), nullptr, false);
        if (j.is_discarded()) throw IoError(entry.path().string(), "not JSON");
        auto s = EvaluationSession::from_json(j);
        sessions_[s.session_id] = std::move(s);
        ++n;
    }
    return n;
}

void EvalService::persist(const EvaluationSession& s) const {
    if (!state_dir_) return;
    auto path = *state_dir_ / (s.session_id + ".json");
    auto tmp = path;
    tmp += ".tmp";
    write_file(tmp.string(), s.to_json().dump(2) + "\n");
    std::filesystem::rename(tmp, path);
}

EvaluationSession& EvalService::get(const std::string& id) {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw SessionNotFound("no session '" + id + "'");
    return it->second;
}

const EvaluationSession& EvalService::get(const std::string& id) const {
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw SessionNotFound("no session '" + id + "'");
    return it->second;
}

std::string EvalService::add(EvaluationSession session) {
    std::unique_lock lock(mu_);
    if (sessions_.contains(session.session_id)) {
        throw InvalidArgument("session '" + session.session_id + "' already exists");
    }
    persist(session);
    auto id = session.session_id;
    sessions_.emplace(id, std::move(session));
    return id;
}

std::string EvalService::create(const json& body) {
    std::vector<PromptCase> cases;
    std::vector<std::string> model_ids;
    std::vector<Evaluator> evaluators;
    std::uint64_t seed = 0;
    std::string session_id;
    ResponseMatrix matrix;
    try {
        for (const auto& c : body.at("cases")) {
            cases.push_back({c.at("case_id").get<std::string>(), c.at("instruction").get<std::string>(),
                             c.value("input", std::string{})});
        }
        model_ids = body.at("model_ids").get<std::vector<std::string>>();
        seed = body.value("blind_seed", std::uint64_t{0});
        session_id = body.value("session_id", std::string{});
        if (auto e = body.find("evaluators"); e != body.end()) {
            for (const auto& ev : *e) {
                if (ev.is_string()) {
                    evaluators.push_back({ev.get<std::string>(), EvaluatorKind::human});
                } else {
                    evaluators.push_back({ev.at("id").get<std::string>(),
                                          parse_evaluator_kind(ev.value("kind", std::string("human")))});
                }
            }
        }
        std::vector<std::string> case_ids;
        for (const auto& c : cases) case_ids.push_back(c.case_id);
        matrix = ResponseMatrix(case_ids, model_ids);
        for (const auto& r : body.at("responses")) {
            ModelResponse resp;
            resp.case_id = r.at("case_id").get<std::string>();
            resp.model_id = r.at("model_id").get<std::string>();
            resp.text = r.at("text").get<std::string>();
            matrix.insert(std::move(resp));
        }
    } catch (const json::exception& e) {
        throw InvalidArgument(std::string("malformed session request: ") + e.what());
    }
    return add(create_session(cases, matrix, model_ids, seed, std::move(evaluators), session_id));
}

EvaluationSession EvalService::snapshot(const std::string& session_id) const {
    std::shared_lock lock(mu_);
    return get(session_id);
}

void EvalService::register_evaluator(const std::string& session_id, Evaluator evaluator) {
    std::unique_lock lock(mu_);
    auto& s = get(session_id);
    litpipe::register_evaluator(s, std::move(evaluator));
    persist(s);
}

std::optional<BlindedCase> EvalService::next_case(const std::string& session_id, const std::string& evaluator_id,
                                                  std::size_t* judged, std::size_t* total) const {
    std::shared_lock lock(mu_);
    const auto& s = get(session_id);
    if (!s.find_evaluator(evaluator_id)) {
        throw JudgmentError("evaluator '" + evaluator_id + "' is not registered in this session");
    }
    if (judged) *judged = s.judged_count(evaluator_id);
    if (total) *total = s.cases.size();
    if (s.status != SessionStatus::open) return std::nullopt;
    const auto* c = s.next_case(evaluator_id);
    if (!c) return std::nullopt;
    return *c;
}

void EvalService::submit(const std::string& session_id, const std::string& evaluator_id, const std::string& case_id,
                         const std::map<std::string, int>& ranks, const std::map<std::string, Grade>& grades) {
    std::unique_lock lock(mu_);
    auto& s = get(session_id);
    record_judgment(s, evaluator_id, case_id, ranks, grades);
    persist(s);
}

void EvalService::complete(const std::string& session_id) {
    std::unique_lock lock(mu_);
    auto& s = get(session_id);
    complete_session(s);
    persist(s);
}

AggregateReport EvalService::report(const std::string& session_id, const std::map<std::string, Rational>& weights,
                                    const std::optional<std::string>& reference) const {
    std::shared_lock lock(mu_);
    return aggregate_report(get(session_id), weights, reference);
}

std::map<std::string, std::map<std::string, std::string>> EvalService::unblind(const std::string& session_id) const {
    std::shared_lock lock(mu_);
    return litpipe::unblind(get(session_id));
}

// --- HTTP ---

struct EvalServer::Impl {
    std::shared_ptr<EvalService> service;
    EvalServerOptions options;
    httplib::Server server;
    std::thread thread;
    int port = 0;
};

namespace {

void send_json(httplib::Response& res, int status, const ordered_json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

// Error bodies carry only the message; messages never name models while a
// session is open.
template <typename Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const SessionNotFound& e) {
        send_json(res, 404, {{"error", e.what()}});
    } catch (const SessionStateError& e) {
        send_json(res, 409, {{"error", e.what()}});
    } catch (const InvalidArgument& e) {
        send_json(res, 400, {{"error", e.what()}});
    } catch (const std::exception& e) {
        spdlog::error("eval server: {}", e.what());
        send_json(res, 500, {{"error", "internal error"}});
    }
}

json parse_body(const httplib::Request& req) {
    json j = json::parse(req.body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw InvalidArgument("request body must be a JSON object");
    return j;
}

ordered_json status_json(const EvaluationSession& s) {
    ordered_json j;
    j["session_id"] = s.session_id;
    j["status"] = s.status == SessionStatus::open ? "open" : "complete";
    j["cases"] = s.cases.size();
    j["k"] = s.k();
    j["labels"] = blind_labels(s.k());
    ordered_json progress = ordered_json::object();
    for (const auto& e : s.evaluators) progress[e.id] = s.judged_count(e.id);
    j["progress"] = progress;
    return j;
}

}  // namespace

EvalServer::EvalServer(std::shared_ptr<EvalService> service, EvalServerOptions options)
    : impl_(std::make_unique<Impl>()) {
    impl_->service = std::move(service);
    impl_->options = std::move(options);
    auto& srv = impl_->server;
    auto* impl = impl_.get();

    srv.Post("/sessions", [impl](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto id = impl->service->create(parse_body(req));
            send_json(res, 201, status_json(impl->service->snapshot(id)));
        });
    });

    srv.Get(R"(/sessions/([^/]+))", [impl](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, status_json(impl->service->snapshot(req.matches[1]))); });
    });

    srv.Post(R"(/sessions/([^/]+)/evaluators)", [impl](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto body = parse_body(req);
            if (!body.contains("id") || !body["id"].is_string()) throw InvalidArgument("evaluator id required");
            impl->service->register_evaluator(
                req.matches[1], {body["id"].get<std::string>(),
                                 parse_evaluator_kind(body.value("kind", std::string("human")))});
            send_json(res, 200, status_json(impl->service->snapshot(req.matches[1])));
        });
    });

    srv.Get(R"(/sessions/([^/]+)/cases/next)", [impl](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto evaluator = req.get_param_value("evaluator");
            if (evaluator.empty()) throw InvalidArgument("evaluator query parameter required");
            std::size_t judged = 0, total = 0;
            auto c = impl->service->next_case(req.matches[1], evaluator, &judged, &total);
            ordered_json j;
            j["done"] = !c.has_value();
            j["progress"] = {{"judged", judged}, {"total", total}};
            if (c) j["case"] = c->to_json();
            send_json(res, 200, j);
        });
    });

    srv.Post(R"(/sessions/([^/]+)/judgments)", [impl](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto body = parse_body(req);
            std::string evaluator = body.value("evaluator", body.value("evaluator_id", std::string{}));
            if (evaluator.empty()) throw JudgmentError("evaluator required");
            if (!body.contains("case_id") || !body["case_id"].is_string()) throw JudgmentError("case_id required");
            if (!body.contains("ranks") || !body["ranks"].is_object()) throw JudgmentError("ranks object required");
            if (!body.contains("grades") || !body["grades"].is_object()) {
                throw JudgmentError("grades object required");
            }
            std::map<std::string, int> ranks;
            for (const auto& [label, v] : body["ranks"].items()) {
                if (!v.is_number_integer()) throw JudgmentError("rank for label " + label + " must be an integer");
                ranks[label] = v.get<int>();
            }
            std::map<std::string, Grade> grades;
            for (const auto& [label, v] : body["grades"].items()) {
                auto g = v.is_string() ? parse_grade(v.get<std::string>()) : std::nullopt;
                if (!g) throw JudgmentError("grade for label " + label + " must be Fail, Pass or Excellent");
                grades[label] = *g;
            }
            auto case_id = body["case_id"].get<std::string>();
            impl->service->submit(req.matches[1], evaluator, case_id, ranks, grades);
            std::size_t judged = 0, total = 0;
            impl->service->next_case(req.matches[1], evaluator, &judged, &total);
            send_json(res, 200, {{"accepted", true},
                                 {"case_id", case_id},
                                 {"progress", {{"judged", judged}, {"total", total}}}});
        });
    });

    srv.Post(R"(/sessions/([^/]+)/complete)", [impl](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            impl->service->complete(req.matches[1]);
            send_json(res, 200, status_json(impl->service->snapshot(req.matches[1])));
        });
    });

    srv.Get(R"(/sessions/([^/]+)/report)", [impl](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            auto weights = impl->options.weights;
            if (req.has_param("weights")) weights = parse_weight_list(req.get_param_value("weights"));
            auto reference = impl->options.reference_model;
            if (req.has_param("reference")) reference = req.get_param_value("reference");
            send_json(res, 200, impl->service->report(req.matches[1], weights, reference).to_json());
        });
    });

    srv.Get(R"(/sessions/([^/]+)/unblind)", [impl](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            ordered_json j = ordered_json::object();
            for (const auto& [case_id, labels] : impl->service->unblind(req.matches[1])) j[case_id] = labels;
            send_json(res, 200, j);
        });
    });

    if (impl_->options.ui_dir) {
        if (!srv.set_mount_point("/", impl_->options.ui_dir->string())) {
            throw IoError(impl_->options.ui_dir->string(), "UI directory not found");
        }
    }
}

EvalServer::~EvalServer() { stop(); }

int EvalServer::start() {
    auto& o = impl_->options;
    if (o.port == 0) {
        impl_->port = impl_->server.bind_to_any_port(o.host);
    } else {
        impl_->port = impl_->server.bind_to_port(o.host, o.port) ? o.port : -1;
    }
    if (impl_->port < 0) throw Error("eval server: cannot bind " + o.host + ":" + std::to_string(o.port));
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->port;
}

void EvalServer::serve_forever() {
    impl_->port = impl_->options.port;
    if (!impl_->server.listen(impl_->options.host, impl_->options.port)) {
        throw Error("eval server: cannot listen on " + impl_->options.host + ":" +
                    std::to_string(impl_->options.port));
    }
}

void EvalServer::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

std::string EvalServer::base_url() const {
    return "http://" + impl_->options.host + ":" + std::to_string(impl_->port);
}

}  // namespace litpipe
