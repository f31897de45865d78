#include "litpipe/chat_backend.hpp"

#include <cstdlib>
#include <random>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "litpipe/mock_backend.hpp"

namespace litpipe {

using nlohmann::json;
using nlohmann::ordered_json;

void ChatBackendConfig::validate() const {
    if (base_url.empty()) throw InvalidArgument("backend base_url is empty");
    if (!(timeout_seconds > 0.0)) throw InvalidArgument("backend timeout must be positive");
    if (max_retries < 0) throw InvalidArgument("backend max_retries must be >= 0");
    if (parallelism < 1) throw InvalidArgument("backend parallelism must be >= 1");
}

ordered_json request_to_json(const ChatRequest& request) {
    ordered_json j;
    j["model"] = request.model;
    j["messages"] = json::array();
    for (const auto& m : request.messages) {
        ordered_json msg;
        msg["role"] = m.role;
        msg["content"] = m.content;
        j["messages"].push_back(msg);
    }
    for (const auto& [key, value] : request.params.items()) j[key] = value;
    return j;
}

ChatRequest request_from_json(const json& body) {
    ChatRequest r;
    if (!body.is_object()) throw InvalidArgument("chat request body must be an object");
    r.model = body.value("model", std::string{});
    auto msgs = body.find("messages");
    if (msgs == body.end() || !msgs->is_array()) {
        throw InvalidArgument("chat request needs a messages array");
    }
    for (const auto& m : *msgs) {
        if (!m.is_object() || !m.contains("role") || !m.contains("content") ||
            !m["role"].is_string() || !m["content"].is_string()) {
            throw InvalidArgument("chat message needs string role and content");
        }
        r.messages.push_back({m["role"].get<std::string>(), m["content"].get<std::string>()});
    }
    for (const auto& [key, value] : body.items()) {
        if (key != "model" && key != "messages") r.params[key] = value;
    }
    return r;
}

ordered_json completion_json(const std::string& model, const std::string& content) {
    ordered_json j;
    j["object"] = "chat.completion";
    j["model"] = model;
    ordered_json choice;
    choice["index"] = 0;
    choice["message"] = {{"role", "assistant"}, {"content", content}};
    choice["finish_reason"] = "stop";
    j["choices"] = json::array({choice});
    return j;
}

HttpChatBackend::HttpChatBackend(ChatBackendConfig config) : config_(std::move(config)) {
    config_.validate();
    const auto& url = config_.base_url;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw InvalidArgument("backend base_url must start with http:// or https://");
    }
    auto path_start = url.find('/', scheme_end + 3);
    scheme_host_port_ = url.substr(0, path_start);
    path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::string HttpChatBackend::complete(const ChatRequest& request) {
    httplib::Client client(scheme_host_port_);
    auto secs = static_cast<time_t>(config_.timeout_seconds);
    auto usecs = static_cast<time_t>((config_.timeout_seconds - static_cast<double>(secs)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (key == nullptr || *key == '\0') {
            throw BackendError(BackendError::Kind::config,
                               "environment variable " + config_.api_key_env + " is not set");
        }
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    auto body = request_to_json(request).dump(-1, ' ', false, json::error_handler_t::replace);
    auto res = client.Post(path_prefix_ + "/chat/completions", headers, body, "application/json");
    if (!res) {
        throw BackendError(BackendError::Kind::transport,
                           "request to " + scheme_host_port_ + " failed: " +
                               httplib::to_string(res.error()));
    }
    if (res->status == 429) {
        throw BackendError(BackendError::Kind::rate_limited, "rate limited (HTTP 429)");
    }
    if (res->status >= 500) {
        throw BackendError(BackendError::Kind::server,
                           "server error (HTTP " + std::to_string(res->status) + ")");
    }
    if (res->status >= 400) {
        throw BackendError(BackendError::Kind::client,
                           "request rejected (HTTP " + std::to_string(res->status) + ")");
    }
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded()) {
        throw BackendError(BackendError::Kind::malformed, "response body is not JSON");
    }
    try {
        const auto& content = reply.at("choices").at(0).at("message").at("content");
        if (!content.is_string()) throw std::runtime_error("content is not a string");
        return content.get<std::string>();
    } catch (const std::exception&) {
        throw BackendError(BackendError::Kind::malformed,
                           "response lacks choices[0].message.content");
    }
}

MockOptions parse_mock_url(const std::string& url) {
    MockOptions o;
    auto q = url.find('?');
    if (q == std::string::npos) return o;
    std::string_view rest(url);
    rest.remove_prefix(q + 1);
    while (!rest.empty()) {
        auto amp = rest.find('&');
        auto item = rest.substr(0, amp);
        rest = amp == std::string_view::npos ? std::string_view{} : rest.substr(amp + 1);
        auto eq = item.find('=');
        if (eq == std::string_view::npos) throw InvalidArgument("mock url option without value: " + std::string(item));
        auto key = item.substr(0, eq);
        std::string value(item.substr(eq + 1));
        double v = 0.0;
        try {
            std::size_t used = 0;
            v = std::stod(value, &used);
            if (used != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            throw InvalidArgument("mock url option " + std::string(key) + " is not a number");
        }
        if (v < 0.0 || v > 1.0) throw InvalidArgument("mock url option " + std::string(key) + " must be in [0, 1]");
        if (key == "out_of_window_rate") {
            o.out_of_window_rate = v;
        } else if (key == "malformed_rate") {
            o.malformed_rate = v;
        } else {
            throw InvalidArgument("unknown mock url option " + std::string(key));
        }
    }
    return o;
}

std::unique_ptr<ChatBackend> make_backend(const ChatBackendConfig& config) {
    config.validate();
    if (config.base_url.rfind("mock://", 0) == 0) return std::make_unique<MockChatBackend>(parse_mock_url(config.base_url));
    return std::make_unique<HttpChatBackend>(config);
}

std::string complete_with_retry(ChatBackend& backend, const ChatRequest& request,
                                const RetryPolicy& policy) {
    thread_local std::mt19937_64 jitter_rng{std::random_device{}()};
    for (int attempt = 0;; ++attempt) {
        try {
            return backend.complete(request);
        } catch (const BackendError& e) {
            if (!e.retryable() || attempt >= policy.max_retries) throw;
            auto cap = policy.base_delay.count() << std::min(attempt, 20);
            cap = std::min<long long>(cap, policy.max_delay.count());
            long long delay = 0;
            if (cap > 0) {
                delay = static_cast<long long>(jitter_rng() % static_cast<std::uint64_t>(cap + 1));
            }
            spdlog::debug("backend attempt {} failed ({}), retrying in {} ms", attempt + 1,
                          e.what(), delay);
            std::this_thread::sleep_for(std::chrono::milliseconds(delay));
        }
    }
}

}  // namespace litpipe
