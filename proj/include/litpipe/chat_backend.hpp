#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "litpipe/error.hpp"

namespace litpipe {

// Endpoint settings for an OpenAI-compatible chat-completions service.
// base_url "mock://<name>" selects the in-process deterministic mock.
struct ChatBackendConfig {
    std::string base_url = "mock://default";
    std::string model_name = "mock";
    std::string api_key_env;  // name of the variable holding the key, never the key
    double timeout_seconds = 60.0;
    int max_retries = 3;
    std::size_t parallelism = 1;
    std::chrono::milliseconds retry_base_delay{500};

    void validate() const;
};

struct ChatMessage {
    std::string role;
    std::string content;

    bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    // Generation parameters copied verbatim into the request body
    // (temperature, top_p, max_tokens, top_k, num_beams, ...).
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
};

nlohmann::ordered_json request_to_json(const ChatRequest& request);
ChatRequest request_from_json(const nlohmann::json& body);

// Single-choice chat-completions response body.
nlohmann::ordered_json completion_json(const std::string& model, const std::string& content);

class BackendError : public Error {
public:
    enum class Kind { transport, rate_limited, server, client, malformed, config };

    BackendError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }
    // Transport faults, rate limits and 5xx are worth another attempt.
    bool retryable() const noexcept {
        return kind_ == Kind::transport || kind_ == Kind::rate_limited || kind_ == Kind::server;
    }

private:
    Kind kind_;
};

class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    // Returns the assistant message content or throws BackendError.
    virtual std::string complete(const ChatRequest& request) = 0;
};

// POSTs to {base_url}/chat/completions with a bearer token read from the
// configured environment variable.
class HttpChatBackend : public ChatBackend {
public:
    explicit HttpChatBackend(ChatBackendConfig config);
    std::string complete(const ChatRequest& request) override;

private:
    ChatBackendConfig config_;
    std::string scheme_host_port_;
    std::string path_prefix_;
};

// "mock://name?out_of_window_rate=0.2&malformed_rate=0.1" selects the mock
// with fault injection.
std::unique_ptr<ChatBackend> make_backend(const ChatBackendConfig& config);

struct RetryPolicy {
    int max_retries = 3;
    std::chrono::milliseconds base_delay{500};
    std::chrono::milliseconds max_delay{30000};

    static RetryPolicy from(const ChatBackendConfig& config) {
        return {config.max_retries, config.retry_base_delay, std::chrono::milliseconds{30000}};
    }
};

// Exponential backoff with full jitter; non-retryable errors propagate at
// once, the last retryable error after max_retries extra attempts.
std::string complete_with_retry(ChatBackend& backend, const ChatRequest& request,
                                const RetryPolicy& policy);

}  // namespace litpipe
