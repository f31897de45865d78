#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "litpipe/chat_backend.hpp"

namespace litpipe {

struct MockOptions {
    // Fraction of synthesized task blocks whose input falls outside the
    // requested word window.
    double out_of_window_rate = 0.0;
    // Fraction of synthesized task blocks missing their output section.
    double malformed_rate = 0.0;
};

// Offline backend whose completion is a pure function of the SHA-256 of the
// request messages (plus the optional "seed" parameter). It recognizes three request kinds by their content:
//  - task synthesis prompts ("new tasks to write: N", "a MIN-MAX word
//    abstract") -> N task blocks in the three-header format;
//  - judge prompts ("[Response A]" blocks) -> a JSON object with a valid
//    competition ranking and grades for every label;
//  - anything else -> a few sentences of biomedical-sounding prose.
// The model name never influences or appears in the output.
class MockChatBackend : public ChatBackend {
public:
    explicit MockChatBackend(MockOptions options = {}) : options_(options) {}
    std::string complete(const ChatRequest& request) override;

private:
    MockOptions options_;
};

// Digest of the canonical message sequence that seeds the mock.
std::uint64_t mock_request_digest(const ChatRequest& request);

// Backend that delegates to a callable; handy for fault injection.
class FunctionBackend : public ChatBackend {
public:
    using Fn = std::function<std::string(const ChatRequest&)>;
    explicit FunctionBackend(Fn fn) : fn_(std::move(fn)) {}
    std::string complete(const ChatRequest& request) override { return fn_(request); }

private:
    Fn fn_;
};

// Serves POST /chat/completions and /v1/chat/completions backed by
// MockChatBackend. Request bodies are recorded for inspection.
class MockBackendServer {
public:
    explicit MockBackendServer(MockOptions options = {});
    ~MockBackendServer();
    MockBackendServer(const MockBackendServer&) = delete;
    MockBackendServer& operator=(const MockBackendServer&) = delete;

    // Binds (port 0 picks a free port) and serves on a background thread.
    int start(const std::string& host = "127.0.0.1", int port = 0);
    // Blocks the calling thread until stop() is called from elsewhere.
    void serve_forever(const std::string& host, int port);
    void stop();

    std::string base_url() const;
    std::vector<nlohmann::json> recorded_requests() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace litpipe
