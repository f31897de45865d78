#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "litpipe/chat_backend.hpp"

namespace litpipe {

// Decoding parameters sent with every candidate and reference request.
struct InferenceConfig {
    double temperature = 0.1;
    double top_p = 0.75;
    std::size_t top_k = 40;
    std::size_t beams = 4;
    std::size_t max_tokens = 128;

    bool operator==(const InferenceConfig&) const = default;

    void validate() const;
    // temperature, top_p, max_tokens, top_k, num_beams, in that order.
    nlohmann::ordered_json to_params() const;
    static InferenceConfig from_params(const nlohmann::json& params);
};

struct PromptCase {
    std::string case_id;
    std::string instruction;
    std::string input;

    bool operator==(const PromptCase&) const = default;
};

// JSONL with case_id, instruction and optional input; ids must be unique.
std::vector<PromptCase> read_prompt_cases(const std::string& path);
std::vector<PromptCase> parse_prompt_cases(std::string_view text);

enum class ModelRole { candidate, reference };
const char* role_name(ModelRole r);
ModelRole parse_role(const std::string& name);

// Instruction-tuning template the candidates were trained on. The input
// section is omitted when the case has no input.
std::string render_prompt(const PromptCase& c);

// System message sent to the reference chat model.
std::string reference_model_preamble();

// Candidates get the rendered template as a single user turn; the reference
// gets the preamble as system message and the raw instruction and input.
ChatRequest build_generation_request(const PromptCase& c, const std::string& model_name,
                                     ModelRole role, const InferenceConfig& config);

struct ModelEndpoint {
    std::string model_id;
    ModelRole role = ModelRole::candidate;
    ChatBackendConfig backend;
    std::shared_ptr<ChatBackend> client;  // built from backend when null
};

struct ModelResponse {
    std::string case_id;
    std::string model_id;
    std::string text;
    double latency_seconds = 0.0;
    InferenceConfig config_used;
};

class GenerationError : public Error {
public:
    GenerationError(std::string case_id, std::string model_id, const std::string& what)
        : Error("generation failed for case " + case_id + ", model " + model_id + ": " + what),
          case_id_(std::move(case_id)),
          model_id_(std::move(model_id)) {}
    const std::string& case_id() const noexcept { return case_id_; }
    const std::string& model_id() const noexcept { return model_id_; }

private:
    std::string case_id_;
    std::string model_id_;
};

ModelResponse generate_response(const PromptCase& c, ModelEndpoint& endpoint,
                                 const InferenceConfig& config = {});

using CellKey = std::pair<std::string, std::string>;  // (case_id, model_id)

// Responses keyed by (case, model) over declared case and model lists.
class ResponseMatrix {
public:
    ResponseMatrix() = default;
    ResponseMatrix(std::vector<std::string> case_ids, std::vector<std::string> model_ids);

    void insert(ModelResponse response);
    void record_failure(const std::string& case_id, const std::string& model_id, std::string error);

    const ModelResponse* find(const std::string& case_id, const std::string& model_id) const;
    bool complete() const;
    std::vector<CellKey> missing() const;

    const std::vector<std::string>& case_ids() const { return case_ids_; }
    const std::vector<std::string>& model_ids() const { return model_ids_; }
    const std::map<CellKey, ModelResponse>& cells() const { return cells_; }
    const std::map<CellKey, std::string>& failures() const { return failures_; }

    // One response object per line, in declared case-major order.
    std::string responses_jsonl() const;
    std::string manifest_json(std::span<const ModelEndpoint> models = {}) const;
    static ResponseMatrix load(const std::string& responses_path, const std::string& manifest_path);
    static ResponseMatrix from_text(std::string_view responses_jsonl, std::string_view manifest_json);

private:
    std::vector<std::string> case_ids_;
    std::vector<std::string> model_ids_;
    std::map<CellKey, ModelResponse> cells_;
    std::map<CellKey, std::string> failures_;
};

// Attempts every (case, model) cell with up to `parallelism` requests in
// flight. Failed cells stay as holes with their error recorded.
ResponseMatrix batch_generate(std::span<const PromptCase> cases, std::span<ModelEndpoint> models,
                              const InferenceConfig& config = {}, std::size_t parallelism = 1);

}  // namespace litpipe
