#include "litpipe/inference.hpp"

#include <chrono>
#include <mutex>
#include <set>

#include <spdlog/spdlog.h>

#include "litpipe/text.hpp"
#include "parallel.hpp"

namespace litpipe {

using nlohmann::json;
using nlohmann::ordered_json;

void InferenceConfig::validate() const {
    if (!(temperature >= 0.0)) throw InvalidArgument("temperature must be >= 0");
    if (!(top_p > 0.0 && top_p <= 1.0)) throw InvalidArgument("top_p must lie in (0, 1]");
    if (beams < 1) throw InvalidArgument("beams must be >= 1");
    if (max_tokens < 1) throw InvalidArgument("max_tokens must be >= 1");
}

ordered_json InferenceConfig::to_params() const {
    ordered_json j;
    j["temperature"] = temperature;
    j["top_p"] = top_p;
    j["max_tokens"] = max_tokens;
    j["top_k"] = top_k;
    j["num_beams"] = beams;
    return j;
}

InferenceConfig InferenceConfig::from_params(const json& params) {
    InferenceConfig c;
    c.temperature = params.value("temperature", c.temperature);
    c.top_p = params.value("top_p", c.top_p);
    c.max_tokens = params.value("max_tokens", c.max_tokens);
    c.top_k = params.value("top_k", c.top_k);
    c.beams = params.value("num_beams", c.beams);
    return c;
}

std::vector<PromptCase> parse_prompt_cases(std::string_view text) {
    std::vector<PromptCase> out;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw LineError(line_no, "malformed JSON object");
        PromptCase c;
        try {
            c.case_id = j.at("case_id").get<std::string>();
            c.instruction = j.at("instruction").get<std::string>();
            c.input = j.value("input", std::string{});
        } catch (const json::exception&) {
            throw LineError(line_no, "case needs string case_id and instruction");
        }
        if (trim(c.case_id).empty()) throw LineError(line_no, "empty case_id");
        if (trim(c.instruction).empty()) throw LineError(line_no, "empty instruction");
        if (!seen.insert(c.case_id).second) throw LineError(line_no, "duplicate case_id " + c.case_id);
        out.push_back(std::move(c));
    }
    return out;
}

std::vector<PromptCase> read_prompt_cases(const std::string& path) {
    return parse_prompt_cases(read_file(path));
}

const char* role_name(ModelRole r) { return r == ModelRole::reference ? "reference" : "candidate"; }

ModelRole parse_role(const std::string& name) {
    if (name == "candidate") return ModelRole::candidate;
    if (name == "reference") return ModelRole::reference;
    throw InvalidArgument("unknown model role '" + name + "' (expected candidate or reference)");
}

std::string render_prompt(const PromptCase& c) {
    if (c.input.empty()) {
        return "Below is an instruction that describes a task. Write a response that "
               "appropriately completes the request.\n\n### Instruction:\n" +
               c.instruction + "\n\n### Response:\n";
    }
    return "Below is an instruction that describes a task, paired with an input that provides "
           "further context. Write a response that appropriately completes the request.\n\n"
           "### Instruction:\n" +
           c.instruction + "\n\n### Input:\n" + c.input + "\n\n### Response:\n";
}

std::string reference_model_preamble() {
    return "Please respond to these instructions with a given input in a few sentences; assume "
           "that each question is independent of each other and answer each one individually.";
}

ChatRequest build_generation_request(const PromptCase& c, const std::string& model_name,
                                     ModelRole role, const InferenceConfig& config) {
    ChatRequest req;
    req.model = model_name;
    if (role == ModelRole::candidate) {
        req.messages = {{"user", render_prompt(c)}};
    } else {
        std::string user = c.instruction;
        if (!c.input.empty()) user += "\n\n" + c.input;
        req.messages = {{"system", reference_model_preamble()}, {"user", user}};
    }
    req.params = config.to_params();
    return req;
}

namespace {

void warn_beams_once(const InferenceConfig& config) {
    static std::once_flag flag;
    if (config.beams <= 1) return;
    std::call_once(flag, [] {
        spdlog::warn("num_beams is sent as an extension parameter; chat backends without beam "
                     "search ignore it");
    });
}

}  // namespace

ModelResponse generate_response(const PromptCase& c, ModelEndpoint& endpoint,
                                const InferenceConfig& config) {
    config.validate();
    warn_beams_once(config);
    if (!endpoint.client) endpoint.client = std::shared_ptr<ChatBackend>(make_backend(endpoint.backend));
    auto req = build_generation_request(c, endpoint.backend.model_name.empty() ? endpoint.model_id
                                                                              : endpoint.backend.model_name,
                                        endpoint.role, config);
    auto start = std::chrono::steady_clock::now();
    std::string text;
    try {
        text = complete_with_retry(*endpoint.client, req, RetryPolicy::from(endpoint.backend));
    } catch (const std::exception& e) {
        throw GenerationError(c.case_id, endpoint.model_id, e.what());
    }
    if (trim(text).empty()) throw GenerationError(c.case_id, endpoint.model_id, "empty response");
    ModelResponse r;
    r.case_id = c.case_id;
    r.model_id = endpoint.model_id;
    r.text = std::move(text);
    r.latency_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.config_used = InferenceConfig::from_params(req.params);
    return r;
}

ResponseMatrix::ResponseMatrix(std::vector<std::string> case_ids, std::vector<std::string> model_ids)
    : case_ids_(std::move(case_ids)), model_ids_(std::move(model_ids)) {}

void ResponseMatrix::insert(ModelResponse response) {
    CellKey key{response.case_id, response.model_id};
    failures_.erase(key);
    cells_.insert_or_assign(std::move(key), std::move(response));
}

void ResponseMatrix::record_failure(const std::string& case_id, const std::string& model_id,
                                    std::string error) {
    failures_[{case_id, model_id}] = std::move(error);
}

const ModelResponse* ResponseMatrix::find(const std::string& case_id,
                                          const std::string& model_id) const {
    auto it = cells_.find({case_id, model_id});
    return it == cells_.end() ? nullptr : &it->second;
}

std::vector<CellKey> ResponseMatrix::missing() const {
    std::vector<CellKey> out;
    for (const auto& c : case_ids_) {
        for (const auto& m : model_ids_) {
            if (!cells_.contains({c, m})) out.emplace_back(c, m);
        }
    }
    return out;
}

bool ResponseMatrix::complete() const { return missing().empty(); }

std::string ResponseMatrix::responses_jsonl() const {
    std::string out;
    for (const auto& c : case_ids_) {
        for (const auto& m : model_ids_) {
            const auto* r = find(c, m);
            if (!r) continue;
            ordered_json j;
            j["case_id"] = r->case_id;
            j["model_id"] = r->model_id;
            j["text"] = r->text;
            j["latency_seconds"] = r->latency_seconds;
            j["config"] = r->config_used.to_params();
            out += j.dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
        }
    }
    return out;
}

std::string ResponseMatrix::manifest_json(std::span<const ModelEndpoint> models) const {
    ordered_json j;
    j["cases"] = case_ids_;
    j["models"] = json::array();
    for (const auto& m : model_ids_) {
        ordered_json entry;
        entry["model_id"] = m;
        for (const auto& e : models) {
            if (e.model_id == m) entry["role"] = role_name(e.role);
        }
        j["models"].push_back(entry);
    }
    j["complete"] = complete();
    j["failures"] = json::array();
    for (const auto& [key, err] : failures_) {
        j["failures"].push_back({{"case_id", key.first}, {"model_id", key.second}, {"error", err}});
    }
    return j.dump(2);
}

ResponseMatrix ResponseMatrix::from_text(std::string_view responses_jsonl,
                                         std::string_view manifest_json) {
    json man = json::parse(manifest_json, nullptr, false);
    if (man.is_discarded() || !man.is_object()) throw Error("response manifest is not a JSON object");
    std::vector<std::string> cases;
    std::vector<std::string> models;
    try {
        cases = man.at("cases").get<std::vector<std::string>>();
        for (const auto& m : man.at("models")) models.push_back(m.at("model_id").get<std::string>());
    } catch (const json::exception&) {
        throw Error("response manifest needs cases and models[].model_id");
    }
    ResponseMatrix matrix(std::move(cases), std::move(models));
    if (auto f = man.find("failures"); f != man.end() && f->is_array()) {
        for (const auto& e : *f) {
            matrix.record_failure(e.value("case_id", ""), e.value("model_id", ""), e.value("error", ""));
        }
    }
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < responses_jsonl.size()) {
        auto nl = responses_jsonl.find('\n', pos);
        auto line = responses_jsonl.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                                             : nl - pos);
        pos = nl == std::string_view::npos ? responses_jsonl.size() : nl + 1;
        ++line_no;
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw LineError(line_no, "malformed response object");
        ModelResponse r;
        try {
            r.case_id = j.at("case_id").get<std::string>();
            r.model_id = j.at("model_id").get<std::string>();
            r.text = j.at("text").get<std::string>();
        } catch (const json::exception&) {
            throw LineError(line_no, "response needs case_id, model_id and text");
        }
        r.latency_seconds = j.value("latency_seconds", 0.0);
        if (auto c = j.find("config"); c != j.end()) r.config_used = InferenceConfig::from_params(*c);
        matrix.insert(std::move(r));
    }
    return matrix;
}

ResponseMatrix ResponseMatrix::load(const std::string& responses_path, const std::string& manifest_path) {
    return from_text(read_file(responses_path), read_file(manifest_path));
}

ResponseMatrix batch_generate(std::span<const PromptCase> cases, std::span<ModelEndpoint> models,
                              const InferenceConfig& config, std::size_t parallelism) {
    if (cases.empty()) throw InvalidArgument("batch_generate: no cases");
    if (models.empty()) throw InvalidArgument("batch_generate: no models");
    config.validate();
    std::vector<std::string> case_ids;
    for (const auto& c : cases) case_ids.push_back(c.case_id);
    std::vector<std::string> model_ids;
    for (auto& m : models) {
        model_ids.push_back(m.model_id);
        if (!m.client) m.client = std::shared_ptr<ChatBackend>(make_backend(m.backend));
    }
    ResponseMatrix matrix(case_ids, model_ids);

    const std::size_t cells = cases.size() * models.size();
    std::mutex mu;
    detail::parallel_for_each_index(cells, parallelism, [&](std::size_t i) {
        const auto& c = cases[i / models.size()];
        auto& m = models[i % models.size()];
        try {
            auto r = generate_response(c, m, config);
            std::lock_guard lock(mu);
            matrix.insert(std::move(r));
        } catch (const GenerationError& e) {
            std::lock_guard lock(mu);
            matrix.record_failure(e.case_id(), e.model_id(), e.what());
        }
    });
    return matrix;
}

}  // namespace litpipe
