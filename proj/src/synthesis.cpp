#include "litpipe/synthesis.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <regex>

#include <nlohmann/json.hpp>

#include "litpipe/error.hpp"
#include "litpipe/rng.hpp"
#include "litpipe/similarity.hpp"
#include "litpipe/text.hpp"
#include "parallel.hpp"

namespace litpipe {

std::string format_task_block(std::size_t number, const InstructionTriplet& t) {
    std::string out = "Task " + std::to_string(number) + "\n";
    out += "### Instruction:\n" + std::string(trim(t.instruction)) + "\n";
    out += "### Input:\n" + std::string(trim(t.input)) + "\n";
    out += "### Output:\n" + std::string(trim(t.output)) + "\n";
    return out;
}

std::string build_directed_prompt(std::span<const InstructionTriplet> seed_examples,
                                  std::size_t n_requested, WordWindow window) {
    if (seed_examples.empty()) throw InvalidArgument("build_directed_prompt: no seed examples");
    if (n_requested < 1) throw InvalidArgument("build_directed_prompt: n_requested must be >= 1");
    const std::string length = std::to_string(window.min_words) + "-" +
                               std::to_string(window.max_words) + " word abstract";
    std::string p;
    p += "You are asked to come up with " + std::to_string(n_requested) +
         " diverse task instructions for an assistant that reads biomedical research "
         "literature. The tasks will be given to a language model and we will evaluate how "
         "well it completes them.\n\n";
    p += "Requirements:\n";
    p += "1. Every task must concern biomedical or clinical research, such as COVID-19 "
         "studies, epidemiology, immunology, virology, pharmacology or public health.\n";
    p += "2. Vary the verbs and wording so that the instructions are diverse.\n";
    p += "3. Mix task types: summarization, extraction of specific findings, identification "
         "of the study design or sample population, biological pathways, critique of methods, "
         "and explanation for non-specialists.\n";
    p += "4. Every task must have an input, and the input must be a " + length +
         " of a biomedical research paper covering background, methods, results and "
         "conclusions.\n";
    p += "5. The output must be an appropriate response to the instruction and input, "
         "written in a few sentences.\n";
    p += "6. Write each task as a numbered block in exactly the format of the examples: a "
         "\"Task N\" line followed by \"### Instruction:\", \"### Input:\" and "
         "\"### Output:\" sections.\n\n";
    p += "Examples:\n\n";
    for (std::size_t i = 0; i < seed_examples.size(); ++i) {
        p += format_task_block(i + 1, seed_examples[i]);
        p += "\n";
    }
    p += "Number of new tasks to write: " + std::to_string(n_requested) + "\n";
    return p;
}

namespace {

struct Section {
    std::optional<std::string> instruction;
    std::optional<std::string> input;
    std::optional<std::string> output;
};

const std::regex& task_line_re() {
    static const std::regex re(R"(^\s*Task\s+\d+\s*[:.]?\s*$)", std::regex::icase);
    return re;
}

const std::regex& header_re() {
    static const std::regex re(R"(^\s*###\s*(Instruction|Input|Output)\s*:?\s*(.*)$)",
                               std::regex::icase);
    return re;
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            lines.emplace_back(text.substr(pos));
            break;
        }
        std::string line(text.substr(pos, nl - pos));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        pos = nl + 1;
    }
    return lines;
}

void parse_block(const std::vector<std::string>& lines, ParsedTasks& out) {
    std::string raw;
    for (const auto& l : lines) raw += l + "\n";
    if (trim(raw).empty()) return;

    Section sec;
    std::optional<std::string>* current = nullptr;
    bool saw_header = false;
    for (const auto& line : lines) {
        std::smatch m;
        if (std::regex_match(line, m, header_re())) {
            saw_header = true;
            auto name = to_lower(m[1].str());
            std::optional<std::string>* target =
                name == "instruction" ? &sec.instruction
                : name == "input"     ? &sec.input
                                      : &sec.output;
            if (target->has_value()) {
                current = nullptr;  // repeated header: ignore the duplicate section
                continue;
            }
            *target = m[2].str();
            current = target;
            continue;
        }
        if (current != nullptr) {
            if (!(*current)->empty()) **current += "\n";
            **current += line;
        }
    }

    std::string fragment(trim(raw));
    if (!saw_header) {
        out.rejects.push_back({fragment, reject_reason::kParseFailure, {}});
        return;
    }
    if (!sec.instruction) return out.rejects.push_back({fragment, reject_reason::kMissingInstruction, {}});
    if (!sec.input) return out.rejects.push_back({fragment, reject_reason::kMissingInput, {}});
    if (!sec.output) return out.rejects.push_back({fragment, reject_reason::kMissingOutput, {}});
    InstructionTriplet t;
    t.instruction = std::string(trim(*sec.instruction));
    t.input = std::string(trim(*sec.input));
    t.output = std::string(trim(*sec.output));
    t.origin = Origin::synthetic;
    if (t.instruction.empty()) return out.rejects.push_back({fragment, reject_reason::kEmptyInstruction, {}});
    if (t.output.empty()) return out.rejects.push_back({fragment, reject_reason::kEmptyOutput, {}});
    out.triplets.push_back(std::move(t));
}

}  // namespace

ParsedTasks parse_generated_tasks(std::string_view raw) {
    ParsedTasks out;
    std::vector<std::string> block;
    for (auto& line : split_lines(raw)) {
        if (std::regex_match(line, task_line_re())) {
            parse_block(block, out);
            block.clear();
            continue;
        }
        block.push_back(std::move(line));
    }
    parse_block(block, out);
    return out;
}

std::vector<SeedPair> pair_instructions(std::span<const std::string> instructions,
                                        std::span<const Document> documents) {
    if (instructions.empty()) throw InvalidArgument("pair_instructions: no instructions");
    std::vector<SeedPair> pairs;
    pairs.reserve(documents.size());
    for (std::size_t j = 0; j < documents.size(); ++j) {
        pairs.push_back({instructions[j % instructions.size()], documents[j]});
    }
    return pairs;
}

SeedOutputResult generate_seed_outputs(std::span<const SeedPair> pairs, ChatBackend& backend,
                                       const ChatBackendConfig& config) {
    if (pairs.empty()) throw InvalidArgument("generate_seed_outputs: no instruction/abstract pairs");
    for (const auto& p : pairs) {
        if (trim(p.instruction).empty()) {
            throw InvalidArgument("generate_seed_outputs: empty instruction");
        }
    }
    config.validate();
    const auto policy = RetryPolicy::from(config);

    std::vector<std::optional<std::string>> outputs(pairs.size());
    std::vector<std::string> errors(pairs.size());
    detail::parallel_for_each_index(pairs.size(), config.parallelism, [&](std::size_t i) {
        ChatRequest req;
        req.model = config.model_name;
        req.messages = {
            {"system",
             "You are an assistant for biomedical researchers. Follow the instruction using "
             "only the abstract provided, and answer concisely."},
            {"user", "Instruction: " + pairs[i].instruction + "\n\nAbstract:\n" +
                         pairs[i].document.abstract}};
        req.params["temperature"] = 0.7;
        try {
            outputs[i] = complete_with_retry(backend, req, policy);
            if (trim(*outputs[i]).empty()) {
                outputs[i].reset();
                errors[i] = "backend returned an empty completion";
            }
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    SeedOutputResult out;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (!outputs[i]) {
            out.errors.push_back({i, errors[i]});
            continue;
        }
        out.triplets.push_back(InstructionTriplet{pairs[i].instruction, pairs[i].document.abstract,
                                                  std::string(trim(*outputs[i])),
                                                  Origin::seed_handwritten,
                                                  pairs[i].document.doc_id});
    }
    return out;
}

SynthesisRun synthesize_batch(std::span<const InstructionTriplet> seed_pool, std::size_t n_target,
                              ChatBackend& backend, const ChatBackendConfig& config,
                              std::uint64_t rng_seed, const SynthesisOptions& options) {
    if (seed_pool.empty()) throw InvalidArgument("synthesize_batch: seed pool is empty");
    if (n_target < 1) throw InvalidArgument("synthesize_batch: n_target must be >= 1");
    if (options.window.min_words > options.window.max_words) {
        throw InvalidArgument("synthesize_batch: word window is inverted");
    }
    if (options.tasks_per_request < 1 || options.in_context_seeds < 1) {
        throw InvalidArgument("synthesize_batch: tasks_per_request and in_context_seeds must be >= 1");
    }
    config.validate();

    SynthesisRun run;
    run.rng_seed = rng_seed;
    run.n_target = n_target;
    run.request_budget =
        options.request_budget > 0
            ? options.request_budget
            : 4 * ((n_target + options.tasks_per_request - 1) / options.tasks_per_request) + 4;

    const auto policy = RetryPolicy::from(config);
    const std::size_t in_context = std::min(options.in_context_seeds, seed_pool.size());
    Rng planner(rng_seed);
    NearDuplicateFilter filter(options.dedup_threshold);

    while (run.accepted.size() < n_target && run.request_count < run.request_budget) {
        const std::size_t round = std::min(config.parallelism, run.request_budget - run.request_count);

        std::vector<ChatRequest> requests(round);
        for (std::size_t r = 0; r < round; ++r) {
            std::vector<InstructionTriplet> shown;
            for (auto idx : planner.sample_indices(seed_pool.size(), in_context)) {
                shown.push_back(seed_pool[idx]);
            }
            auto& req = requests[r];
            req.model = config.model_name;
            req.messages = {{"user", build_directed_prompt(shown, options.tasks_per_request,
                                                           options.window)}};
            req.params["temperature"] = options.temperature;
            req.params["top_p"] = options.top_p;
            req.params["max_tokens"] = options.max_tokens;
            req.params["seed"] = mix_seed(rng_seed, run.request_count + r);
        }

        std::vector<std::optional<std::string>> replies(round);
        std::vector<std::string> errors(round);
        detail::parallel_for_each_index(round, config.parallelism, [&](std::size_t r) {
            try {
                replies[r] = complete_with_retry(backend, requests[r], policy);
            } catch (const std::exception& e) {
                errors[r] = e.what();
            }
        });
        run.request_count += round;

        for (std::size_t r = 0; r < round && run.accepted.size() < n_target; ++r) {
            if (!replies[r]) {
                run.rejected.push_back({"", reject_reason::kBackendError, errors[r]});
                continue;
            }
            auto parsed = parse_generated_tasks(*replies[r]);
            for (auto& rej : parsed.rejects) {
                run.rejected.push_back({std::move(rej.fragment), reject_reason::kParseFailure,
                                        std::move(rej.reason)});
            }
            for (auto& t : parsed.triplets) {
                if (run.accepted.size() >= n_target) break;
                const auto words = count_words(t.input);
                if (!options.window.contains(words)) {
                    run.rejected.push_back({format_task_block(1, t), reject_reason::kLengthOutOfWindow,
                                            std::to_string(words) + " words"});
                    continue;
                }
                if (!filter.offer(t.instruction)) {
                    run.rejected.push_back({format_task_block(1, t), reject_reason::kNearDuplicate, {}});
                    continue;
                }
                run.accepted.push_back(std::move(t));
            }
        }
    }
    run.budget_exhausted = run.accepted.size() < n_target;
    return run;
}

std::string synthesis_run_summary_json(const SynthesisRun& run) {
    nlohmann::ordered_json j;
    j["rng_seed"] = run.rng_seed;
    j["n_target"] = run.n_target;
    j["accepted"] = run.accepted.size();
    j["rejected"] = run.rejected.size();
    nlohmann::ordered_json reasons = nlohmann::ordered_json::object();
    std::map<std::string, std::size_t> counts;
    for (const auto& r : run.rejected) ++counts[r.reason];
    for (const auto& [k, v] : counts) reasons[k] = v;
    j["rejected_by_reason"] = reasons;
    j["request_count"] = run.request_count;
    j["request_budget"] = run.request_budget;
    j["budget_exhausted"] = run.budget_exhausted;
    return j.dump();
}

}  // namespace litpipe
