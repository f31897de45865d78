#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "litpipe/chat_backend.hpp"
#include "litpipe/corpus.hpp"
#include "litpipe/task_store.hpp"

namespace litpipe {

struct WordWindow {
    std::size_t min_words = 250;
    std::size_t max_words = 300;

    bool contains(std::size_t n) const { return n >= min_words && n <= max_words; }
};

// Rejection reasons recorded by the parser and the synthesis loop.
namespace reject_reason {
inline constexpr const char* kMissingInstruction = "missing_instruction";
inline constexpr const char* kMissingInput = "missing_input";
inline constexpr const char* kMissingOutput = "missing_output";
inline constexpr const char* kEmptyInstruction = "empty_instruction";
inline constexpr const char* kEmptyOutput = "empty_output";
inline constexpr const char* kParseFailure = "parse_failure";
inline constexpr const char* kLengthOutOfWindow = "length_out_of_window";
inline constexpr const char* kNearDuplicate = "near_duplicate";
inline constexpr const char* kBackendError = "backend_error";
}  // namespace reject_reason

struct Rejection {
    std::string fragment;
    std::string reason;
    std::string detail;  // parser reason for parse_failure, error text for backend_error

    bool operator==(const Rejection&) const = default;
};

// Serializes one task in the three-header block format used both for the
// in-context examples and for the completions the model is asked to write.
std::string format_task_block(std::size_t number, const InstructionTriplet& t);

// Meta-prompt asking for n_requested new biomedical tasks whose inputs are
// "a {min}-{max} word abstract", with every seed shown as a numbered block.
std::string build_directed_prompt(std::span<const InstructionTriplet> seed_examples,
                                  std::size_t n_requested, WordWindow window);

struct ParsedTasks {
    std::vector<InstructionTriplet> triplets;  // origin = synthetic
    std::vector<Rejection> rejects;
};

// Splits raw completion text into "Task N" blocks, each carrying
// "### Instruction:", "### Input:" and "### Output:" sections. Blocks that
// lack a section are rejected with the matching missing_* reason.
ParsedTasks parse_generated_tasks(std::string_view raw);

struct SeedPair {
    std::string instruction;
    Document document;
};

struct ItemError {
    std::size_t index = 0;
    std::string message;
};

struct SeedOutputResult {
    std::vector<InstructionTriplet> triplets;  // origin = seed_handwritten, pair order
    std::vector<ItemError> errors;
};

// One pair per document; document j gets instruction j mod m.
std::vector<SeedPair> pair_instructions(std::span<const std::string> instructions,
                                        std::span<const Document> documents);

// One backend call per pair (up to config.parallelism in flight). Pairs
// that still fail after retries are listed in errors, never dropped silently.
SeedOutputResult generate_seed_outputs(std::span<const SeedPair> pairs, ChatBackend& backend,
                                       const ChatBackendConfig& config);

struct SynthesisOptions {
    WordWindow window;
    std::size_t in_context_seeds = 3;
    std::size_t tasks_per_request = 5;
    // Requests allowed before the run gives up; 0 picks
    // 4 * ceil(n_target / tasks_per_request) + 4.
    std::size_t request_budget = 0;
    double dedup_threshold = 0.7;
    double temperature = 1.0;
    double top_p = 1.0;
    std::size_t max_tokens = 3072;
};

struct SynthesisRun {
    std::uint64_t rng_seed = 0;
    std::size_t n_target = 0;
    std::vector<InstructionTriplet> accepted;
    std::vector<Rejection> rejected;
    std::size_t request_count = 0;
    std::size_t request_budget = 0;
    bool budget_exhausted = false;
};

// Self-instruct loop: sample in-context seeds, build the directed prompt,
// call the backend, parse, filter by word window and near-duplicate
// instructions, until n_target tasks are accepted or the budget runs out.
// Requests are planned from the seed alone and results are consumed in
// request order, so parallel runs match sequential ones.
SynthesisRun synthesize_batch(std::span<const InstructionTriplet> seed_pool, std::size_t n_target,
                              ChatBackend& backend, const ChatBackendConfig& config,
                              std::uint64_t rng_seed, const SynthesisOptions& options = {});

std::string synthesis_run_summary_json(const SynthesisRun& run);

}  // namespace litpipe
