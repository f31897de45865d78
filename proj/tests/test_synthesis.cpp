#include <doctest.h>

#include <regex>

#include "litpipe/error.hpp"
#include "litpipe/mock_backend.hpp"
#include "litpipe/similarity.hpp"
#include "litpipe/synthesis.hpp"
#include "litpipe/text.hpp"
#include "test_util.hpp"

using namespace litpipe;
using testutil::triplet;

namespace {

std::vector<InstructionTriplet> seed_pool(std::size_t n) {
    std::vector<InstructionTriplet> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(triplet("Seed instruction number " + std::to_string(i),
                              testutil::words(260, "s" + std::to_string(i) + "_"), "Seed output " + std::to_string(i),
                              Origin::seed_handwritten));
    }
    return out;
}

}  // namespace

TEST_CASE("directed prompt carries seeds and window") {
    auto seeds = seed_pool(3);
    auto p = build_directed_prompt(seeds, 5, {250, 300});
    for (const auto& s : seeds) CHECK(p.find(format_task_block(1 + (&s - seeds.data()), s)) != std::string::npos);
    CHECK(p.find("250-300 word") != std::string::npos);
    CHECK(p == build_directed_prompt(seeds, 5, {250, 300}));
    CHECK_THROWS_AS(build_directed_prompt(std::vector<InstructionTriplet>{}, 5, {250, 300}), InvalidArgument);
}

TEST_CASE("parse two well-formed blocks") {
    std::string raw =
        "Task 1\n### Instruction:\nList the symptoms.\n### Input:\nFever and cough were common.\n"
        "### Output:\nFever, cough\n\nTask 2\n### Instruction:\nName the virus.\n### Input:\n"
        "SARS-CoV-2 was isolated.\n### Output:\nSARS-CoV-2\n";
    auto parsed = parse_generated_tasks(raw);
    REQUIRE(parsed.triplets.size() == 2);
    CHECK(parsed.rejects.empty());
    CHECK(parsed.triplets[0].instruction == "List the symptoms.");
    CHECK(parsed.triplets[0].input == "Fever and cough were common.");
    CHECK(parsed.triplets[1].output == "SARS-CoV-2");
    CHECK(parsed.triplets[1].origin == Origin::synthetic);
}

TEST_CASE("parse edge cases") {
    auto empty = parse_generated_tasks("");
    CHECK(empty.triplets.empty());
    CHECK(empty.rejects.empty());

    auto missing = parse_generated_tasks("Task 1\n### Instruction:\nDo it.\n### Input:\nText.\n");
    CHECK(missing.triplets.empty());
    REQUIRE(missing.rejects.size() == 1);
    CHECK(missing.rejects[0].reason == "missing_output");
}

TEST_CASE("seed outputs: 175 pairs on the mock") {
    auto docs = testutil::make_docs(175, 30);
    std::vector<std::string> instr{"Summarize the key findings.", "List the methods.", "State the study type."};
    auto pairs = pair_instructions(instr, docs);
    REQUIRE(pairs.size() == 175);
    CHECK(pairs[4].instruction == instr[1]);
    MockChatBackend mock;
    ChatBackendConfig cfg;
    cfg.parallelism = 4;
    auto res = generate_seed_outputs(pairs, mock, cfg);
    CHECK(res.triplets.size() == 175);
    CHECK(res.errors.empty());
    CHECK(res.triplets[10].source_doc_id == "d10");
}

TEST_CASE("seed outputs: canned echo and permanent failure of item 3") {
    auto docs = testutil::make_docs(175, 30);
    std::vector<std::string> instr{"Summarize."};
    auto pairs = pair_instructions(instr, docs);
    FunctionBackend canned([](const ChatRequest&) { return std::string("canned answer"); });
    ChatBackendConfig cfg;
    cfg.retry_base_delay = std::chrono::milliseconds(1);
    auto all = generate_seed_outputs(pairs, canned, cfg);
    for (const auto& t : all.triplets) CHECK(t.output == "canned answer");

    const std::string marker = docs[3].abstract;
    FunctionBackend faulty([&](const ChatRequest& r) -> std::string {
        if (r.messages.back().content.find(marker) != std::string::npos) {
            throw BackendError(BackendError::Kind::server, "item 3 down");
        }
        return "fine";
    });
    cfg.max_retries = 1;
    auto res = generate_seed_outputs(pairs, faulty, cfg);
    CHECK(res.triplets.size() == 174);
    REQUIRE(res.errors.size() == 1);
    CHECK(res.errors[0].index == 3);
}

TEST_CASE("synthesis loop reaches target within window and without near duplicates") {
    MockChatBackend mock;
    ChatBackendConfig cfg;
    auto seeds = seed_pool(12);
    auto run = synthesize_batch(seeds, 50, mock, cfg, 1234);
    CHECK(run.accepted.size() == 50);
    CHECK_FALSE(run.budget_exhausted);
    CHECK(run.request_count <= run.request_budget);
    for (const auto& t : run.accepted) CHECK(WordWindow{}.contains(count_words(t.input)));
    for (std::size_t i = 0; i < run.accepted.size(); ++i) {
        for (std::size_t j = i + 1; j < run.accepted.size(); ++j) {
            REQUIRE(token_jaccard(run.accepted[i].instruction, run.accepted[j].instruction) < 0.7);
        }
    }
    auto again = synthesize_batch(seeds, 50, mock, cfg, 1234);
    CHECK(again.accepted == run.accepted);
    CHECK(again.rejected == run.rejected);
    CHECK(again.request_count == run.request_count);
}

TEST_CASE("synthesis: parallel rounds match sequential") {
    MockChatBackend mock;
    ChatBackendConfig seq, par;
    par.parallelism = 4;
    auto seeds = seed_pool(6);
    auto a = synthesize_batch(seeds, 30, mock, seq, 77);
    auto b = synthesize_batch(seeds, 30, mock, par, 77);
    CHECK(a.accepted == b.accepted);
}

TEST_CASE("synthesis: 1097 accepted on the mock") {
    MockChatBackend mock;
    ChatBackendConfig cfg;
    cfg.parallelism = 4;
    auto run = synthesize_batch(seed_pool(18), 1097, mock, cfg, 2023);
    CHECK(run.accepted.size() == 1097);
    CHECK(run.request_count <= run.request_budget);
}

TEST_CASE("synthesis tolerates malformed and out-of-window blocks") {
    MockChatBackend noisy(MockOptions{0.3, 0.3});
    ChatBackendConfig cfg;
    auto run = synthesize_batch(seed_pool(6), 20, noisy, cfg, 5);
    CHECK(run.accepted.size() == 20);
    std::size_t parse = 0, window = 0;
    for (const auto& r : run.rejected) {
        parse += r.reason == "parse_failure";
        window += r.reason == "length_out_of_window";
    }
    CHECK(parse > 0);
    CHECK(window > 0);
    for (const auto& t : run.accepted) CHECK(WordWindow{}.contains(count_words(t.input)));
}

TEST_CASE("a 120-word input is rejected under the default window") {
    std::string reply = "Task 1\n### Instruction:\nDescribe the cohort.\n### Input:\n" + testutil::words(120) +
                        "\n### Output:\nAdults.\n";
    FunctionBackend fixed([&](const ChatRequest&) { return reply; });
    ChatBackendConfig cfg;
    SynthesisOptions opt;
    opt.request_budget = 2;
    auto run = synthesize_batch(seed_pool(3), 1, fixed, cfg, 1, opt);
    CHECK(run.accepted.empty());
    CHECK(run.budget_exhausted);
    CHECK(run.request_count == 2);
    REQUIRE(run.rejected.size() == 2);
    CHECK(run.rejected[0].reason == "length_out_of_window");
    CHECK(run.rejected[0].detail == "120 words");
}

TEST_CASE("one malformed block per call does not stop the run") {
    int call = 0;
    FunctionBackend backend([&](const ChatRequest&) {
        ++call;
        return "Task 1\n### Instruction:\nBroken block\n### Input:\nno output here\n\nTask 2\n### Instruction:\n"
               "Unique task " + testutil::words(3, "u" + std::to_string(call)) + "\n### Input:\n" +
               testutil::words(260) + "\n### Output:\nok\n";
    });
    ChatBackendConfig cfg;
    auto run = synthesize_batch(seed_pool(3), 5, backend, cfg, 1);
    CHECK(run.accepted.size() == 5);
    std::size_t parse = 0;
    for (const auto& r : run.rejected) parse += r.reason == "parse_failure";
    CHECK(parse == 5);
}
