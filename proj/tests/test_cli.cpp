#include <doctest.h>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "litpipe/cli.hpp"
#include "litpipe/text.hpp"
#include "test_util.hpp"

using namespace litpipe;
using nlohmann::json;
using testutil::fixture;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

// CSV corpus of n documents with 120-word abstracts.
void write_corpus(const std::string& path, std::size_t n) {
    std::ofstream f(path);
    f << "cord_uid,title,abstract,source\n";
    for (std::size_t i = 0; i < n; ++i) {
        f << "doc" << i << ",Title " << i << ",\"" << testutil::words(120, "t" + std::to_string(i) + "w")
          << "\",PMC\n";
    }
}

}  // namespace

TEST_CASE("usage errors exit 2") {
    CHECK(run({}).code == cli::kExitUsage);
    auto bogus = run({"bogus"});
    CHECK(bogus.code == cli::kExitUsage);
    CHECK_FALSE(bogus.err.empty());
    CHECK(run({"manifest", "--recipe", "syncovid_only", "--no-such-flag"}).code == cli::kExitUsage);
    CHECK(run({"manifest", "--recipe", "nonsense", "--dataset", "synCovid:1097"}).code == cli::kExitUsage);
    CHECK(run({"--help"}).code == cli::kExitOk);
}

TEST_CASE("manifest subcommand writes the golden manifest") {
    testutil::TempDir tmp;
    auto path = tmp.file("m.manifest");
    auto r = run({"manifest", "--recipe", "syncovid_only", "--dataset", "synCovid:1097", "--out", path});
    REQUIRE(r.code == 0);
    CHECK(lines(r.out) == std::vector<std::string>{path});
    CHECK(read_file(path) == read_file(fixture("manifests/syncovid_only.manifest")));
    CHECK(run({"manifest", "--recipe", "syncovid_only", "--dataset", "synCovid:10", "--out", path}).code ==
          cli::kExitFailure);
}

TEST_CASE("qc subcommand matches the oracle report") {
    auto r = run({"qc", "--dataset", fixture("qc_fixture5.jsonl"), "--sample", "5", "--seed", "7"});
    REQUIRE(r.code == 0);
    auto got = json::parse(r.out);
    auto want = json::parse(read_file(fixture("qc_fixture5.expected.json")));
    for (const auto& [key, value] : want.items()) CHECK_MESSAGE(got.at(key) == value, key);
    CHECK(run({"qc", "--dataset", fixture("qc_fixture5.jsonl"), "--sample", "6"}).code == cli::kExitFailure);
    CHECK(run({"qc", "--dataset", "/no/such/file.jsonl"}).code == cli::kExitFailure);
}

TEST_CASE("loss-analyze flags overfitting") {
    testutil::TempDir tmp;
    write_file(tmp.file("log.csv"),
               "step,epoch,train_loss,eval_loss\n10,1,2.0,2.1\n20,2,1.8,1.9\n30,3,1.6,2.0\n40,4,1.5,2.1\n"
               "50,5,1.4,2.2\n");
    auto r = run({"loss-analyze", "--log", tmp.file("log.csv")});
    REQUIRE(r.code == 0);
    auto j = json::parse(r.out);
    CHECK(j["verdict"] == "overfit");
    CHECK(j["overfit_first_step"] == 30);
}

TEST_CASE("pipeline reruns produce identical artifacts") {
    testutil::TempDir tmp;
    write_corpus(tmp.file("corpus.csv"), 40);
    write_file(tmp.file("instructions.txt"), "Summarize this abstract.\nIdentify the sample population.\n");

    auto pipeline = [&](const std::string& tag) {
        auto p = [&](const std::string& name) { return tmp.file(tag + "_" + name); };
        REQUIRE(run({"ingest", "--input", tmp.file("corpus.csv"), "--out", p("corpus.jsonl")}).code == 0);
        REQUIRE(run({"sample", "--corpus", p("corpus.jsonl"), "-n", "6", "--seed", "5", "--out", p("abs.jsonl")})
                    .code == 0);
        auto so = run({"seed-outputs", "--instructions", tmp.file("instructions.txt"), "--abstracts", p("abs.jsonl"),
                       "--out", p("seeds.jsonl"), "--backend-url", "mock://seed"});
        REQUIRE(so.code == 0);
        auto syn = run({"synthesize", "--seeds", p("seeds.jsonl"), "-n", "20", "--seed", "3", "--out",
                        p("syn.jsonl"), "--summary", p("summary.json"), "--backend-url", "mock://gen"});
        REQUIRE(syn.code == 0);
        CHECK(lines(syn.out) == std::vector<std::string>{p("syn.jsonl"), p("summary.json")});
        return read_file(p("syn.jsonl"));
    };
    auto a = pipeline("a");
    auto b = pipeline("b");
    CHECK(a == b);
    CHECK(std::count(a.begin(), a.end(), '\n') == 20);
}

TEST_CASE("eval create, judge and report on the mock") {
    testutil::TempDir tmp;
    write_file(tmp.file("cases.jsonl"),
               "{\"case_id\":\"c1\",\"instruction\":\"Explain\",\"input\":\"text\"}\n"
               "{\"case_id\":\"c2\",\"instruction\":\"List symptoms\"}\n");
    auto gen = run({"generate", "--cases", tmp.file("cases.jsonl"), "--model", "m1:candidate:mock://a", "--model",
                    "gpt:reference:mock://b", "--out-dir", tmp.file("gen")});
    REQUIRE(gen.code == 0);
    auto state = tmp.file("state");
    auto created = run({"eval", "create", "--cases", tmp.file("cases.jsonl"), "--responses",
                        tmp.file("gen/responses.jsonl"), "--manifest", tmp.file("gen/manifest.json"),
                        "--session-id", "s1", "--state-dir", state});
    REQUIRE(created.code == 0);
    CHECK(run({"eval", "report", "--session", "s1", "--state-dir", state}).code == cli::kExitFailure);
    REQUIRE(run({"eval", "judge", "--session", "s1", "--state-dir", state, "--backend-url", "mock://judge"}).code ==
            0);
    auto report = run({"eval", "report", "--session", "s1", "--complete", "--reference", "gpt", "--state-dir", state});
    REQUIRE(report.code == 0);
    auto j = json::parse(report.out);
    CHECK(j["models"].size() == 2);
    CHECK(j["head_to_head"].size() == 1);
}
