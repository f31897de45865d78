#include <doctest.h>

#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "litpipe/error.hpp"
#include "litpipe/qc.hpp"
#include "litpipe/text.hpp"
#include "test_util.hpp"

using namespace litpipe;
using testutil::fixture;

namespace {

std::optional<std::pair<std::string, std::string>> vs(std::string_view s) {
    auto r = extract_verb_subject(s);
    if (!r) return std::nullopt;
    return std::make_pair(r->verb, r->subject);
}

using Pair = std::pair<std::string, std::string>;

}  // namespace

TEST_CASE("verb-subject extraction") {
    CHECK(vs("Summarize this abstract") == Pair{"summarize", "abstract"});
    CHECK(vs("Identify the sample population") == Pair{"identify", "sample population"});
    CHECK(vs("List any symptoms mentioned in the text.") == Pair{"list", "symptoms"});
    CHECK(vs("Compare the two treatment arms.") == Pair{"compare", "two treatment arms"});
    CHECK_FALSE(vs(""));
    CHECK_FALSE(vs("What is the main finding?"));
    CHECK_FALSE(vs("- bullet"));
    CHECK(vs("Summarize this abstract") == vs("Summarize this abstract"));
}

TEST_CASE("completeness") {
    auto all = classify_completeness(
        "Background: little is known. We conducted a survey. Results showed effects. In conclusion, act now.");
    CHECK(all.verdict == Completeness::complete);
    CHECK(all.facet_names() == std::vector<std::string>{"background", "methodology", "results", "conclusions"});

    auto mr = classify_completeness("We performed a regression. We found a significant association.");
    CHECK(mr.verdict == Completeness::incomplete);
    CHECK(mr.facet_names() == std::vector<std::string>{"methodology", "results"});

    auto none = classify_completeness("");
    CHECK(none.verdict == Completeness::incomplete);
    CHECK(none.facet_names().empty());
}

TEST_CASE("property: completeness is monotone under appended text") {
    std::vector<std::string> pieces{"Background:",  "we used",    "a model.",  "Results",     "were mixed.",
                                    "In summary",   "nothing.",   "method",    "objective",   "we conclude",
                                    "revealed",     "x",          "prior studies", "odds ratio", "framework"};
    std::mt19937_64 gen(17);
    for (int trial = 0; trial < 200; ++trial) {
        std::string text;
        auto prev = classify_completeness(text);
        for (int k = 0; k < 8; ++k) {
            text += " " + pieces[gen() % pieces.size()];
            auto cur = classify_completeness(text);
            for (std::size_t f = 0; f < kFacetCount; ++f) CHECK((!prev.facets[f] || cur.facets[f]));
            prev = cur;
        }
    }
}

TEST_CASE("study design") {
    CHECK(classify_study_design("We conducted a cross-sectional survey of 500 clinicians in three provinces.") ==
          "cross-sectional");
    CHECK(classify_study_design("This review summarizes recent findings on vaccine hesitancy.") ==
          "literature review");
    CHECK(classify_study_design("Viral particles were imaged.") == "other");
    const auto labels = QcRules::defaults().design_labels();
    for (const char* text : {"", "a cohort study", "randomized controlled trial", "we propose a pipeline",
                             "a 3-year-old child", "plain words"}) {
        auto l = classify_study_design(text);
        CHECK(std::count(labels.begin(), labels.end(), l) == 1);
    }
}

TEST_CASE("10-triplet hand-labelled fixture") {
    auto data = import_jsonl(fixture("qc_fixture10.jsonl"), Origin::synthetic);
    auto r = qc_report(data, 10, 1);
    CHECK(r.total == 10);
    CHECK(r.unique_instructions == 7);
    CHECK(r.unique_inputs == 8);
    CHECK(r.instructions_with_pair == 9);
    CHECK(r.unique_pair_count == 6);
    REQUIRE(r.verb_subject_pairs.size() == 6);
    CHECK(r.verb_subject_pairs[0].pair == VerbSubject{"summarize", "abstract"});
    CHECK(r.verb_subject_pairs[0].count == 3);
    CHECK(r.verb_subject_pairs[1].pair == VerbSubject{"identify", "sample population"});
    CHECK(r.verb_subject_pairs[1].count == 2);
    CHECK(r.complete == 5);
    CHECK(r.incomplete == 5);
    CHECK(r.facet_histogram == std::map<std::string, std::size_t>{
                                   {"background", 5}, {"methodology", 8}, {"results", 6}, {"conclusions", 6}});
    CHECK(r.study_design_histogram == std::map<std::string, std::size_t>{{"literature review", 2},
                                                                         {"cross-sectional", 2},
                                                                         {"cohort", 1},
                                                                         {"randomized controlled trial", 1},
                                                                         {"case study/report", 1},
                                                                         {"method development", 1},
                                                                         {"other", 2}});
}

TEST_CASE("5-triplet fixture matches the oracle report") {
    auto data = import_jsonl(fixture("qc_fixture5.jsonl"), Origin::synthetic);
    auto got = nlohmann::json::parse(qc_report(data, 5, 7).to_json());
    auto want = nlohmann::json::parse(read_file(fixture("qc_fixture5.expected.json")));
    for (const auto& [key, value] : want.items()) CHECK_MESSAGE(got.at(key) == value, key);
}

TEST_CASE("sampling sizes and errors") {
    std::vector<InstructionTriplet> big;
    for (int i = 0; i < 1097; ++i) big.push_back(testutil::triplet("Do task " + std::to_string(i), "text", "o"));
    auto r = qc_report(big, 120, 3);
    CHECK(r.sample_size == 120);
    CHECK(r.complete + r.incomplete == 120);
    CHECK(std::set<std::size_t>(r.sample_indices.begin(), r.sample_indices.end()).size() == 120);

    auto full = qc_report(std::span(big).first(50), 50, 3);
    std::vector<std::size_t> all(50);
    std::iota(all.begin(), all.end(), 0);
    CHECK(full.sample_indices == all);

    CHECK_THROWS_AS(qc_report(std::vector<InstructionTriplet>{}, 0, 1), InvalidArgument);
    CHECK_THROWS_AS(qc_report(std::span(big).first(3), 4, 1), InvalidArgument);
    CHECK(qc_report(big, 120, 3) == r);
}

TEST_CASE("property: parallel report equals serial reference") {
    std::mt19937_64 gen(4);
    auto data = import_jsonl(fixture("qc_fixture10.jsonl"), Origin::synthetic);
    std::vector<InstructionTriplet> many;
    for (int i = 0; i < 3000; ++i) {
        auto t = data[gen() % data.size()];
        t.input += " " + testutil::words(gen() % 600);
        many.push_back(t);
    }
    for (std::uint64_t seed : {1u, 2u, 3u}) CHECK(qc_report(many, 500, seed) == reference::qc_report(many, 500, seed));
}

TEST_CASE("length buckets") {
    CHECK(length_bucket(0) == 0);
    CHECK(length_bucket(24) == 0);
    CHECK(length_bucket(25) == 1);
    CHECK(length_bucket(275) == 11);
    CHECK(length_bucket(10000) == 20);
    CHECK(length_bucket_label(11) == "275-299");
    CHECK(length_bucket_label(20) == "500+");
}

TEST_CASE("plot csv has a header and one row per bucket") {
    auto data = import_jsonl(fixture("qc_fixture5.jsonl"), Origin::synthetic);
    auto csv = qc_report(data, 5, 7).to_plot_csv();
    CHECK(csv.rfind("section,key,value\n", 0) == 0);
    CHECK(csv.find("length,500+,0\n") != std::string::npos);
    CHECK(csv.find("completeness,complete,2\n") != std::string::npos);
}

TEST_CASE("rules load from the data file") {
    auto rules = QcRules::load(testutil::data_file("qc_rules.json"));
    CHECK(rules.version == QcRules::defaults().version);
    CHECK_THROWS(QcRules::from_json("{}"));
}
