#include <doctest.h>

#include <random>

#include "litpipe/error.hpp"
#include "litpipe/similarity.hpp"
#include "litpipe/task_store.hpp"
#include "litpipe/text.hpp"
#include "test_util.hpp"

using namespace litpipe;
using testutil::triplet;

TEST_CASE("mining maps title and abstract") {
    std::vector<Document> docs{make_document("d1", "T", "A b c")};
    auto res = mine_abstract_triplets(docs, 1, 5);
    REQUIRE(res.triplets.size() == 1);
    const auto& t = res.triplets[0];
    CHECK(t.instruction == "Summarize this abstract");
    CHECK(t.input == "A b c");
    CHECK(t.output == "T");
    CHECK(t.origin == Origin::mined);
    CHECK(t.source_doc_id == "d1");
    CHECK(mine_abstract_triplets(docs, 0, 5).triplets.empty());
}

TEST_CASE("mining 1097 from a large corpus") {
    auto corpus = Corpus::from_documents(testutil::make_docs(5000, 8));
    auto res = mine_abstract_triplets(corpus, 1097, 9);
    CHECK(res.triplets.size() == 1097);
    for (const auto& t : res.triplets) {
        const auto* d = corpus.find(*t.source_doc_id);
        REQUIRE(d);
        CHECK(t.output == d->title);
        CHECK(t.input == d->abstract);
    }
}

TEST_CASE("mining skips ineligible documents") {
    std::vector<Document> docs = testutil::make_docs(4);
    docs[1].title.clear();
    auto res = mine_abstract_triplets(docs, 3, 1);
    CHECK(res.triplets.size() == 3);
    CHECK(res.skipped_ineligible == 1);
    CHECK_THROWS_AS(mine_abstract_triplets(docs, 4, 1), InvalidArgument);
}

TEST_CASE("dataset assembly arithmetic") {
    std::vector<InstructionTriplet> syn(1097, triplet("i", "x", "o"));
    std::vector<InstructionTriplet> mined(1097, triplet("Summarize this abstract", "a", "t", Origin::mined));
    std::vector<TripletSource> two{{"synCovid", syn}, {"abstracts", mined}};
    auto ds = assemble_dataset("syncovid_plus_abstracts", two);
    CHECK(ds.size() == 2194);
    CHECK(ds.created_from == std::vector<SourceDescriptor>{{"synCovid", 1097}, {"abstracts", 1097}});
    CHECK(ds.triplets.front().origin == Origin::synthetic);
    CHECK(ds.triplets.back().origin == Origin::mined);

    std::vector<InstructionTriplet> five(5, triplet("i", "x", "o"));
    std::vector<TripletSource> one{{"only", five}};
    auto single = assemble_dataset("single", one);
    CHECK(single.size() == 5);
    CHECK(single.created_from.size() == 1);

    std::vector<InstructionTriplet> none;
    std::vector<TripletSource> empty{{"a", none}, {"b", none}};
    CHECK_THROWS(assemble_dataset("empty", empty));
}

TEST_CASE("export format and round trip") {
    testutil::TempDir tmp;
    std::vector<InstructionTriplet> ts{triplet("Summarize \"this\"", "line1\nline2", "out"),
                                       triplet("List", "", "a, b"), triplet("Name", "x", "y")};
    CHECK(export_jsonl(ts, tmp.file("a.jsonl")) == 3);
    auto text = read_file(tmp.file("a.jsonl"));
    CHECK(text.substr(0, text.find('\n')) ==
          R"({"instruction":"Summarize \"this\"","input":"line1\nline2","output":"out"})");
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);
    CHECK(import_jsonl(tmp.file("a.jsonl"), Origin::synthetic) == ts);

    CHECK(export_jsonl(std::vector<InstructionTriplet>{}, tmp.file("e.jsonl")) == 0);
    CHECK(read_file(tmp.file("e.jsonl")).empty());
}

TEST_CASE("import errors cite the line") {
    try {
        import_jsonl(testutil::fixture("triplets_missing_output_line2.jsonl"), Origin::synthetic);
        FAIL("expected LineError");
    } catch (const LineError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse_jsonl("{\"instruction\":\"a\",\"input\":\"b\",\"output\":\"c\"}\n\nnot json\n",
                                Origin::synthetic),
                    LineError);
    try {
        parse_jsonl("{\"instruction\":\"a\",\"input\":\"b\",\"output\":\"c\"}\n\nnot json\n", Origin::synthetic);
    } catch (const LineError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("1097-line file imports 1097 triplets") {
    std::vector<InstructionTriplet> ts;
    for (int i = 0; i < 1097; ++i) ts.push_back(triplet("i" + std::to_string(i), "x", "o"));
    CHECK(parse_jsonl(to_jsonl(ts), Origin::synthetic).size() == 1097);
}

TEST_CASE("uniqueness stats") {
    std::vector<InstructionTriplet> ts{triplet("a", "x", "1"), triplet("b", "y", "2"), triplet("c", "z", "3"),
                                       triplet("d", "x", "4"), triplet("a ", "y", "5")};
    CHECK(uniqueness_stats(ts) == UniquenessStats{4, 3, 5});
    CHECK(uniqueness_stats(std::vector<InstructionTriplet>{}) == UniquenessStats{0, 0, 0});
}

TEST_CASE("property: export/import identity on random triplets") {
    std::mt19937_64 gen(11);
    const std::vector<std::string> alphabet{"a", "b", " ", "\n", "\t", "\"", "\\", ",", "{", "}", "é", "\x01"};
    auto rnd = [&](std::size_t maxlen, bool nonempty) {
        std::string s;
        std::size_t len = gen() % maxlen + (nonempty ? 1 : 0);
        for (std::size_t i = 0; i < len; ++i) s += alphabet[gen() % alphabet.size()];
        if (nonempty && trim(s).empty()) s += "x";
        return s;
    };
    std::vector<InstructionTriplet> ts;
    for (int i = 0; i < 300; ++i) ts.push_back(triplet(rnd(20, true), rnd(30, false), rnd(20, true)));
    CHECK(parse_jsonl(to_jsonl(ts), Origin::synthetic) == ts);
}

TEST_CASE("manifest json records sources and digest") {
    std::vector<InstructionTriplet> a(2, triplet("i", "x", "o"));
    std::vector<TripletSource> src{{"a", a}};
    auto ds = assemble_dataset("d", src);
    auto j = dataset_manifest_json(ds);
    CHECK(j.find("\"total\": 2") != std::string::npos);
    CHECK(j.find("sha256") != std::string::npos);
}
