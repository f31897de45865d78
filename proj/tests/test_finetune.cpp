#include <doctest.h>

#include "litpipe/error.hpp"
#include "litpipe/finetune.hpp"
#include "litpipe/text.hpp"
#include "test_util.hpp"

using namespace litpipe;
using testutil::fixture;

TEST_CASE("recipe manifests match the golden files byte for byte") {
    struct Case {
        Recipe recipe;
        std::vector<SourceDescriptor> refs;
        const char* golden;
    };
    std::vector<Case> cases{
        {Recipe::alpaca_plus_syncovid, {{"alpaca", 52000}, {"synCovid", 1097}}, "alpaca_plus_syncovid"},
        {Recipe::syncovid_only, {{"synCovid", 1097}}, "syncovid_only"},
        {Recipe::syncovid_plus_abstracts, {{"synCovid", 1097}, {"abstracts", 1097}}, "syncovid_plus_abstracts"}};
    for (const auto& c : cases) {
        auto m = make_training_manifest(c.recipe, c.refs);
        auto text = m.serialize();
        CHECK(text == read_file(fixture(std::string("manifests/") + c.golden + ".manifest")));
        CHECK(TrainingManifest::parse(text) == m);
        CHECK(TrainingManifest::parse(text).serialize() == text);
    }
}

TEST_CASE("recipe parameters") {
    auto p = recipe_params(Recipe::syncovid_only);
    CHECK(p.total_instructions == 1097);
    CHECK(p.epochs == 30);
    CHECK(p.learning_rate == 1e-5);
    CHECK(p.batch_size == 16);
    CHECK(p.eval_size == 100);
    CHECK(recipe_params(Recipe::alpaca_plus_syncovid).eval_size == 2000);
}

TEST_CASE("wrong ref total names both numbers") {
    std::vector<SourceDescriptor> refs{{"synCovid", 1097}};
    CHECK_THROWS_WITH_AS(make_training_manifest(Recipe::syncovid_plus_abstracts, refs),
                         doctest::Contains("2194"), InvalidArgument);
}

TEST_CASE("learning-rate formatting") {
    CHECK(format_learning_rate(3e-4) == "3e-4");
    CHECK(format_learning_rate(1e-5) == "1e-5");
    CHECK(format_learning_rate(2.5e-4) == "2.5e-4");
}

TEST_CASE("trainer log parsing") {
    auto curve = parse_trainer_log(fixture("trainer_log3.csv"));
    REQUIRE(curve.records.size() == 3);
    CHECK_FALSE(curve.records[0].eval_loss);
    CHECK(curve.records[1].eval_loss == 1.70);
    try {
        parse_trainer_log(fixture("trainer_log_repeat_step.csv"));
        FAIL("expected LineError");
    } catch (const LineError& e) {
        // the header is line 1; the second data row carries the repeated step
        CHECK(e.line() == 3);
    }
    CHECK_THROWS(parse_trainer_log(fixture("trainer_log_empty.csv")));
    try {
        parse_trainer_log_text("10,1,1.0,1.0\n10,2,0.9,0.9\n");
        FAIL("expected LineError");
    } catch (const LineError& e) {
        CHECK(e.line() == 2);
    }
}

namespace {

LossCurve curve_from(const std::vector<double>& train, const std::vector<double>& eval) {
    LossCurve c;
    for (std::size_t i = 0; i < train.size(); ++i) {
        c.records.push_back({(i + 1) * 10, static_cast<double>(i + 1), train[i], eval[i]});
    }
    return c;
}

}  // namespace

TEST_CASE("overfit detection") {
    std::vector<double> train, eval;
    for (int e = 0; e < 30; ++e) {
        train.push_back(2.0 - 0.05 * e);
        eval.push_back(2.1 - 0.04 * e);
    }
    CHECK(detect_overfit(curve_from(train, eval)) == OverfitVerdict{false, std::nullopt});

    // eval rises at points 6, 7, 8 (steps 70, 80, 90) while train falls
    std::vector<double> t2{2.0, 1.8, 1.6, 1.5, 1.4, 1.3, 1.2, 1.1, 1.0};
    std::vector<double> e2{2.1, 1.9, 1.7, 1.6, 1.5, 1.4, 1.45, 1.5, 1.55};
    auto v = detect_overfit(curve_from(t2, e2));
    CHECK(v.overfit);
    CHECK(v.first_step == 70);

    // two rises only
    std::vector<double> e3{2.1, 1.9, 1.7, 1.6, 1.5, 1.4, 1.45, 1.5, 1.45};
    CHECK_FALSE(detect_overfit(curve_from(t2, e3)).overfit);

    CHECK_FALSE(detect_overfit(curve_from({1.0}, {1.0})).overfit);
}

TEST_CASE("property: overfit verdict ignores positive scaling") {
    std::vector<double> t2{2.0, 1.8, 1.6, 1.5, 1.4, 1.3, 1.2, 1.1, 1.0};
    std::vector<double> e2{2.1, 1.9, 1.7, 1.6, 1.5, 1.4, 1.45, 1.5, 1.55};
    auto base = detect_overfit(curve_from(t2, e2));
    for (double k : {0.001, 0.5, 3.0, 1000.0}) {
        std::vector<double> ts, es;
        for (double x : t2) ts.push_back(x * k);
        for (double x : e2) es.push_back(x * k);
        CHECK(detect_overfit(curve_from(ts, es)) == base);
    }
}

TEST_CASE("property: write then parse is the identity") {
    std::vector<double> t{2.0, 1.75, 1.5, 1.125};
    std::vector<double> e{2.5, 2.0, 1.0, 0.5};
    auto c = curve_from(t, e);
    c.records[2].eval_loss.reset();
    CHECK(parse_trainer_log_text(write_trainer_log(c)) == c);
}
