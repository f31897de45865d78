// One PASS/FAIL line per acceptance criterion; exit status 1 if any fail.

#include <httplib.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eval_fixture.hpp"
#include "litpipe/aggregate.hpp"
#include "litpipe/error.hpp"
#include "litpipe/eval_server.hpp"
#include "litpipe/finetune.hpp"
#include "litpipe/inference.hpp"
#include "litpipe/mock_backend.hpp"
#include "litpipe/qc.hpp"
#include "litpipe/ranking.hpp"
#include "litpipe/synthesis.hpp"
#include "litpipe/task_store.hpp"
#include "litpipe/text.hpp"
#include "test_util.hpp"

using namespace litpipe;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass;
    std::string measured;
};

int failures = 0;

void criterion(const std::string& name, const std::string& tolerance, double limit_seconds,
               const std::function<Outcome()>& fn) {
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = fn();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool ok = o.pass && (limit_seconds <= 0 || secs < limit_seconds);
    if (!ok) ++failures;
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.3fs", secs);
    std::string limit = limit_seconds > 0 ? ", < " + std::to_string(static_cast<int>(limit_seconds)) + "s" : "";
    std::printf("%s %s (%s in %s; %s%s)\n", ok ? "PASS" : "FAIL", name.c_str(), o.measured.c_str(), timing,
                tolerance.c_str(), limit.c_str());
    std::fflush(stdout);
}

// ---- manifests ----

Outcome manifests() {
    struct Want {
        Recipe recipe;
        std::vector<SourceDescriptor> refs;
        std::string golden;
        std::size_t total, epochs, batch, eval;
        double lr;
    };
    std::vector<Want> wants{
        {Recipe::alpaca_plus_syncovid, {{"alpaca", 52000}, {"synCovid", 1097}}, "alpaca_plus_syncovid", 53097, 3,
         128, 2000, 3e-4},
        {Recipe::syncovid_only, {{"synCovid", 1097}}, "syncovid_only", 1097, 30, 16, 100, 1e-5},
        {Recipe::syncovid_plus_abstracts, {{"synCovid", 1097}, {"abstracts", 1097}}, "syncovid_plus_abstracts", 2194,
         30, 16, 100, 1e-5}};
    int exact = 0;
    for (const auto& w : wants) {
        auto m = make_training_manifest(w.recipe, w.refs);
        bool values = m.total_instructions == w.total && m.epochs == w.epochs && m.batch_size == w.batch &&
                      m.eval_size == w.eval && m.learning_rate == w.lr;
        bool bytes = m.serialize() == read_file(testutil::fixture("manifests/" + w.golden + ".manifest"));
        exact += values && bytes;
    }
    return {exact == 3, std::to_string(exact) + "/3 recipes byte-exact"};
}

// ---- inference defaults ----

Outcome inference_defaults() {
    InferenceConfig c;
    bool ok = c.temperature == 0.1 && c.top_p == 0.75 && c.top_k == 40 && c.beams == 4 && c.max_tokens == 128;
    std::ostringstream s;
    s << "{" << c.temperature << ", " << c.top_p << ", " << c.top_k << ", " << c.beams << ", " << c.max_tokens << "}";
    return {ok, s.str()};
}

// ---- mining ----

Outcome mining() {
    auto docs = testutil::make_docs(50);
    std::map<std::string, std::string> title_of;
    for (const auto& d : docs) title_of[d.doc_id] = d.title;
    auto a = mine_abstract_triplets(docs, 20, 1234);
    auto b = mine_abstract_triplets(docs, 20, 1234);
    std::set<std::string> sources;
    std::size_t good = 0;
    for (const auto& t : a.triplets) {
        if (!t.source_doc_id) continue;
        sources.insert(*t.source_doc_id);
        if (t.instruction == "Summarize this abstract" && t.output == title_of.at(*t.source_doc_id)) ++good;
    }
    bool ok = a.triplets.size() == 20 && good == 20 && sources.size() == 20 && a.triplets == b.triplets;
    return {ok, std::to_string(a.triplets.size()) + " triplets, " + std::to_string(good) + " conforming, " +
                    (a.triplets == b.triplets ? "repeatable" : "not repeatable")};
}

// ---- dataset arithmetic ----

Outcome dataset_arithmetic() {
    auto make = [](std::size_t n, const std::string& tag) {
        std::vector<InstructionTriplet> v(n, testutil::triplet(tag + " instruction", "", tag + " output"));
        return v;
    };
    auto alpaca = make(52000, "alpaca");
    auto syn = make(1097, "syn");
    auto abstracts = make(1097, "abs");
    std::vector<TripletSource> r1{{"alpaca", alpaca}, {"synCovid", syn}};
    std::vector<TripletSource> r3{{"synCovid", syn}, {"abstracts", abstracts}};
    auto d1 = assemble_dataset("alpaca_plus_syncovid", r1);
    auto d3 = assemble_dataset("syncovid_plus_abstracts", r3);
    bool ok = d1.size() == 53097 && d3.size() == 2194 && d1.created_from[0].count == 52000 &&
              d3.created_from[1].count == 1097;
    return {ok, "totals " + std::to_string(d1.size()) + " and " + std::to_string(d3.size())};
}

// ---- blinding ----

Outcome blinding_uniformity() {
    const std::vector<std::string> models{"m0", "m1", "m2", "m3"};
    std::map<std::string, std::string> responses;
    for (const auto& m : models) responses[m] = "response of " + m;
    PromptCase c{"case", "instruction", ""};
    Rng rng(20230601);
    std::map<std::vector<std::string>, std::size_t> counts;
    const std::size_t draws = 10000;
    std::size_t inverse_ok = 0;
    for (std::size_t i = 0; i < draws; ++i) {
        auto a = blind_case(c, responses, models, rng);
        ++counts[a.label_to_model];
        bool inv = a.label_to_model.size() == 4;
        for (std::size_t l = 0; inv && l < 4; ++l) {
            inv = a.blinded.labeled_responses[l].first == std::string(1, static_cast<char>('A' + l)) &&
                  a.blinded.labeled_responses[l].second == responses.at(a.label_to_model[l]);
        }
        inverse_ok += inv;
    }
    const double expected = draws / 24.0;
    double chi2 = 0;
    std::vector<std::string> perm = models;
    do {
        double o = static_cast<double>(counts[perm]);
        chi2 += (o - expected) * (o - expected) / expected;
    } while (std::next_permutation(perm.begin(), perm.end()));
    const double critical = 49.7282;  // chi-square df=23 at p=0.001

    // session-level unblind against the stored permutations
    auto session = testutil::make_session(26, models, {"h1"}, 5);
    for (const auto& pc : session.cases) {
        std::map<std::string, int> ranks;
        std::map<std::string, Grade> grades;
        for (const auto& l : blind_labels(4)) ranks[l] = 1, grades[l] = Grade::Pass;
        record_judgment(session, "h1", pc.case_id, ranks, grades);
    }
    complete_session(session);
    std::size_t session_ok = 0;
    for (const auto& [case_id, labels] : unblind(session)) {
        const auto& blinded = session.blinded.at(case_id);
        bool inv = true;
        for (const auto& [label, text] : blinded.labeled_responses) {
            inv = inv && session.label_to_model.at(case_id)[label[0] - 'A'] == labels.at(label);
        }
        session_ok += inv;
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "chi2=%.2f over %zu/24 permutations, inverse %zu/%zu draws, %zu/26 cases", chi2,
                  counts.size(), inverse_ok, draws, session_ok);
    return {chi2 < critical && counts.size() == 24 && inverse_ok == draws && session_ok == 26, buf};
}

// ---- rank validation ----

Outcome rank_validation() {
    // Brute force: every weak order of 4 items, ranked 1 + number strictly ahead.
    std::set<std::vector<int>> valid;
    for (int code = 0; code < 256; ++code) {
        std::vector<int> score{code & 3, (code >> 2) & 3, (code >> 4) & 3, (code >> 6) & 3};
        std::vector<int> r(4);
        for (int i = 0; i < 4; ++i) {
            r[i] = 1 + static_cast<int>(std::count_if(score.begin(), score.end(), [&](int s) { return s < score[i]; }));
        }
        valid.insert(r);
    }
    std::set<std::vector<int>> accepted;
    for (int code = 0; code < 256; ++code) {
        std::vector<int> r{1 + (code & 3), 1 + ((code >> 2) & 3), 1 + ((code >> 4) & 3), 1 + ((code >> 6) & 3)};
        if (is_competition_ranking(r)) accepted.insert(r);
    }
    return {accepted == valid, std::to_string(accepted.size()) + " accepted vs " + std::to_string(valid.size()) +
                                   " enumerated of 256"};
}

// ---- aggregation oracle ----

// Minimal exact fraction, separate from the library's arithmetic.
struct Frac {
    long long n = 0, d = 1;
    Frac() = default;
    Frac(long long num, long long den = 1) : n(num), d(den) { norm(); }
    void norm() {
        if (d < 0) n = -n, d = -d;
        long long g = std::gcd(n < 0 ? -n : n, d);
        if (g > 1) n /= g, d /= g;
    }
    Frac operator+(const Frac& o) const { return Frac(n * o.d + o.n * d, d * o.d); }
    Frac operator*(const Frac& o) const { return Frac(n * o.n, d * o.d); }
    Frac operator/(const Frac& o) const { return Frac(n * o.d, d * o.n); }
    bool operator<(const Frac& o) const { return n * o.d < o.n * d; }
    bool operator==(const Frac& o) const { return n == o.n && d == o.d; }
    bool same(const Rational& r) const { return r.numerator() == n && r.denominator() == d; }
};

bool aggregation_matches(std::mt19937_64& gen) {
    const std::size_t n_eval = 1 + gen() % 4, n_cases = 1 + gen() % 6, k = 1 + gen() % 4;
    std::vector<std::string> models, evals;
    for (std::size_t m = 0; m < k; ++m) models.push_back("model" + std::to_string(m));
    for (std::size_t e = 0; e < n_eval; ++e) evals.push_back("ev" + std::to_string(e));
    auto s = testutil::make_session(n_cases, models, evals, gen());

    // raw[e][case][model] = (rank, grade)
    std::map<std::string, std::map<std::string, std::map<std::string, std::pair<int, int>>>> raw;
    for (const auto& e : evals) {
        for (const auto& c : s.cases) {
            std::vector<int> score(k);
            for (auto& x : score) x = static_cast<int>(gen() % 3);
            std::map<std::string, int> ranks;
            std::map<std::string, Grade> grades;
            const auto& order = s.label_to_model.at(c.case_id);
            for (std::size_t i = 0; i < k; ++i) {
                int rank = 1 + static_cast<int>(std::count_if(score.begin(), score.end(),
                                                              [&](int o) { return o > score[i]; }));
                int grade = static_cast<int>(gen() % 3);
                std::string label(1, static_cast<char>('A' + i));
                ranks[label] = rank;
                grades[label] = static_cast<Grade>(grade);
                raw[e][c.case_id][order[i]] = {rank, grade};
            }
            record_judgment(s, e, c.case_id, ranks, grades);
        }
    }
    complete_session(s);

    std::map<std::string, Rational> weights;
    std::map<std::string, Frac> w;
    Frac wsum;
    for (const auto& e : evals) {
        long long num = 1 + static_cast<long long>(gen() % 4), den = 1 + static_cast<long long>(gen() % 3);
        weights[e] = Rational(num, den);
        w[e] = Frac(num, den);
        wsum = wsum + w[e];
    }
    for (auto& [e, v] : w) v = v / wsum;

    const std::string reference = models[gen() % k];
    auto report = aggregate_report(s, weights, reference);

    for (const auto& m : models) {
        const auto* agg = report.find(m);
        if (!agg) return false;
        Frac mean_rank;
        std::array<Frac, 3> grade_counts{};
        for (const auto& e : evals) {
            long long rank_sum = 0;
            std::array<long long, 3> per_grade{};
            for (const auto& c : s.cases) {
                auto [rank, grade] = raw[e][c.case_id][m];
                rank_sum += rank;
                ++per_grade[grade];
            }
            mean_rank = mean_rank + w[e] * Frac(rank_sum, static_cast<long long>(n_cases));
            for (int g = 0; g < 3; ++g) grade_counts[g] = grade_counts[g] + w[e] * Frac(per_grade[g]);
        }
        if (!mean_rank.same(agg->mean_rank)) return false;
        for (int g = 0; g < 3; ++g) {
            if (!grade_counts[g].same(agg->grade_counts[g])) return false;
        }
    }

    std::size_t h2h_checked = 0;
    for (const auto& cand : models) {
        if (cand == reference) continue;
        std::size_t wins = 0, ties = 0, losses = 0;
        for (const auto& c : s.cases) {
            Frac rc, rr;
            for (const auto& e : evals) {
                rc = rc + w[e] * Frac(raw[e][c.case_id][cand].first);
                rr = rr + w[e] * Frac(raw[e][c.case_id][reference].first);
            }
            if (rc < rr) ++wins;
            else if (rc == rr) ++ties;
            else ++losses;
        }
        auto h = head_to_head(s, weights, cand, reference);
        Frac pct(static_cast<long long>(wins + ties), static_cast<long long>(n_cases));
        if (h.wins != wins || h.ties != ties || h.losses != losses || !pct.same(h.preferred_or_tied)) return false;
        auto in_report = std::find_if(report.head_to_head.begin(), report.head_to_head.end(),
                                      [&](const HeadToHead& x) { return x.candidate == cand; });
        if (in_report == report.head_to_head.end() || in_report->wins != wins || in_report->ties != ties) return false;
        ++h2h_checked;
    }
    return h2h_checked + 1 == k && report.head_to_head.size() + 1 == k;
}

Outcome aggregation_oracle() {
    std::mt19937_64 gen(99);
    int matched = 0;
    for (int i = 0; i < 100; ++i) matched += aggregation_matches(gen);
    return {matched == 100, std::to_string(matched) + "/100 sessions match"};
}

// ---- head-to-head fixture ----

Outcome head_to_head_fixture() {
    auto s = testutil::make_session(26, {"synCovid", "chatgpt"}, {"h1"});
    for (std::size_t i = 0; i < 26; ++i) {
        std::map<std::string, int> ranks;
        if (i < 12) ranks = {{"synCovid", 1}, {"chatgpt", 2}};
        else if (i < 17) ranks = {{"synCovid", 1}, {"chatgpt", 1}};
        else ranks = {{"synCovid", 2}, {"chatgpt", 1}};
        testutil::judge_by_model(s, "h1", s.cases[i].case_id, ranks,
                                 {{"synCovid", Grade::Pass}, {"chatgpt", Grade::Pass}});
    }
    complete_session(s);
    auto h = head_to_head(s, {}, "synCovid", "chatgpt");
    double pct = h.preferred_or_tied_pct();
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.2f%% (%zu wins, %zu ties of %zu)", pct, h.wins, h.ties, h.cases);
    return {std::abs(pct - 65.4) <= 0.1, buf};
}

// ---- synthesis ----

std::set<std::string> token_set(const std::string& s) {
    std::set<std::string> out;
    std::istringstream in(to_lower(s));
    for (std::string t; in >> t;) out.insert(t);
    return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::vector<std::string> inter;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
    std::size_t uni = a.size() + b.size() - inter.size();
    return uni == 0 ? 1.0 : static_cast<double>(inter.size()) / static_cast<double>(uni);
}

Outcome synthesis_loop() {
    std::vector<InstructionTriplet> seeds;
    for (int i = 0; i < 12; ++i) {
        seeds.push_back(testutil::triplet("Seed task " + std::to_string(i) + " about the abstract",
                                          testutil::words(270, "s" + std::to_string(i)), "Seed output",
                                          Origin::seed_handwritten));
    }
    MockChatBackend mock;
    ChatBackendConfig cfg;
    SynthesisOptions opts;
    auto a = synthesize_batch(seeds, 50, mock, cfg, 424242, opts);
    auto b = synthesize_batch(seeds, 50, mock, cfg, 424242, opts);
    std::size_t in_window = 0;
    for (const auto& t : a.accepted) in_window += opts.window.contains(count_words(t.input));
    std::size_t close_pairs = 0;
    std::vector<std::set<std::string>> sets;
    for (const auto& t : a.accepted) sets.push_back(token_set(t.instruction));
    for (std::size_t i = 0; i < sets.size(); ++i) {
        for (std::size_t j = i + 1; j < sets.size(); ++j) close_pairs += jaccard(sets[i], sets[j]) >= opts.dedup_threshold;
    }
    bool identical = to_jsonl(a.accepted) == to_jsonl(b.accepted);
    bool ok = a.accepted.size() == 50 && in_window == 50 && close_pairs == 0 && identical;
    return {ok, std::to_string(a.accepted.size()) + " accepted, " + std::to_string(in_window) + " in window, " +
                    std::to_string(close_pairs) + " near-duplicate pairs, " +
                    (identical ? "bit-identical" : "runs differ")};
}

// ---- QC ----

Outcome qc_fixture() {
    auto data = import_jsonl(testutil::fixture("qc_fixture10.jsonl"), Origin::synthetic);
    auto r = qc_report(data, 10, 1);
    std::map<std::string, std::size_t> facets{{"background", 5}, {"methodology", 8}, {"results", 6}, {"conclusions", 6}};
    std::map<std::string, std::size_t> designs{{"literature review", 2}, {"cross-sectional", 2},
                                               {"cohort", 1},            {"randomized controlled trial", 1},
                                               {"case study/report", 1}, {"method development", 1},
                                               {"other", 2}};
    std::vector<PairCount> pairs{{{"summarize", "abstract"}, 3},
                                 {{"identify", "sample population"}, 2},
                                 {{"compare", "two treatment arms"}, 1},
                                 {{"describe", "risk factors"}, 1},
                                 {{"explain", "mechanism"}, 1},
                                 {{"list", "symptoms"}, 1}};
    int counters = 0;
    counters += r.total == 10;
    counters += r.unique_instructions == 7;
    counters += r.unique_inputs == 8;
    counters += r.instructions_with_pair == 9;
    counters += r.unique_pair_count == 6;
    counters += r.verb_subject_pairs == pairs;
    counters += r.complete == 5 && r.incomplete == 5;
    counters += r.facet_histogram == facets;
    counters += r.study_design_histogram == designs;

    std::size_t sampled_ok = 0;
    for (std::size_t n : {1097u, 5000u}) {
        std::vector<InstructionTriplet> big;
        for (std::size_t i = 0; i < n; ++i) {
            big.push_back(testutil::triplet("Describe item " + std::to_string(i), testutil::words(30 + i % 300), "o"));
        }
        auto rep = qc_report(big, 120, 7);
        sampled_ok += rep.sample_size == 120 && rep.complete + rep.incomplete == 120;
    }
    return {counters == 9 && sampled_ok == 2,
            std::to_string(counters) + "/9 counter groups exact, sample_size=120 on " + std::to_string(sampled_ok) +
                "/2 large datasets"};
}

// ---- overfit ----

LossCurve curve(const std::vector<double>& train, const std::vector<double>& eval) {
    LossCurve c;
    for (std::size_t i = 0; i < train.size(); ++i) c.records.push_back({(i + 1) * 100, double(i + 1), train[i], eval[i]});
    return c;
}

Outcome overfit_detector() {
    int ok = 0, total = 0;
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> t, e;
        double tv = 3.0, ev = 3.2;
        for (int i = 0; i < 30; ++i) {
            tv -= 0.001 + (gen() % 100) / 1000.0;
            ev -= 0.001 + (gen() % 100) / 1000.0;
            t.push_back(tv);
            e.push_back(ev);
        }
        ++total;
        ok += !detect_overfit(curve(t, e)).overfit;

        // eval rises at points p, p+1, p+2 while train keeps falling
        std::size_t p = 5 + gen() % 20;
        for (std::size_t i = p; i < e.size(); ++i) e[i] = e[p - 1] + 0.01 * static_cast<double>(i - p + 1);
        auto v = detect_overfit(curve(t, e));
        ++total;
        ok += v.overfit && v.first_step == (p + 1) * 100;
    }
    return {ok == total, std::to_string(ok) + "/" + std::to_string(total) + " verdicts correct"};
}

// ---- serialization ----

Outcome serialization() {
    std::mt19937_64 gen(1000);
    const std::vector<std::string> alphabet{"a", "Z", "7", " ", "\n", "\t", "\"", "\\", "/", "{", "}", ":", ",", "é", "µ", "\x01"};
    auto rnd = [&](std::size_t maxlen, bool nonempty) {
        std::string s;
        std::size_t len = gen() % maxlen + (nonempty ? 1 : 0);
        for (std::size_t i = 0; i < len; ++i) s += alphabet[gen() % alphabet.size()];
        if (nonempty && trim(s).empty()) s += "x";
        return s;
    };
    std::vector<InstructionTriplet> ts;
    for (int i = 0; i < 1000; ++i) ts.push_back(testutil::triplet(rnd(40, true), rnd(80, false), rnd(40, true)));
    bool round_trip = parse_jsonl(to_jsonl(ts), Origin::synthetic) == ts;

    int lines_ok = 0;
    auto line_of = [](const std::function<void()>& fn) -> std::size_t {
        try {
            fn();
        } catch (const LineError& e) {
            return e.line();
        }
        return 0;
    };
    lines_ok += line_of([] { import_jsonl(testutil::fixture("triplets_missing_output_line2.jsonl"), Origin::synthetic); }) == 2;
    std::string text = to_jsonl(std::span(ts).first(4)) + "{not json\n";
    lines_ok += line_of([&] { parse_jsonl(text, Origin::synthetic); }) == 5;
    text = to_jsonl(std::span(ts).first(6)) + "{\"instruction\":\"\",\"input\":\"\",\"output\":\"x\"}\n";
    lines_ok += line_of([&] { parse_jsonl(text, Origin::synthetic); }) == 7;
    return {round_trip && lines_ok == 3, std::string(round_trip ? "1000/1000 lossless" : "round trip lost data") +
                                              ", " + std::to_string(lines_ok) + "/3 line numbers correct"};
}

// ---- blind leak ----

Outcome blind_leak() {
    const std::vector<std::string> models{"zzleakcand1", "zzleakcand2", "zzleakref"};
    auto service = std::make_shared<EvalService>();
    EvalServerOptions opts;
    opts.port = 0;
    opts.reference_model = "zzleakref";
    EvalServer server(service, opts);
    int port = server.start();
    httplib::Client client("127.0.0.1", port);

    json body;
    body["session_id"] = "leak";
    body["blind_seed"] = 17;
    body["model_ids"] = models;
    body["evaluators"] = {"h1"};
    for (const auto& c : testutil::prompt_cases(4)) {
        body["cases"].push_back({{"case_id", c.case_id}, {"instruction", c.instruction}, {"input", c.input}});
        for (const auto& m : models) {
            body["responses"].push_back({{"case_id", c.case_id}, {"model_id", m}, {"text", "answer from the model"}});
        }
    }
    std::vector<std::pair<std::string, std::string>> seen;  // (endpoint, body)
    auto record = [&](const std::string& what, const httplib::Result& r) {
        seen.emplace_back(what, r ? r->body : std::string("no response"));
    };
    json ranks{{"A", 1}, {"B", 2}, {"C", 3}}, grades{{"A", "Pass"}, {"B", "Fail"}, {"C", "Excellent"}};
    record("POST /sessions", client.Post("/sessions", body.dump(), "application/json"));
    record("GET /sessions/leak", client.Get("/sessions/leak"));
    record("POST evaluators", client.Post("/sessions/leak/evaluators", R"({"id":"h2"})", "application/json"));
    record("GET next", client.Get("/sessions/leak/cases/next?evaluator=h1"));
    record("POST judgment", client.Post("/sessions/leak/judgments",
                                        json{{"evaluator", "h1"}, {"case_id", "case1"}, {"ranks", ranks}, {"grades", grades}}.dump(),
                                        "application/json"));
    record("POST bad judgment", client.Post("/sessions/leak/judgments",
                                            json{{"evaluator", "h1"}, {"case_id", "case2"}, {"ranks", {{"A", 1}}}, {"grades", grades}}.dump(),
                                            "application/json"));
    record("POST complete", client.Post("/sessions/leak/complete", "{}", "application/json"));
    record("GET report", client.Get("/sessions/leak/report?reference=zzleakref"));
    record("GET unblind", client.Get("/sessions/leak/unblind"));
    record("GET next after", client.Get("/sessions/leak/cases/next?evaluator=h2"));
    record("GET unknown", client.Get("/sessions/nope"));
    server.stop();

    std::size_t clean = 0;
    std::string leaks;
    for (const auto& [what, text] : seen) {
        bool leak = text == "no response";
        for (const auto& m : models) leak = leak || text.find(m) != std::string::npos;
        if (leak) leaks += " " + what;
        clean += !leak;
    }
    return {clean == seen.size(), std::to_string(clean) + "/" + std::to_string(seen.size()) + " responses clean" +
                                      (leaks.empty() ? "" : "; leaked:" + leaks)};
}

}  // namespace

int main() {
    criterion("training manifests", "byte-exact", 1, manifests);
    criterion("inference defaults", "exact", 0, inference_defaults);
    criterion("mining contract", "exact", 1, mining);
    criterion("dataset arithmetic", "exact", 0, dataset_arithmetic);
    criterion("blinding uniformity", "chi2 < 49.73 (df=23, p=0.001), inverse exact", 10, blinding_uniformity);
    criterion("rank validation", "exact over 4^4", 1, rank_validation);
    criterion("aggregation oracle", "exact rationals", 5, aggregation_oracle);
    criterion("head-to-head fixture", "65.4% +/- 0.1", 0, head_to_head_fixture);
    criterion("synthesis loop", "exact", 10, synthesis_loop);
    criterion("qc fixture", "exact", 0, qc_fixture);
    criterion("overfit detector", "exact", 0, overfit_detector);
    criterion("serialization", "lossless, exact line numbers", 0, serialization);
    criterion("blind-leak scan", "zero model ids while open", 0, blind_leak);
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
