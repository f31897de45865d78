#include "litpipe/mock_backend.hpp"

#include <algorithm>
#include <array>
#include <regex>
#include <set>

#include <httplib.h>

#include "litpipe/digest.hpp"
#include "litpipe/ranking.hpp"
#include "litpipe/rng.hpp"

namespace litpipe {

using nlohmann::json;

namespace {

constexpr std::array kVerbs = {
    "Summarize", "Identify", "Describe",  "Extract", "List",    "Explain",  "Evaluate",
    "Determine", "Compare",  "Assess",    "Outline", "Classify", "Highlight", "Report",
    "Discuss",   "Critique", "Paraphrase", "Name",   "State",   "Interpret"};

constexpr std::array kSubjects = {
    "the sample population",     "the primary outcome",      "the study design",
    "the key findings",          "the statistical methods",  "the main limitations",
    "any biological pathways",   "the main conclusion",      "the intervention studied",
    "the clinical implications", "the risk factors",         "the comparison groups",
    "the data sources",          "the reported effect sizes", "any chemical compounds",
    "the research question",     "the follow-up period",     "the inclusion criteria",
    "the viral variants",        "the vaccine outcomes"};

constexpr std::array kTopics = {
    "pediatric patients",       "nursing home residents",  "healthcare workers",
    "pregnant women",           "intensive care admissions", "long covid symptoms",
    "vaccine hesitancy",        "antiviral therapy",       "mask mandates",
    "school closures",          "viral shedding",          "airborne transmission",
    "spike protein mutations",  "t cell immunity",         "neutralizing antibodies",
    "cytokine storm",           "thrombotic complications", "olfactory dysfunction",
    "mental health burden",     "telemedicine adoption",   "contact tracing apps",
    "hospital capacity",        "oxygen supplementation",  "corticosteroid treatment",
    "monoclonal antibodies",    "booster doses",           "seroprevalence surveys",
    "wastewater surveillance",  "rural communities",       "elderly adults",
    "diabetic patients",        "obesity comorbidity",     "kidney injury",
    "cardiac outcomes",         "genomic sequencing",      "rapid antigen tests",
    "social distancing",        "travel restrictions",     "case fatality",
    "reinfection risk"};

constexpr std::array kQualifiers = {
    "described in the abstract",   "reported by the authors",  "in one sentence",
    "in two sentences",            "for a clinician audience", "using bullet points",
    "in plain language",           "with supporting numbers",  "and explain their relevance",
    "as a short list",             "for a policy maker",       "without technical jargon",
    "and note any uncertainty",    "based only on the text",   "in under fifty words",
    "from the methods section"};

constexpr std::array kBackground = {
    "background coronavirus disease continues to burden health systems worldwide",
    "the pandemic created urgent need for evidence on transmission and treatment",
    "sars-cov-2 infection produces heterogeneous clinical presentations across age groups",
    "previous studies offered limited data on long term respiratory outcomes",
    "little is known about immune responses in vaccinated healthcare workers"};

constexpr std::array kMethods = {
    "methods we conducted a cross-sectional survey of hospital clinicians",
    "methods we performed a retrospective cohort analysis of admitted patients",
    "methods this review summarizes published literature from major databases",
    "methods we developed a novel method for rapid detection of viral rna",
    "methods we ran a randomized controlled trial comparing two antiviral regimens",
    "methods we describe a case report of a patient with severe pneumonia",
    "methods samples were collected and analyzed using regression models",
    "methods participants were enrolled across three tertiary care centers"};

constexpr std::array kResults = {
    "results the intervention reduced hospitalization rates compared with controls",
    "results we found significant associations between age and disease severity",
    "results viral load declined faster among treated participants",
    "results antibody titers were higher after the second dose",
    "results mortality was lower in the early treatment group"};

constexpr std::array kConclusions = {
    "conclusions these findings suggest targeted therapy may improve outcomes",
    "conclusions our results support continued vaccination campaigns",
    "conclusions further studies are needed to confirm these observations",
    "conclusions this approach could help clinicians triage patients efficiently"};

constexpr std::array kFiller = {
    "patients", "cohort",     "clinical",  "outcomes", "infection", "respiratory",
    "severity", "treatment",  "analysis",  "data",     "hospital",  "immune",
    "response", "antibodies", "variants",  "symptoms", "public",    "health",
    "risk",     "model",      "evidence",  "protein",  "receptor",  "cells"};

template <typename Array>
const char* pick(Rng& rng, const Array& a) {
    return a[static_cast<std::size_t>(rng.uniform_below(a.size()))];
}

bool chance(Rng& rng, double p) {
    if (p <= 0.0) return false;
    return static_cast<double>(rng.uniform_below(1'000'000)) < p * 1'000'000.0;
}

std::string capitalize(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

void append_words(std::vector<std::string>& out, std::string_view sentence) {
    std::size_t i = 0;
    while (i < sentence.size()) {
        auto j = sentence.find(' ', i);
        if (j == std::string_view::npos) j = sentence.size();
        if (j > i) out.emplace_back(sentence.substr(i, j - i));
        i = j + 1;
    }
}

// An abstract of exactly `words` whitespace tokens with background, methods,
// results and conclusions sections.
std::string make_abstract(Rng& rng, std::size_t words) {
    const std::array<const char*, 4> openers = {pick(rng, kBackground), pick(rng, kMethods),
                                                pick(rng, kResults), pick(rng, kConclusions)};
    std::string out;
    std::size_t used = 0;
    for (std::size_t s = 0; s < 4; ++s) {
        std::size_t budget = (s == 3) ? words - used : words / 4;
        std::vector<std::string> section;
        append_words(section, openers[s]);
        while (section.size() < budget) section.emplace_back(pick(rng, kFiller));
        section.resize(budget);
        for (std::size_t w = 0; w < section.size(); ++w) {
            std::string tok = section[w];
            if (w == 0) tok = capitalize(tok);
            if (w + 1 == section.size()) tok += '.';
            if (!out.empty()) out += ' ';
            out += tok;
        }
        used += budget;
    }
    return out;
}

std::string make_prose(Rng& rng) {
    std::string out;
    auto sentences = 2 + rng.uniform_below(2);
    for (std::uint64_t i = 0; i < sentences; ++i) {
        std::vector<std::string> words;
        append_words(words, pick(rng, kResults));
        auto extra = 3 + rng.uniform_below(6);
        for (std::uint64_t w = 0; w < extra; ++w) words.emplace_back(pick(rng, kFiller));
        words.erase(words.begin());  // drop the section word
        std::string sentence;
        for (const auto& w : words) {
            if (!sentence.empty()) sentence += ' ';
            sentence += w;
        }
        if (!out.empty()) out += ' ';
        out += capitalize(sentence) + '.';
    }
    return out;
}

std::string synthesize_tasks(Rng& rng, std::size_t n, std::size_t min_words, std::size_t max_words,
                             const MockOptions& options) {
    std::string out;
    for (std::size_t i = 0; i < n; ++i) {
        std::string instruction = std::string(pick(rng, kVerbs)) + " " + pick(rng, kSubjects) +
                                  " for " + pick(rng, kTopics) + " " + pick(rng, kQualifiers) + ".";
        std::size_t words = min_words + rng.uniform_below(max_words - min_words + 1);
        if (chance(rng, options.out_of_window_rate)) {
            words = min_words > 40 ? min_words / 2 : max_words + 50;
        }
        bool malformed = chance(rng, options.malformed_rate);
        out += "Task " + std::to_string(i + 1) + "\n";
        out += "### Instruction:\n" + instruction + "\n";
        out += "### Input:\n" + make_abstract(rng, std::max<std::size_t>(words, 1)) + "\n";
        if (!malformed) out += "### Output:\n" + make_prose(rng) + "\n";
        out += "\n";
    }
    return out;
}

std::string judge_reply(Rng& rng, const std::vector<char>& labels) {
    std::vector<int> scores;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        scores.push_back(static_cast<int>(rng.uniform_below(3)));
    }
    auto ranks = competition_ranks_from_scores(scores);
    static constexpr std::array kGrades = {"Fail", "Pass", "Excellent"};
    nlohmann::ordered_json j;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        j["ranks"][std::string(1, labels[i])] = ranks[i];
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        j["grades"][std::string(1, labels[i])] = kGrades[static_cast<std::size_t>(scores[i])];
    }
    return j.dump();
}

}  // namespace

std::uint64_t mock_request_digest(const ChatRequest& request) {
    std::string canon;
    for (const auto& m : request.messages) {
        canon += m.role;
        canon.push_back('\0');
        canon += m.content;
        canon.push_back('\0');
    }
    // The optional sampling seed plays the role of temperature sampling.
    if (auto it = request.params.find("seed"); it != request.params.end()) {
        canon += "seed=" + it->dump();
    }
    return sha256_prefix64(canon);
}

std::string MockChatBackend::complete(const ChatRequest& request) {
    Rng rng(mock_request_digest(request));
    std::string all;
    for (const auto& m : request.messages) {
        all += m.content;
        all += '\n';
    }

    static const std::regex kTaskCount(R"(new tasks to write: (\d+))");
    static const std::regex kWindow(R"((\d+)-(\d+) word abstract)");
    std::smatch count_m;
    std::smatch window_m;
    if (std::regex_search(all, count_m, kTaskCount) && std::regex_search(all, window_m, kWindow)) {
        auto n = std::stoul(count_m[1]);
        auto lo = std::stoul(window_m[1]);
        auto hi = std::stoul(window_m[2]);
        if (hi < lo) std::swap(lo, hi);
        return synthesize_tasks(rng, n, lo, hi, options_);
    }

    static const std::regex kLabel(R"(\[Response ([A-Z])\])");
    std::set<char> seen;
    std::vector<char> labels;
    for (auto it = std::sregex_iterator(all.begin(), all.end(), kLabel);
         it != std::sregex_iterator(); ++it) {
        char c = (*it)[1].str()[0];
        if (seen.insert(c).second) labels.push_back(c);
    }
    if (!labels.empty()) {
        std::sort(labels.begin(), labels.end());
        return judge_reply(rng, labels);
    }

    return make_prose(rng);
}

struct MockBackendServer::Impl {
    MockOptions options;
    httplib::Server server;
    std::thread thread;
    std::string host = "127.0.0.1";
    int port = 0;
    mutable std::mutex mu;
    std::vector<json> requests;
};

MockBackendServer::MockBackendServer(MockOptions options) : impl_(std::make_unique<Impl>()) {
    impl_->options = options;
    auto handler = [impl = impl_.get()](const httplib::Request& req, httplib::Response& res) {
        json body = json::parse(req.body, nullptr, false);
        if (body.is_discarded()) {
            res.status = 400;
            res.set_content(R"({"error":{"message":"body is not JSON"}})", "application/json");
            return;
        }
        {
            std::lock_guard lock(impl->mu);
            impl->requests.push_back(body);
        }
        try {
            auto request = request_from_json(body);
            MockChatBackend backend(impl->options);
            auto content = backend.complete(request);
            res.set_content(completion_json(request.model, content).dump(), "application/json");
        } catch (const std::exception& e) {
            res.status = 400;
            json err = {{"error", {{"message", e.what()}}}};
            res.set_content(err.dump(), "application/json");
        }
    };
    impl_->server.Post("/chat/completions", handler);
    impl_->server.Post("/v1/chat/completions", handler);
}

MockBackendServer::~MockBackendServer() { stop(); }

int MockBackendServer::start(const std::string& host, int port) {
    impl_->host = host;
    if (port == 0) {
        impl_->port = impl_->server.bind_to_any_port(host);
    } else {
        impl_->port = impl_->server.bind_to_port(host, port) ? port : -1;
    }
    if (impl_->port < 0) throw Error("mock backend: cannot bind " + host);
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->port;
}

void MockBackendServer::serve_forever(const std::string& host, int port) {
    impl_->host = host;
    impl_->port = port;
    if (!impl_->server.listen(host, port)) {
        throw Error("mock backend: cannot listen on " + host + ":" + std::to_string(port));
    }
}

void MockBackendServer::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

std::string MockBackendServer::base_url() const {
    return "http://" + impl_->host + ":" + std::to_string(impl_->port) + "/v1";
}

std::vector<json> MockBackendServer::recorded_requests() const {
    std::lock_guard lock(impl_->mu);
    return impl_->requests;
}

}  // namespace litpipe
