#include "litpipe/corpus.hpp"

#include <nlohmann/json.hpp>

#include "litpipe/csv.hpp"
#include "litpipe/error.hpp"
#include "litpipe/rng.hpp"
#include "litpipe/text.hpp"

namespace litpipe {

using nlohmann::json;

Document make_document(std::string doc_id, std::string title, std::string abstract,
                       std::string source_tag) {
    Document d;
    d.doc_id = std::move(doc_id);
    d.title = std::move(title);
    d.abstract = std::move(abstract);
    d.source_tag = std::move(source_tag);
    d.word_count = count_words(d.abstract);
    return d;
}

std::string IngestStats::to_json() const {
    nlohmann::ordered_json j;
    j["ingested"] = ingested;
    j["skipped"] = skipped;
    j["skip_reasons"] = json::object();
    for (const auto& [reason, n] : skip_reasons) j["skip_reasons"][reason] = n;
    return j.dump();
}

CorpusFormat parse_corpus_format(const std::string& name) {
    if (name == "csv") return CorpusFormat::csv;
    if (name == "jsonl") return CorpusFormat::jsonl;
    throw InvalidArgument("unknown corpus format '" + name + "' (expected csv or jsonl)");
}

CorpusFormat corpus_format_for_path(const std::string& path) {
    auto ends_with = [&](std::string_view suffix) {
        return path.size() >= suffix.size() &&
               to_lower(path.substr(path.size() - suffix.size())) == suffix;
    };
    return ends_with(".csv") ? CorpusFormat::csv : CorpusFormat::jsonl;
}

namespace {

class CorpusBuilder {
public:
    void add(std::string id, std::string title, std::string abstract, std::string source) {
        // Surrounding whitespace is not content; "  " counts as empty.
        if (trim(id).empty()) return skip(skip_reason::kEmptyDocId);
        if (trim(title).empty()) return skip(skip_reason::kEmptyTitle);
        if (trim(abstract).empty()) return skip(skip_reason::kEmptyAbstract);
        std::string key(trim(id));
        if (index_.contains(key)) return skip(skip_reason::kDuplicateDocId);
        index_.emplace(key, docs_.size());
        docs_.push_back(make_document(std::move(key), std::string(trim(title)),
                                      std::string(trim(abstract)), std::move(source)));
        ++stats_.ingested;
    }

    void skip(const char* reason) {
        ++stats_.skipped;
        ++stats_.skip_reasons[reason];
    }

    std::vector<Document> docs_;
    std::unordered_map<std::string, std::size_t> index_;
    IngestStats stats_;
};

void ingest_csv(std::string_view text, CorpusBuilder& b) {
    auto records = parse_csv(text);
    if (records.empty()) return;
    const auto& header = records.front().fields;
    auto column = [&](std::string_view name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (to_lower(trim(header[i])) == name) return i;
        }
        return std::nullopt;
    };
    auto id_col = column("cord_uid");
    auto title_col = column("title");
    auto abstract_col = column("abstract");
    auto source_col = column("source");
    if (!records.front().well_formed || !id_col || !title_col || !abstract_col) {
        throw Error("corpus CSV header must name cord_uid, title and abstract columns");
    }
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (!rec.well_formed || rec.fields.size() != header.size()) {
            b.skip(skip_reason::kMalformedRow);
            continue;
        }
        b.add(rec.fields[*id_col], rec.fields[*title_col], rec.fields[*abstract_col],
              source_col ? rec.fields[*source_col] : std::string{});
    }
}

void ingest_jsonl(std::string_view text, CorpusBuilder& b) {
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                                  : nl - pos);
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        if (trim(line).empty()) continue;
        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            b.skip(skip_reason::kMalformedRow);
            continue;
        }
        auto field = [&](const char* key) -> std::optional<std::string> {
            auto it = obj.find(key);
            if (it == obj.end() || it->is_null()) return std::string{};
            if (!it->is_string()) return std::nullopt;
            return it->get<std::string>();
        };
        auto id = field("cord_uid");
        auto title = field("title");
        auto abstract = field("abstract");
        auto source = field("source");
        if (!id || !title || !abstract || !source) {
            b.skip(skip_reason::kMalformedRow);
            continue;
        }
        b.add(std::move(*id), std::move(*title), std::move(*abstract), std::move(*source));
    }
}

}  // namespace

Corpus Corpus::from_documents(std::vector<Document> docs, IngestStats* stats) {
    CorpusBuilder b;
    for (auto& d : docs) {
        b.add(std::move(d.doc_id), std::move(d.title), std::move(d.abstract),
              std::move(d.source_tag));
    }
    Corpus c;
    c.docs_ = std::move(b.docs_);
    c.index_ = std::move(b.index_);
    if (stats) *stats = std::move(b.stats_);
    return c;
}

const Document* Corpus::find(const std::string& doc_id) const {
    auto it = index_.find(doc_id);
    return it == index_.end() ? nullptr : &docs_[it->second];
}

IngestResult ingest_corpus_text(std::string_view text, CorpusFormat format) {
    CorpusBuilder b;
    if (format == CorpusFormat::csv) {
        ingest_csv(text, b);
    } else {
        ingest_jsonl(text, b);
    }
    IngestResult out;
    out.corpus = Corpus::from_documents(std::move(b.docs_));
    out.stats = std::move(b.stats_);
    return out;
}

IngestResult ingest_corpus(const std::string& path, CorpusFormat format) {
    return ingest_corpus_text(read_file(path), format);
}

void write_corpus_jsonl(const Corpus& corpus, const std::string& path) {
    std::string out;
    for (const auto& d : corpus.documents()) {
        nlohmann::ordered_json j;
        j["cord_uid"] = d.doc_id;
        j["title"] = d.title;
        j["abstract"] = d.abstract;
        j["source"] = d.source_tag;
        out += j.dump(-1, ' ', false, json::error_handler_t::replace);
        out += '\n';
    }
    write_file(path, out);
}

std::vector<Document> sample_abstracts(const Corpus& corpus, std::size_t n, std::uint64_t seed,
                                       std::size_t min_words, std::size_t max_words) {
    if (min_words > max_words) throw InvalidArgument("sample_abstracts: min_words > max_words");
    std::vector<const Document*> pool;
    for (const auto& d : corpus.documents()) {
        if (d.eligible() && d.word_count >= min_words && d.word_count <= max_words) {
            pool.push_back(&d);
        }
    }
    if (n > pool.size()) {
        throw InvalidArgument("sample_abstracts: requested " + std::to_string(n) +
                              " documents but only " + std::to_string(pool.size()) +
                              " are eligible in the word window");
    }
    Rng rng(seed);
    std::vector<Document> out;
    out.reserve(n);
    for (auto i : rng.sample_indices(pool.size(), n)) out.push_back(*pool[i]);
    return out;
}

}  // namespace litpipe
