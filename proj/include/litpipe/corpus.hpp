#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace litpipe {

struct Document {
    std::string doc_id;
    std::string title;
    std::string abstract;
    std::string source_tag;
    std::size_t word_count = 0;  // count_words(abstract)

    bool eligible() const { return !title.empty() && !abstract.empty(); }
};

// Builds a Document and derives word_count from the abstract.
Document make_document(std::string doc_id, std::string title, std::string abstract,
                       std::string source_tag = {});

struct IngestStats {
    std::size_t ingested = 0;
    std::size_t skipped = 0;
    std::map<std::string, std::size_t> skip_reasons;

    std::string to_json() const;
};

// Skip reasons recorded by ingest_corpus.
namespace skip_reason {
inline constexpr const char* kMalformedRow = "malformed_row";
inline constexpr const char* kEmptyDocId = "empty_doc_id";
inline constexpr const char* kEmptyTitle = "empty_title";
inline constexpr const char* kEmptyAbstract = "empty_abstract";
inline constexpr const char* kDuplicateDocId = "duplicate_doc_id";
}  // namespace skip_reason

enum class CorpusFormat { csv, jsonl };

CorpusFormat parse_corpus_format(const std::string& name);
// csv for *.csv, jsonl otherwise.
CorpusFormat corpus_format_for_path(const std::string& path);

// Immutable collection of validated documents in ingestion order.
class Corpus {
public:
    Corpus() = default;

    // Applies the same validation as ingestion: empty fields and duplicate
    // ids are skipped (first occurrence wins) and counted in the stats.
    static Corpus from_documents(std::vector<Document> docs, IngestStats* stats = nullptr);

    std::span<const Document> documents() const { return docs_; }
    std::size_t size() const { return docs_.size(); }
    const Document* find(const std::string& doc_id) const;

private:
    std::vector<Document> docs_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct IngestResult {
    Corpus corpus;
    IngestStats stats;
};

// CSV needs a header with cord_uid, title, abstract (source optional, extra
// columns ignored). JSONL carries one object per line with the same keys.
// A missing or unreadable file throws IoError; bad records are skipped.
IngestResult ingest_corpus(const std::string& path, CorpusFormat format);
IngestResult ingest_corpus_text(std::string_view text, CorpusFormat format);

// Writes the corpus as JSONL with keys cord_uid, title, abstract, source.
void write_corpus_jsonl(const Corpus& corpus, const std::string& path);

// n distinct documents with min_words <= word_count <= max_words, drawn
// without replacement; the order is the draw order and depends only on the
// corpus order and seed.
std::vector<Document> sample_abstracts(const Corpus& corpus, std::size_t n, std::uint64_t seed,
                                       std::size_t min_words = 0,
                                       std::size_t max_words = SIZE_MAX);

}  // namespace litpipe
