#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "litpipe/corpus.hpp"

namespace litpipe {

enum class Origin { seed_handwritten, synthetic, mined };

const char* origin_name(Origin o);
Origin parse_origin(const std::string& name);

// The constant instruction attached to every mined abstract.
inline constexpr const char* kMinedInstruction = "Summarize this abstract";

struct InstructionTriplet {
    std::string instruction;
    std::string input;  // may be empty
    std::string output;
    Origin origin = Origin::synthetic;
    std::optional<std::string> source_doc_id;

    // Field-for-field, including origin and source.
    bool operator==(const InstructionTriplet&) const = default;
};

// Throws InvalidArgument when the triplet breaks its invariants.
void validate_triplet(const InstructionTriplet& t);

struct SourceDescriptor {
    std::string name;
    std::size_t count = 0;

    bool operator==(const SourceDescriptor&) const = default;
};

struct Dataset {
    std::string name;
    std::vector<InstructionTriplet> triplets;
    std::vector<SourceDescriptor> created_from;

    std::size_t size() const { return triplets.size(); }
};

struct TripletSource {
    std::string name;
    std::span<const InstructionTriplet> triplets;
};

struct MiningResult {
    std::vector<InstructionTriplet> triplets;
    std::size_t skipped_ineligible = 0;  // documents without a title or abstract
};

// n triplets (kMinedInstruction, abstract, title) from distinct documents
// drawn with the seeded sampler.
MiningResult mine_abstract_triplets(std::span<const Document> docs, std::size_t n,
                                    std::uint64_t seed);
MiningResult mine_abstract_triplets(const Corpus& corpus, std::size_t n, std::uint64_t seed);

// Concatenates sources in order. Throws when every source is empty.
Dataset assemble_dataset(std::string name, std::span<const TripletSource> sources);

// Training-file JSONL: one {"instruction","input","output"} object per line.
std::string triplet_to_jsonl_line(const InstructionTriplet& t);
std::size_t export_jsonl(const Dataset& dataset, const std::string& path);
std::size_t export_jsonl(std::span<const InstructionTriplet> triplets, const std::string& path);
std::string to_jsonl(std::span<const InstructionTriplet> triplets);

// Throws LineError with the 1-based line number on the first bad line.
std::vector<InstructionTriplet> import_jsonl(const std::string& path, Origin origin);
std::vector<InstructionTriplet> parse_jsonl(std::string_view text, Origin origin);

struct UniquenessStats {
    std::size_t unique_instructions = 0;
    std::size_t unique_inputs = 0;
    std::size_t total = 0;

    bool operator==(const UniquenessStats&) const = default;
};

// Distinct strings after trimming surrounding whitespace.
UniquenessStats uniqueness_stats(std::span<const InstructionTriplet> triplets);

// Manifest JSON: name, sources with counts, total, and the SHA-256 of the
// exported training JSONL.
std::string dataset_manifest_json(const Dataset& dataset);

}  // namespace litpipe
