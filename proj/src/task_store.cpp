#include "litpipe/task_store.hpp"

#include <set>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "litpipe/digest.hpp"
#include "litpipe/error.hpp"
#include "litpipe/rng.hpp"
#include "litpipe/text.hpp"

namespace litpipe {

using nlohmann::json;
using nlohmann::ordered_json;

const char* origin_name(Origin o) {
    switch (o) {
        case Origin::seed_handwritten: return "seed_handwritten";
        case Origin::synthetic: return "synthetic";
        case Origin::mined: return "mined";
    }
    return "synthetic";
}

Origin parse_origin(const std::string& name) {
    if (name == "seed_handwritten" || name == "seed") return Origin::seed_handwritten;
    if (name == "synthetic") return Origin::synthetic;
    if (name == "mined") return Origin::mined;
    throw InvalidArgument("unknown origin '" + name + "'");
}

void validate_triplet(const InstructionTriplet& t) {
    if (trim(t.instruction).empty()) throw InvalidArgument("triplet has an empty instruction");
    if (trim(t.output).empty()) throw InvalidArgument("triplet has an empty output");
    if (t.origin == Origin::mined) {
        if (!t.source_doc_id) throw InvalidArgument("mined triplet lacks a source document id");
        if (t.instruction != kMinedInstruction) {
            throw InvalidArgument("mined triplet must use the instruction \"" +
                                  std::string(kMinedInstruction) + "\"");
        }
    }
}

MiningResult mine_abstract_triplets(std::span<const Document> docs, std::size_t n,
                                    std::uint64_t seed) {
    MiningResult out;
    std::vector<const Document*> pool;
    for (const auto& d : docs) {
        if (d.eligible()) {
            pool.push_back(&d);
        } else {
            ++out.skipped_ineligible;
        }
    }
    if (n > pool.size()) {
        throw InvalidArgument("mine_abstract_triplets: requested " + std::to_string(n) +
                              " triplets but only " + std::to_string(pool.size()) +
                              " documents have both a title and an abstract");
    }
    Rng rng(seed);
    out.triplets.reserve(n);
    for (auto i : rng.sample_indices(pool.size(), n)) {
        const Document& d = *pool[i];
        out.triplets.push_back(
            InstructionTriplet{kMinedInstruction, d.abstract, d.title, Origin::mined, d.doc_id});
    }
    return out;
}

MiningResult mine_abstract_triplets(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
    return mine_abstract_triplets(corpus.documents(), n, seed);
}

Dataset assemble_dataset(std::string name, std::span<const TripletSource> sources) {
    Dataset ds;
    ds.name = std::move(name);
    std::size_t total = 0;
    for (const auto& s : sources) total += s.triplets.size();
    if (total == 0) throw InvalidArgument("assemble_dataset: every source is empty");
    ds.triplets.reserve(total);
    for (const auto& s : sources) {
        ds.triplets.insert(ds.triplets.end(), s.triplets.begin(), s.triplets.end());
        ds.created_from.push_back({s.name, s.triplets.size()});
    }
    return ds;
}

std::string triplet_to_jsonl_line(const InstructionTriplet& t) {
    ordered_json j;
    j["instruction"] = t.instruction;
    j["input"] = t.input;
    j["output"] = t.output;
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string to_jsonl(std::span<const InstructionTriplet> triplets) {
    std::string out;
    for (const auto& t : triplets) {
        out += triplet_to_jsonl_line(t);
        out += '\n';
    }
    return out;
}

std::size_t export_jsonl(std::span<const InstructionTriplet> triplets, const std::string& path) {
    write_file(path, to_jsonl(triplets));
    return triplets.size();
}

std::size_t export_jsonl(const Dataset& dataset, const std::string& path) {
    return export_jsonl(dataset.triplets, path);
}

std::vector<InstructionTriplet> parse_jsonl(std::string_view text, Origin origin) {
    std::vector<InstructionTriplet> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                                  : nl - pos);
        pos = (nl == std::string_view::npos) ? text.size() : nl + 1;
        ++line_no;
        if (trim(line).empty()) continue;

        json obj = json::parse(line, nullptr, false);
        if (obj.is_discarded()) throw LineError(line_no, "malformed JSON");
        if (!obj.is_object()) throw LineError(line_no, "expected a JSON object");
        auto get = [&](const char* key, bool required) -> std::string {
            auto it = obj.find(key);
            if (it == obj.end()) {
                if (!required) return {};
                throw LineError(line_no, std::string("missing key \"") + key + "\"");
            }
            if (!it->is_string()) {
                throw LineError(line_no, std::string("key \"") + key + "\" must be a string");
            }
            return it->get<std::string>();
        };
        InstructionTriplet t;
        t.instruction = get("instruction", true);
        t.input = get("input", true);
        t.output = get("output", true);
        t.origin = origin;
        if (auto it = obj.find("source_doc_id"); it != obj.end() && it->is_string()) {
            t.source_doc_id = it->get<std::string>();
        }
        if (trim(t.instruction).empty()) throw LineError(line_no, "empty instruction");
        if (trim(t.output).empty()) throw LineError(line_no, "empty output");
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<InstructionTriplet> import_jsonl(const std::string& path, Origin origin) {
    return parse_jsonl(read_file(path), origin);
}

UniquenessStats uniqueness_stats(std::span<const InstructionTriplet> triplets) {
    std::unordered_set<std::string_view> instructions;
    std::unordered_set<std::string_view> inputs;
    for (const auto& t : triplets) {
        instructions.insert(trim(t.instruction));
        inputs.insert(trim(t.input));
    }
    return {instructions.size(), inputs.size(), triplets.size()};
}

std::string dataset_manifest_json(const Dataset& dataset) {
    ordered_json j;
    j["name"] = dataset.name;
    j["sources"] = json::array();
    for (const auto& s : dataset.created_from) {
        ordered_json src;
        src["name"] = s.name;
        src["count"] = s.count;
        j["sources"].push_back(src);
    }
    j["total"] = dataset.size();
    j["sha256"] = sha256_hex(to_jsonl(dataset.triplets));
    return j.dump(2);
}

}  // namespace litpipe
