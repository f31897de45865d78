#include "litpipe/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "litpipe/aggregate.hpp"
#include "litpipe/config.hpp"
#include "litpipe/corpus.hpp"
#include "litpipe/embedded_data.hpp"
#include "litpipe/eval_server.hpp"
#include "litpipe/finetune.hpp"
#include "litpipe/inference.hpp"
#include "litpipe/llm_judge.hpp"
#include "litpipe/mock_backend.hpp"
#include "litpipe/qc.hpp"
#include "litpipe/synthesis.hpp"
#include "litpipe/task_store.hpp"
#include "litpipe/text.hpp"

namespace litpipe::cli {

namespace fs = std::filesystem;

namespace {

// Flags shared by subcommands that talk to a chat backend; unset flags fall
// back to the config section.
struct BackendFlags {
    std::string base_url;
    std::string model_name;
    std::string api_key_env;
    std::optional<std::size_t> parallelism;
    std::optional<int> max_retries;

    void add_to(CLI::App* app) {
        app->add_option("--backend-url", base_url, "Chat-completions base URL or mock://name");
        app->add_option("--model-name", model_name, "Model name sent in requests");
        app->add_option("--api-key-env", api_key_env, "Environment variable holding the API key");
        app->add_option("--parallelism", parallelism, "Requests in flight")->check(CLI::PositiveNumber);
        app->add_option("--max-retries", max_retries, "Retries for transient failures")
            ->check(CLI::NonNegativeNumber);
    }

    ChatBackendConfig resolve(const RunConfig& rc, const std::string& section) const {
        auto c = rc.backend(section);
        if (!base_url.empty()) c.base_url = base_url;
        if (!model_name.empty()) c.model_name = model_name;
        if (!api_key_env.empty()) c.api_key_env = api_key_env;
        if (parallelism) c.parallelism = *parallelism;
        if (max_retries) c.max_retries = *max_retries;
        c.validate();
        return c;
    }
};

std::uint64_t seed_or_default(const std::optional<std::uint64_t>& flag, const RunConfig& rc) {
    return flag ? *flag : rc.get_u64("seed", kDefaultSeed);
}

void ensure_parent(const std::string& path) {
    auto parent = fs::path(path).parent_path();
    if (!parent.empty()) fs::create_directories(parent);
}

void write_output(const std::string& path, std::string_view contents, std::ostream& out) {
    ensure_parent(path);
    write_file(path, contents);
    out << path << "\n";
}

std::vector<std::string> read_lines(const std::string& path) {
    std::vector<std::string> lines;
    auto text = read_file(path);
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = trim(std::string_view(text).substr(pos, nl == std::string::npos ? std::string::npos : nl - pos));
        if (!line.empty()) lines.emplace_back(line);
        pos = nl == std::string::npos ? text.size() : nl + 1;
    }
    return lines;
}

std::pair<std::string, std::string> split_once(const std::string& s, char sep, const std::string& what) {
    auto p = s.find(sep);
    if (p == std::string::npos || p == 0 || p + 1 == s.size()) {
        throw CLI::ValidationError(what, "expected name" + std::string(1, sep) + "value, got '" + s + "'");
    }
    return {s.substr(0, p), s.substr(p + 1)};
}

Evaluator parse_evaluator_flag(const std::string& s) {
    auto p = s.rfind(':');
    if (p == std::string::npos) return {s, EvaluatorKind::human};
    return {s.substr(0, p), parse_evaluator_kind(s.substr(p + 1))};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"litpipe: biomedical instruction-tuning dataset toolkit", "litpipe"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    std::optional<std::string> config_path;
    std::string log_level = "warn";
    app.add_option("--config", config_path, "key=value config file (default: $LITPIPE_CONFIG)");
    app.add_option("--log-level", log_level, "trace|debug|info|warn|error|off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

    std::function<int(const RunConfig&)> action;

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Load a CSV or JSONL corpus, dropping invalid records");
    std::string ingest_in, ingest_format, ingest_out, ingest_stats;
    ingest->add_option("--input", ingest_in, "Corpus file")->required();
    ingest->add_option("--format", ingest_format, "csv|jsonl (default: by extension)")
        ->check(CLI::IsMember({"csv", "jsonl"}));
    ingest->add_option("--out", ingest_out, "Normalized corpus JSONL")->required();
    ingest->add_option("--stats", ingest_stats, "Ingest statistics JSON");
    ingest->callback([&] {
        action = [&](const RunConfig&) {
            auto fmt = ingest_format.empty() ? corpus_format_for_path(ingest_in) : parse_corpus_format(ingest_format);
            auto res = ingest_corpus(ingest_in, fmt);
            ensure_parent(ingest_out);
            write_corpus_jsonl(res.corpus, ingest_out);
            out << ingest_out << "\n";
            if (!ingest_stats.empty()) write_output(ingest_stats, res.stats.to_json() + "\n", out);
            err << "ingested " << res.stats.ingested << ", skipped " << res.stats.skipped << "\n";
            return kExitOk;
        };
    });

    // sample
    auto* sample = app.add_subcommand("sample", "Draw abstracts from an ingested corpus");
    std::string sample_corpus, sample_out;
    std::size_t sample_n = 0, sample_min = 0, sample_max = SIZE_MAX;
    std::optional<std::uint64_t> sample_seed;
    sample->add_option("--corpus", sample_corpus, "Corpus JSONL from ingest")->required();
    sample->add_option("-n,--count", sample_n, "Documents to draw")->required();
    sample->add_option("--min-words", sample_min, "Minimum abstract length");
    sample->add_option("--max-words", sample_max, "Maximum abstract length");
    sample->add_option("--seed", sample_seed, "Sampling seed");
    sample->add_option("--out", sample_out, "Sample JSONL")->required();
    sample->callback([&] {
        action = [&](const RunConfig& rc) {
            auto corpus = ingest_corpus(sample_corpus, CorpusFormat::jsonl).corpus;
            auto docs = sample_abstracts(corpus, sample_n, seed_or_default(sample_seed, rc), sample_min, sample_max);
            auto picked = Corpus::from_documents(std::move(docs));
            ensure_parent(sample_out);
            write_corpus_jsonl(picked, sample_out);
            out << sample_out << "\n";
            return kExitOk;
        };
    });

    // seed-outputs
    auto* seed_outputs = app.add_subcommand("seed-outputs", "Have a model answer handwritten instructions over abstracts");
    std::string so_instructions, so_abstracts, so_out, so_errors;
    BackendFlags so_backend;
    seed_outputs->add_option("--instructions", so_instructions, "One instruction per line")->required();
    seed_outputs->add_option("--abstracts", so_abstracts, "Abstract JSONL from sample")->required();
    seed_outputs->add_option("--out", so_out, "Seed triplet JSONL")->required();
    seed_outputs->add_option("--errors", so_errors, "Failed pairs as JSON");
    so_backend.add_to(seed_outputs);
    seed_outputs->callback([&] {
        action = [&](const RunConfig& rc) {
            auto cfg = so_backend.resolve(rc, "seed");
            auto instructions = read_lines(so_instructions);
            auto docs = ingest_corpus(so_abstracts, CorpusFormat::jsonl).corpus;
            auto pairs = pair_instructions(instructions, docs.documents());
            auto backend = make_backend(cfg);
            auto result = generate_seed_outputs(pairs, *backend, cfg);
            write_output(so_out, to_jsonl(result.triplets), out);
            if (!so_errors.empty()) {
                nlohmann::ordered_json j = nlohmann::ordered_json::array();
                for (const auto& e : result.errors) j.push_back({{"index", e.index}, {"error", e.message}});
                write_output(so_errors, j.dump(2) + "\n", out);
            }
            for (const auto& e : result.errors) err << "pair " << e.index << ": " << e.message << "\n";
            return result.errors.empty() ? kExitOk : kExitFailure;
        };
    });

    // synthesize
    auto* synth = app.add_subcommand("synthesize", "Grow a synthetic dataset from seed triplets");
    std::string syn_seeds, syn_out, syn_summary, syn_rejected;
    std::size_t syn_n = 0;
    std::optional<std::uint64_t> syn_seed;
    SynthesisOptions syn_opts;
    BackendFlags syn_backend;
    synth->add_option("--seeds", syn_seeds, "Seed triplet JSONL")->required();
    synth->add_option("-n,--count", syn_n, "Tasks to accept")->required()->check(CLI::PositiveNumber);
    synth->add_option("--seed", syn_seed, "Run seed");
    synth->add_option("--out", syn_out, "Synthetic triplet JSONL")->required();
    synth->add_option("--summary", syn_summary, "Run summary JSON");
    synth->add_option("--min-words", syn_opts.window.min_words, "Input word window lower bound");
    synth->add_option("--max-words", syn_opts.window.max_words, "Input word window upper bound");
    synth->add_option("--in-context", syn_opts.in_context_seeds, "Seed examples per prompt");
    synth->add_option("--tasks-per-request", syn_opts.tasks_per_request, "Tasks requested per call");
    synth->add_option("--budget", syn_opts.request_budget, "Request budget (0 = automatic)");
    synth->add_option("--dedup-threshold", syn_opts.dedup_threshold, "Near-duplicate Jaccard threshold")
        ->check(CLI::Range(0.0, 1.0));
    syn_backend.add_to(synth);
    synth->callback([&] {
        action = [&](const RunConfig& rc) {
            auto cfg = syn_backend.resolve(rc, "synthesis");
            auto seeds = import_jsonl(syn_seeds, Origin::seed_handwritten);
            auto backend = make_backend(cfg);
            auto run = synthesize_batch(seeds, syn_n, *backend, cfg, seed_or_default(syn_seed, rc), syn_opts);
            write_output(syn_out, to_jsonl(run.accepted), out);
            if (!syn_summary.empty()) write_output(syn_summary, synthesis_run_summary_json(run) + "\n", out);
            if (run.budget_exhausted) {
                err << "request budget exhausted: accepted " << run.accepted.size() << " of " << syn_n << "\n";
                return kExitFailure;
            }
            return kExitOk;
        };
    });

    // mine
    auto* mine = app.add_subcommand("mine", "Turn abstracts into summarization triplets");
    std::string mine_corpus, mine_out;
    std::size_t mine_n = 0;
    std::optional<std::uint64_t> mine_seed;
    mine->add_option("--corpus", mine_corpus, "Corpus JSONL from ingest")->required();
    mine->add_option("-n,--count", mine_n, "Triplets to mine")->required();
    mine->add_option("--seed", mine_seed, "Sampling seed");
    mine->add_option("--out", mine_out, "Mined triplet JSONL")->required();
    mine->callback([&] {
        action = [&](const RunConfig& rc) {
            auto corpus = ingest_corpus(mine_corpus, CorpusFormat::jsonl).corpus;
            auto res = mine_abstract_triplets(corpus, mine_n, seed_or_default(mine_seed, rc));
            write_output(mine_out, to_jsonl(res.triplets), out);
            return kExitOk;
        };
    });

    // qc
    auto* qc = app.add_subcommand("qc", "Quality report for a triplet dataset");
    std::string qc_dataset, qc_out, qc_plot, qc_rules_path;
    std::size_t qc_sample = 120;
    std::optional<std::uint64_t> qc_seed;
    qc->add_option("--dataset", qc_dataset, "Triplet JSONL")->required();
    qc->add_option("--sample", qc_sample, "Inputs sampled for completeness and study design");
    qc->add_option("--seed", qc_seed, "Sampling seed");
    qc->add_option("--rules", qc_rules_path, "QC rules JSON (default: built-in)");
    qc->add_option("--out", qc_out, "Report JSON (default: standard output)");
    qc->add_option("--plot-csv", qc_plot, "Histogram rows for plotting");
    qc->callback([&] {
        action = [&](const RunConfig& rc) {
            auto data = import_jsonl(qc_dataset, Origin::synthetic);
            auto rules = qc_rules_path.empty() ? QcRules::defaults() : QcRules::load(qc_rules_path);
            auto report = qc_report(data, qc_sample, seed_or_default(qc_seed, rc), rules);
            if (qc_out.empty()) {
                out << report.to_json() << "\n";
            } else {
                write_output(qc_out, report.to_json() + "\n", out);
            }
            if (!qc_plot.empty()) write_output(qc_plot, report.to_plot_csv(), out);
            return kExitOk;
        };
    });

    // dataset assemble|export
    auto* dataset = app.add_subcommand("dataset", "Assemble or export training datasets");
    dataset->require_subcommand(1);
    auto* assemble = dataset->add_subcommand("assemble", "Concatenate named triplet files");
    std::string asm_name, asm_out, asm_manifest;
    std::vector<std::string> asm_sources;
    assemble->add_option("--name", asm_name, "Dataset name")->required();
    assemble->add_option("--source", asm_sources, "name=path, in order")->required();
    assemble->add_option("--out", asm_out, "Training JSONL")->required();
    assemble->add_option("--manifest", asm_manifest, "Dataset manifest JSON");
    assemble->callback([&] {
        action = [&](const RunConfig&) {
            std::vector<std::pair<std::string, std::vector<InstructionTriplet>>> loaded;
            for (const auto& s : asm_sources) {
                auto [name, path] = split_once(s, '=', "--source");
                loaded.emplace_back(name, import_jsonl(path, Origin::synthetic));
            }
            std::vector<TripletSource> sources;
            for (const auto& [name, ts] : loaded) sources.push_back({name, ts});
            auto ds = assemble_dataset(asm_name, sources);
            ensure_parent(asm_out);
            export_jsonl(ds, asm_out);
            out << asm_out << "\n";
            if (!asm_manifest.empty()) write_output(asm_manifest, dataset_manifest_json(ds) + "\n", out);
            err << "total " << ds.size() << "\n";
            return kExitOk;
        };
    });
    auto* exporter = dataset->add_subcommand("export", "Validate a triplet file and rewrite it in training format");
    std::string exp_in, exp_out;
    exporter->add_option("--input", exp_in, "Triplet JSONL")->required();
    exporter->add_option("--out", exp_out, "Training JSONL")->required();
    exporter->callback([&] {
        action = [&](const RunConfig&) {
            auto ts = import_jsonl(exp_in, Origin::synthetic);
            ensure_parent(exp_out);
            export_jsonl(ts, exp_out);
            out << exp_out << "\n";
            return kExitOk;
        };
    });

    // manifest
    auto* manifest = app.add_subcommand("manifest", "Write a fine-tuning manifest for a recipe");
    std::string man_recipe, man_out, man_base = "llama-7b";
    std::vector<std::string> man_refs;
    manifest->add_option("--recipe", man_recipe, "alpaca_plus_syncovid|syncovid_only|syncovid_plus_abstracts")
        ->required()
        ->check(CLI::IsMember({"alpaca_plus_syncovid", "syncovid_only", "syncovid_plus_abstracts"}));
    manifest->add_option("--dataset", man_refs, "name:count, one per source")->required();
    manifest->add_option("--base-model", man_base, "Base model identifier");
    manifest->add_option("--out", man_out, "Manifest path (default: <recipe>.manifest)");
    manifest->callback([&] {
        action = [&](const RunConfig&) {
            auto recipe = parse_recipe(man_recipe);
            std::vector<SourceDescriptor> refs;
            for (const auto& r : man_refs) {
                auto p = r.rfind(':');
                if (p == std::string::npos || p == 0) throw CLI::ValidationError("--dataset", "expected name:count");
                std::size_t count = 0;
                try {
                    std::size_t used = 0;
                    count = std::stoul(r.substr(p + 1), &used);
                    if (used != r.size() - p - 1) throw std::invalid_argument(r);
                } catch (const std::exception&) {
                    throw CLI::ValidationError("--dataset", "count in '" + r + "' is not a number");
                }
                refs.push_back({r.substr(0, p), count});
            }
            auto m = make_training_manifest(recipe, refs, man_base);
            write_output(man_out.empty() ? man_recipe + ".manifest" : man_out, m.serialize(), out);
            return kExitOk;
        };
    });

    // loss-analyze
    auto* loss = app.add_subcommand("loss-analyze", "Summarize a trainer log and flag overfitting");
    std::string loss_log, loss_out;
    std::size_t loss_patience = 3;
    loss->add_option("--log", loss_log, "step,epoch,train_loss,eval_loss CSV")->required();
    loss->add_option("--patience", loss_patience, "Consecutive eval-loss rises")->check(CLI::PositiveNumber);
    loss->add_option("--out", loss_out, "Summary JSON (default: standard output)");
    loss->callback([&] {
        action = [&](const RunConfig&) {
            auto curve = parse_trainer_log(loss_log);
            auto verdict = detect_overfit(curve, loss_patience);
            auto summary = loss_summary_json(curve, verdict, loss_patience);
            if (loss_out.empty()) {
                out << summary << "\n";
            } else {
                write_output(loss_out, summary + "\n", out);
            }
            return kExitOk;
        };
    });

    // generate
    auto* generate = app.add_subcommand("generate", "Collect responses from candidate and reference models");
    std::string gen_cases, gen_out_dir;
    std::vector<std::string> gen_models;
    std::size_t gen_parallelism = 1;
    InferenceConfig gen_cfg;
    generate->add_option("--cases", gen_cases, "Prompt case JSONL")->required();
    generate->add_option("--model", gen_models, "ID:ROLE:URL (ROLE = candidate|reference)")->required();
    generate->add_option("--out-dir", gen_out_dir, "Directory for responses.jsonl and manifest.json")->required();
    generate->add_option("--parallelism", gen_parallelism, "Requests in flight")->check(CLI::PositiveNumber);
    generate->add_option("--temperature", gen_cfg.temperature, "Sampling temperature");
    generate->add_option("--top-p", gen_cfg.top_p, "Nucleus mass");
    generate->add_option("--top-k", gen_cfg.top_k, "Top-k cutoff");
    generate->add_option("--beams", gen_cfg.beams, "Beam count");
    generate->add_option("--max-tokens", gen_cfg.max_tokens, "New-token limit");
    generate->callback([&] {
        action = [&](const RunConfig& rc) {
            auto cases = read_prompt_cases(gen_cases);
            std::vector<ModelEndpoint> models;
            for (const auto& spec : gen_models) {
                auto a = spec.find(':');
                auto b = a == std::string::npos ? a : spec.find(':', a + 1);
                if (b == std::string::npos || a == 0 || b + 1 >= spec.size()) {
                    throw CLI::ValidationError("--model", "expected ID:ROLE:URL, got '" + spec + "'");
                }
                ModelEndpoint m;
                m.model_id = spec.substr(0, a);
                m.role = parse_role(spec.substr(a + 1, b - a - 1));
                m.backend = rc.backend("model." + m.model_id);
                m.backend.base_url = spec.substr(b + 1);
                m.backend.model_name = rc.get_or("model." + m.model_id + ".model_name", m.model_id);
                models.push_back(std::move(m));
            }
            auto matrix = batch_generate(cases, models, gen_cfg, gen_parallelism);
            auto dir = fs::path(gen_out_dir);
            write_output((dir / "responses.jsonl").string(), matrix.responses_jsonl(), out);
            write_output((dir / "manifest.json").string(), matrix.manifest_json(models) + "\n", out);
            if (!matrix.complete()) {
                for (const auto& [c, m] : matrix.missing()) err << "missing response: " << c << ", " << m << "\n";
                return kExitFailure;
            }
            return kExitOk;
        };
    });

    // eval
    auto* eval = app.add_subcommand("eval", "Blinded comparative evaluation");
    eval->require_subcommand(1);
    std::string state_dir = "eval_state";

    auto* ev_create = eval->add_subcommand("create", "Create a blinded session from a response matrix");
    std::string evc_cases, evc_responses, evc_manifest, evc_session;
    std::vector<std::string> evc_evaluators;
    std::optional<std::uint64_t> evc_seed;
    ev_create->add_option("--cases", evc_cases, "Prompt case JSONL")->required();
    ev_create->add_option("--responses", evc_responses, "responses.jsonl from generate")->required();
    ev_create->add_option("--manifest", evc_manifest, "manifest.json from generate")->required();
    ev_create->add_option("--evaluator", evc_evaluators, "id or id:kind (human|llm)");
    ev_create->add_option("--seed", evc_seed, "Blinding seed");
    ev_create->add_option("--session-id", evc_session, "Session id (default: derived)");
    ev_create->add_option("--state-dir", state_dir, "Session store directory");
    ev_create->callback([&] {
        action = [&](const RunConfig& rc) {
            auto cases = read_prompt_cases(evc_cases);
            auto matrix = ResponseMatrix::load(evc_responses, evc_manifest);
            std::vector<Evaluator> evaluators;
            for (const auto& e : evc_evaluators) evaluators.push_back(parse_evaluator_flag(e));
            auto s = create_session(cases, matrix, matrix.model_ids(), seed_or_default(evc_seed, rc),
                                    std::move(evaluators), evc_session);
            EvalService service{fs::path(state_dir)};
            auto id = service.add(std::move(s));
            out << (fs::path(state_dir) / (id + ".json")).string() << "\n";
            return kExitOk;
        };
    });

    auto* ev_serve = eval->add_subcommand("serve", "Serve the evaluation REST API and UI assets");
    EvalServerOptions evs_opts;
    std::string evs_ui, evs_weights, evs_reference;
    ev_serve->add_option("--host", evs_opts.host, "Bind address");
    ev_serve->add_option("--port", evs_opts.port, "Bind port");
    ev_serve->add_option("--ui-dir", evs_ui, "Built UI assets");
    ev_serve->add_option("--reference", evs_reference, "Default reference model for reports");
    ev_serve->add_option("--weights", evs_weights, "Default evaluator weights e1:1,e2:1/2");
    ev_serve->add_option("--state-dir", state_dir, "Session store directory");
    ev_serve->callback([&] {
        action = [&](const RunConfig& rc) {
            evs_opts.host = rc.get_or("eval.host", evs_opts.host);
            if (!evs_ui.empty()) evs_opts.ui_dir = fs::path(evs_ui);
            if (!evs_reference.empty()) evs_opts.reference_model = evs_reference;
            if (!evs_weights.empty()) evs_opts.weights = parse_weight_list(evs_weights);
            auto service = std::make_shared<EvalService>(fs::path(state_dir));
            auto n = service->load_state();
            EvalServer server(service, evs_opts);
            err << "serving " << n << " session(s) on " << evs_opts.host << ":" << evs_opts.port << "\n";
            server.serve_forever();
            return kExitOk;
        };
    });

    auto* ev_judge = eval->add_subcommand("judge", "Judge every case of a session with an LLM");
    std::string evj_session, evj_evaluator = "llm-judge", evj_rubric;
    BackendFlags evj_backend;
    ev_judge->add_option("--session", evj_session, "Session id")->required();
    ev_judge->add_option("--evaluator", evj_evaluator, "Evaluator id recorded for the judge");
    ev_judge->add_option("--rubric", evj_rubric, "Rubric text file (default: built-in)");
    ev_judge->add_option("--state-dir", state_dir, "Session store directory");
    evj_backend.add_to(ev_judge);
    ev_judge->callback([&] {
        action = [&](const RunConfig& rc) {
            auto cfg = evj_backend.resolve(rc, "judge");
            auto path = fs::path(state_dir) / (evj_session + ".json");
            auto s = EvaluationSession::from_json(nlohmann::json::parse(read_file(path.string())));
            auto rubric = evj_rubric.empty() ? std::string(embedded::judge_rubric()) : read_file(evj_rubric);
            auto backend = make_backend(cfg);
            JudgeConfig jc;
            jc.model_name = cfg.model_name;
            jc.retry = RetryPolicy::from(cfg);
            auto n = llm_judge_session(s, *backend, rubric, evj_evaluator, jc);
            write_output(path.string(), s.to_json().dump(2) + "\n", out);
            err << "recorded " << n << " judgment(s)\n";
            return kExitOk;
        };
    });

    auto* ev_report = eval->add_subcommand("report", "Aggregate a completed session");
    std::string evr_session, evr_reference, evr_weights, evr_out;
    bool evr_complete = false;
    ev_report->add_option("--session", evr_session, "Session id")->required();
    ev_report->add_option("--reference", evr_reference, "Reference model for head-to-head");
    ev_report->add_option("--weights", evr_weights, "Evaluator weights e1:1,e2:1/2");
    ev_report->add_flag("--complete", evr_complete, "Close the session first");
    ev_report->add_option("--out", evr_out, "Report JSON (default: standard output)");
    ev_report->add_option("--state-dir", state_dir, "Session store directory");
    ev_report->callback([&] {
        action = [&](const RunConfig&) {
            auto path = fs::path(state_dir) / (evr_session + ".json");
            auto s = EvaluationSession::from_json(nlohmann::json::parse(read_file(path.string())));
            if (evr_complete && s.status == SessionStatus::open) {
                complete_session(s);
                write_file(path.string(), s.to_json().dump(2) + "\n");
            }
            auto weights = evr_weights.empty() ? std::map<std::string, Rational>{} : parse_weight_list(evr_weights);
            std::optional<std::string> ref;
            if (!evr_reference.empty()) ref = evr_reference;
            auto report = aggregate_report(s, weights, ref).to_json().dump(2);
            if (evr_out.empty()) {
                out << report << "\n";
            } else {
                write_output(evr_out, report + "\n", out);
            }
            return kExitOk;
        };
    });

    // mock-backend serve
    auto* mock = app.add_subcommand("mock-backend", "Deterministic offline chat-completions server");
    mock->require_subcommand(1);
    auto* mock_serve = mock->add_subcommand("serve", "Serve the mock on host:port");
    std::string mock_host = "127.0.0.1";
    int mock_port = 8089;
    MockOptions mock_opts;
    mock_serve->add_option("--host", mock_host, "Bind address");
    mock_serve->add_option("--port", mock_port, "Bind port");
    mock_serve->add_option("--out-of-window-rate", mock_opts.out_of_window_rate, "Fault rate")
        ->check(CLI::Range(0.0, 1.0));
    mock_serve->add_option("--malformed-rate", mock_opts.malformed_rate, "Fault rate")->check(CLI::Range(0.0, 1.0));
    mock_serve->callback([&] {
        action = [&](const RunConfig&) {
            MockBackendServer server(mock_opts);
            err << "mock backend on http://" << mock_host << ":" << mock_port << "/v1\n";
            server.serve_forever(mock_host, mock_port);
            return kExitOk;
        };
    });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "litpipe: " << e.what() << "\n";
        err << "run 'litpipe --help' for usage\n";
        return kExitUsage;
    }

    spdlog::set_level(spdlog::level::from_str(log_level));
    try {
        auto rc = RunConfig::resolve(config_path);
        if (!action) {
            err << "litpipe: no subcommand\n";
            return kExitUsage;
        }
        return action(rc);
    } catch (const CLI::ValidationError& e) {
        err << "litpipe: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "litpipe: " << e.what() << "\n";
        return kExitFailure;
    }
}

}  // namespace litpipe::cli
