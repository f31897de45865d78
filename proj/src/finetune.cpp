#include "litpipe/finetune.hpp"

#include <charconv>
#include <cmath>
#include <map>

#include <nlohmann/json.hpp>

#include "litpipe/error.hpp"
#include "litpipe/text.hpp"

namespace litpipe {

const char* recipe_name(Recipe r) {
    switch (r) {
        case Recipe::alpaca_plus_syncovid: return "alpaca_plus_syncovid";
        case Recipe::syncovid_only: return "syncovid_only";
        case Recipe::syncovid_plus_abstracts: return "syncovid_plus_abstracts";
    }
    return "syncovid_only";
}

Recipe parse_recipe(const std::string& name) {
    for (auto r : {Recipe::alpaca_plus_syncovid, Recipe::syncovid_only,
                   Recipe::syncovid_plus_abstracts}) {
        if (name == recipe_name(r)) return r;
    }
    throw InvalidArgument("unknown recipe '" + name +
                          "' (expected alpaca_plus_syncovid, syncovid_only or "
                          "syncovid_plus_abstracts)");
}

RecipeParams recipe_params(Recipe r) {
    switch (r) {
        case Recipe::alpaca_plus_syncovid: return {53097, 3, 3e-4, 128, 2000};
        case Recipe::syncovid_only: return {1097, 30, 1e-5, 16, 100};
        case Recipe::syncovid_plus_abstracts: return {2194, 30, 1e-5, 16, 100};
    }
    throw InvalidArgument("unknown recipe");
}

std::string format_learning_rate(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific);
    std::string s(buf, res.ptr);
    auto e = s.find('e');
    if (e == std::string::npos) return s;
    std::string mantissa = s.substr(0, e);
    std::string exponent = s.substr(e + 1);
    bool negative = !exponent.empty() && exponent[0] == '-';
    if (!exponent.empty() && (exponent[0] == '-' || exponent[0] == '+')) exponent.erase(0, 1);
    while (exponent.size() > 1 && exponent[0] == '0') exponent.erase(0, 1);
    return mantissa + "e" + (negative ? "-" : "") + exponent;
}

namespace {

double parse_double(std::string_view s, bool* ok) {
    s = trim(s);
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    *ok = res.ec == std::errc{} && res.ptr == s.data() + s.size() && !s.empty();
    return v;
}

std::size_t parse_count(std::string_view s, bool* ok) {
    s = trim(s);
    std::size_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    *ok = res.ec == std::errc{} && res.ptr == s.data() + s.size() && !s.empty();
    return v;
}

void validate_ref_name(const std::string& name) {
    if (name.empty() || name.find_first_of(":,\n=") != std::string::npos) {
        throw InvalidArgument("dataset ref name '" + name + "' must be non-empty without ':', ',' or '='");
    }
}

}  // namespace

TrainingManifest make_training_manifest(Recipe recipe, std::span<const SourceDescriptor> dataset_refs,
                                        std::string base_model) {
    const auto params = recipe_params(recipe);
    if (dataset_refs.empty()) throw InvalidArgument("make_training_manifest: no dataset refs");
    std::size_t total = 0;
    for (const auto& ref : dataset_refs) {
        validate_ref_name(ref.name);
        total += ref.count;
    }
    if (total != params.total_instructions) {
        throw InvalidArgument(std::string("recipe ") + recipe_name(recipe) + " expects " +
                              std::to_string(params.total_instructions) +
                              " instructions but the dataset refs sum to " + std::to_string(total));
    }
    if (base_model.empty() || base_model.find('\n') != std::string::npos) {
        throw InvalidArgument("base_model must be a single non-empty line");
    }
    TrainingManifest m;
    m.recipe = recipe;
    m.base_model = std::move(base_model);
    m.dataset_refs.assign(dataset_refs.begin(), dataset_refs.end());
    m.total_instructions = total;
    m.epochs = params.epochs;
    m.learning_rate = params.learning_rate;
    m.batch_size = params.batch_size;
    m.eval_size = params.eval_size;
    return m;
}

std::string TrainingManifest::serialize() const {
    std::string refs;
    for (const auto& r : dataset_refs) {
        if (!refs.empty()) refs += ',';
        refs += r.name + ":" + std::to_string(r.count);
    }
    std::string out;
    out += "recipe=" + std::string(recipe_name(recipe)) + "\n";
    out += "base_model=" + base_model + "\n";
    out += "total_instructions=" + std::to_string(total_instructions) + "\n";
    out += "epochs=" + std::to_string(epochs) + "\n";
    out += "learning_rate=" + format_learning_rate(learning_rate) + "\n";
    out += "batch_size=" + std::to_string(batch_size) + "\n";
    out += "eval_size=" + std::to_string(eval_size) + "\n";
    out += "dataset_refs=" + refs + "\n";
    return out;
}

TrainingManifest TrainingManifest::parse(std::string_view text) {
    std::map<std::string, std::string> kv;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                                       : nl - pos));
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos) throw LineError(line_no, "expected key=value");
        kv[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
    }
    auto get = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw Error(std::string("manifest is missing key ") + key);
        return it->second;
    };
    auto count = [&](const char* key) {
        bool ok = false;
        auto v = parse_count(get(key), &ok);
        if (!ok) throw Error(std::string("manifest key ") + key + " is not a count");
        return v;
    };
    TrainingManifest m;
    m.recipe = parse_recipe(get("recipe"));
    m.base_model = get("base_model");
    m.total_instructions = count("total_instructions");
    m.epochs = count("epochs");
    bool ok = false;
    m.learning_rate = parse_double(get("learning_rate"), &ok);
    if (!ok) throw Error("manifest key learning_rate is not a number");
    m.batch_size = count("batch_size");
    m.eval_size = count("eval_size");
    std::string_view refs = get("dataset_refs");
    while (!refs.empty()) {
        auto comma = refs.find(',');
        auto item = refs.substr(0, comma);
        refs = comma == std::string_view::npos ? std::string_view{} : refs.substr(comma + 1);
        auto colon = item.rfind(':');
        if (colon == std::string_view::npos) throw Error("manifest dataset_refs entry lacks ':'");
        auto n = parse_count(item.substr(colon + 1), &ok);
        if (!ok) throw Error("manifest dataset_refs count is not a number");
        m.dataset_refs.push_back({std::string(trim(item.substr(0, colon))), n});
    }
    return m;
}

LossCurve parse_trainer_log_text(std::string_view text) {
    LossCurve curve;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        auto line = trim(text.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                                       : nl - pos));
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
        if (line.empty()) continue;
        if (curve.records.empty() && to_lower(line) == "step,epoch,train_loss,eval_loss") continue;

        std::vector<std::string_view> cols;
        std::size_t start = 0;
        for (;;) {
            auto comma = line.find(',', start);
            cols.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                              : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (cols.size() < 3 || cols.size() > 4) {
            throw LineError(line_no, "expected step,epoch,train_loss[,eval_loss]");
        }
        LossRecord rec;
        bool ok = false;
        rec.step = parse_count(cols[0], &ok);
        if (!ok) throw LineError(line_no, "step is not a non-negative integer");
        rec.epoch = parse_double(cols[1], &ok);
        if (!ok || !std::isfinite(rec.epoch)) throw LineError(line_no, "epoch is not a number");
        rec.train_loss = parse_double(cols[2], &ok);
        if (!ok || !std::isfinite(rec.train_loss) || rec.train_loss < 0) {
            throw LineError(line_no, "train_loss is not a finite non-negative number");
        }
        if (cols.size() == 4 && !trim(cols[3]).empty()) {
            double ev = parse_double(cols[3], &ok);
            if (!ok || !std::isfinite(ev) || ev < 0) {
                throw LineError(line_no, "eval_loss is not a finite non-negative number");
            }
            rec.eval_loss = ev;
        }
        if (!curve.records.empty() && rec.step <= curve.records.back().step) {
            throw LineError(line_no, "step " + std::to_string(rec.step) +
                                         " does not increase (previous " +
                                         std::to_string(curve.records.back().step) + ")");
        }
        curve.records.push_back(rec);
    }
    if (curve.records.empty()) throw Error("trainer log has no records");
    return curve;
}

LossCurve parse_trainer_log(const std::string& path) {
    return parse_trainer_log_text(read_file(path));
}

std::string write_trainer_log(const LossCurve& curve) {
    auto num = [](double v) {
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof buf, v);
        return std::string(buf, res.ptr);
    };
    std::string out = "step,epoch,train_loss,eval_loss\n";
    for (const auto& r : curve.records) {
        out += std::to_string(r.step) + "," + num(r.epoch) + "," + num(r.train_loss) + ",";
        if (r.eval_loss) out += num(*r.eval_loss);
        out += "\n";
    }
    return out;
}

OverfitVerdict detect_overfit(const LossCurve& curve, std::size_t patience) {
    if (patience < 1) throw InvalidArgument("detect_overfit: patience must be >= 1");
    std::vector<const LossRecord*> evals;
    for (const auto& r : curve.records) {
        if (r.eval_loss) evals.push_back(&r);
    }
    if (evals.empty()) throw InvalidArgument("detect_overfit: curve has no eval points");

    std::size_t run = 0;
    for (std::size_t i = 1; i < evals.size(); ++i) {
        bool eval_rises = *evals[i]->eval_loss > *evals[i - 1]->eval_loss;
        bool train_holds = evals[i]->train_loss <= evals[i - 1]->train_loss;
        run = (eval_rises && train_holds) ? run + 1 : 0;
        if (run == patience) return {true, evals[i + 1 - patience]->step};
    }
    return {false, std::nullopt};
}

std::string loss_summary_json(const LossCurve& curve, const OverfitVerdict& verdict,
                              std::size_t patience) {
    nlohmann::ordered_json j;
    j["records"] = curve.records.size();
    std::size_t evals = 0;
    std::optional<double> min_eval;
    std::optional<std::size_t> min_eval_step;
    for (const auto& r : curve.records) {
        if (!r.eval_loss) continue;
        ++evals;
        if (!min_eval || *r.eval_loss < *min_eval) {
            min_eval = r.eval_loss;
            min_eval_step = r.step;
        }
    }
    j["eval_points"] = evals;
    j["first_train_loss"] = curve.records.front().train_loss;
    j["last_train_loss"] = curve.records.back().train_loss;
    if (min_eval) {
        j["min_eval_loss"] = *min_eval;
        j["min_eval_step"] = *min_eval_step;
    }
    j["patience"] = patience;
    j["verdict"] = verdict.overfit ? "overfit" : "ok";
    if (verdict.first_step) j["overfit_first_step"] = *verdict.first_step;
    return j.dump();
}

}  // namespace litpipe
