#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "litpipe/task_store.hpp"

namespace litpipe {

enum class Recipe { alpaca_plus_syncovid, syncovid_only, syncovid_plus_abstracts };

const char* recipe_name(Recipe r);
Recipe parse_recipe(const std::string& name);

struct RecipeParams {
    std::size_t total_instructions;
    std::size_t epochs;
    double learning_rate;
    std::size_t batch_size;
    std::size_t eval_size;  // held-out examples reserved from the training set
};

// The fixed hyper-parameters of each recipe.
RecipeParams recipe_params(Recipe r);

struct TrainingManifest {
    Recipe recipe = Recipe::syncovid_only;
    std::string base_model = "llama-7b";
    std::vector<SourceDescriptor> dataset_refs;
    std::size_t total_instructions = 0;
    std::size_t epochs = 0;
    double learning_rate = 0.0;
    std::size_t batch_size = 0;
    std::size_t eval_size = 0;

    bool operator==(const TrainingManifest&) const = default;

    // key=value lines in the fixed order recipe, base_model,
    // total_instructions, epochs, learning_rate, batch_size, eval_size,
    // dataset_refs (name:count pairs joined by commas).
    std::string serialize() const;
    static TrainingManifest parse(std::string_view text);
};

// Throws InvalidArgument when the ref counts do not add up to the recipe's
// total, naming both numbers.
TrainingManifest make_training_manifest(Recipe recipe, std::span<const SourceDescriptor> dataset_refs,
                                        std::string base_model = "llama-7b");

// "3e-4" style: shortest round-trip mantissa, exponent without padding.
std::string format_learning_rate(double value);

struct LossRecord {
    std::size_t step = 0;
    double epoch = 0.0;
    double train_loss = 0.0;
    std::optional<double> eval_loss;

    bool operator==(const LossRecord&) const = default;
};

struct LossCurve {
    std::vector<LossRecord> records;

    bool operator==(const LossCurve&) const = default;
};

// CSV with columns step,epoch,train_loss,eval_loss (eval_loss may be blank);
// a header line with exactly those names is optional. Errors carry the
// 1-based line number.
LossCurve parse_trainer_log(const std::string& path);
LossCurve parse_trainer_log_text(std::string_view text);
std::string write_trainer_log(const LossCurve& curve);

struct OverfitVerdict {
    bool overfit = false;
    std::optional<std::size_t> first_step;  // first rising eval step of the earliest run

    bool operator==(const OverfitVerdict&) const = default;
};

// Over the points with an eval loss: overfit iff `patience` consecutive
// points each have eval loss strictly above the previous point while train
// loss does not rise. Only orderings are compared.
OverfitVerdict detect_overfit(const LossCurve& curve, std::size_t patience = 3);

std::string loss_summary_json(const LossCurve& curve, const OverfitVerdict& verdict,
                              std::size_t patience);

}  // namespace litpipe
