#pragma once

#include "botgate/dataset.hpp"
#include "botgate/eval.hpp"

#include "json.hpp"

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace botgate {

// RF over {10, 50} trees x depth {5, 10}, DT depth {5, 10}, and ZeroR.
GridSpec default_grid(std::size_t k = 10, std::uint64_t seed = 42);

// {"families":[{"family":"random_forest","n_trees":[..],"max_depth":[..],
// "features_per_split":[..]}, ...]}. Throws LoadError.
GridSpec parse_grid(std::string_view text, std::size_t k, std::uint64_t seed);

struct TrainOptions {
  double test_fraction = 0.4;
  std::size_t folds = 10;
  std::uint64_t seed = 42;
  std::optional<GridSpec> grid; // default_grid(folds, seed) when unset
};

struct AccountPrediction {
  std::string account;
  Label truth = Label::human;
  Prediction prediction;
  std::size_t non_empty_comments = 0;
};

struct EvaluationReport {
  ConfusionMatrix confusion;
  MetricsReport metrics;
  std::vector<BinReport> bins; // by non-empty comments, width 5
  std::vector<AccountPrediction> predictions;
};

// Applies a model to a labeled table. Throws ModelCompatibilityError on a
// schema mismatch and TrainingDataError for an unlabeled table.
EvaluationReport evaluate_model(const ForestModel &model, const FeatureTable &table);

struct TrainReport {
  std::vector<CvResult> cv; // ranked, best first
  Configuration best;
  ForestModel model; // best configuration refit on the whole training part
  std::vector<std::string> train_accounts;
  std::vector<std::string> test_accounts;
  EvaluationReport test;
  EvaluationReport zero_r_test; // majority baseline on the same test part
};

// Called with the examples handed to each stage: "grid_search", "refit",
// "test". Lets callers audit that the test part never reaches the search.
using StageObserver = std::function<void(std::string_view stage, std::span<const LabeledExample> examples)>;

// Stratified split, grid-search CV on the training part, refit of the best
// configuration, and one evaluation on the held-out part.
TrainReport train_pipeline(const FeatureTable &table, const TrainOptions &options,
                           const StageObserver &observer = {});

nlohmann::ordered_json to_json(const EvaluationReport &r);
nlohmann::ordered_json to_json(const TrainReport &r);

// Flat CSV views. Evaluation: one row per metric plus the confusion counts;
// training: the CV ranking followed by the test metrics.
std::string evaluation_csv(const EvaluationReport &r);
std::string train_report_csv(const TrainReport &r);
std::string bins_csv(const std::vector<BinReport> &bins);

} // namespace botgate
