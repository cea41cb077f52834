#pragma once

#include "botgate/model.hpp"

#include "json.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace botgate {

// Bot is the positive class.
struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fn = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;

  std::size_t bots() const { return tp + fn; }
  std::size_t humans() const { return fp + tn; }
  void add(Label truth, Label predicted);

  bool operator==(const ConfusionMatrix &) const = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when the ratio had a zero denominator and was reported as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

// Per-class values, class-size weighted precision and recall, and the
// harmonic mean of those two as the overall F1.
struct MetricsReport {
  ClassMetrics bot;
  ClassMetrics human;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool f1_undefined = false;
};

// Throws DomainError when n_bots/n_humans disagree with the matrix.
MetricsReport metrics_from_confusion(const ConfusionMatrix &cm, std::size_t n_bots,
                                     std::size_t n_humans);
MetricsReport metrics_from_confusion(const ConfusionMatrix &cm);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Proportional per-class allocation. The smaller class is rounded to the
// nearest integer and the larger class absorbs the remainder, so the test
// side holds round(N * test_fraction) items. Indices come back ascending.
SplitIndices stratified_split(std::span<const Label> labels, double test_fraction, std::uint64_t seed);

// k disjoint folds (ascending indices) whose per-class counts differ by at
// most one. Throws DomainError for k < 2 or a class smaller than k.
std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const Label> labels, std::size_t k,
                                                       std::uint64_t seed);

// One entry of a grid: a family and the values to sweep. Fields that do not
// apply to a family are ignored (ZeroR has no hyperparameters).
struct FamilyGrid {
  ClassifierFamily family = ClassifierFamily::random_forest;
  std::vector<std::size_t> n_trees{10};
  std::vector<std::size_t> max_depth{10};
  std::vector<std::size_t> features_per_split{2};
};

struct GridSpec {
  std::vector<FamilyGrid> families;
  std::size_t k = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Configuration {
  ClassifierFamily family = ClassifierFamily::random_forest;
  ForestParams params;

  std::string describe() const;
  bool operator==(const Configuration &) const = default;
};

// Train one configuration. Forest seeds are fixed by `seed`.
ForestModel fit(const Configuration &config, std::span<const LabeledExample> examples,
                std::uint64_t seed);

struct CvResult {
  Configuration config;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_f1 = 0.0;
  double mean_bot_recall = 0.0;
  std::vector<MetricsReport> folds;
};

// Every configuration in grid order.
std::vector<Configuration> expand_grid(const GridSpec &grid);

// Mean fold metrics per configuration, best first: higher mean F1, then
// higher bot recall, then fewer trees, then shallower trees, then grid order.
std::vector<CvResult> grid_search_cv(std::span<const LabeledExample> train, const GridSpec &grid);

struct BinReport {
  std::size_t lower = 0; // inclusive
  std::size_t upper = 0; // inclusive
  std::size_t population = 0;
  ConfusionMatrix confusion;
  MetricsReport metrics;
};

struct BinInput {
  Label truth = Label::human;
  Label predicted = Label::human;
  std::size_t non_empty_comments = 0;
};

// Buckets accounts by floor(count / bin_width); empty bins are omitted.
std::vector<BinReport> f1_by_comment_bins(std::span<const BinInput> predictions,
                                          std::size_t bin_width = 5);

nlohmann::ordered_json to_json(const ConfusionMatrix &cm);
nlohmann::ordered_json to_json(const MetricsReport &m);
nlohmann::ordered_json to_json(const CvResult &r);
nlohmann::ordered_json to_json(const BinReport &b);

} // namespace botgate
