#pragma once

#include "botgate/features.hpp"

#include "json.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace botgate {

enum class Label { bot, human };

std::string_view to_string(Label label);
// Throws DomainError for anything but "bot" or "human".
Label label_from_string(std::string_view text);

struct LabeledExample {
  FeatureVector features;
  Label label = Label::human;
};

// Seeded generator with portable bounded draws. std::uniform_int_distribution
// differs between standard libraries, so index draws are done here.
class Rng {
public:
  static constexpr std::string_view kGeneratorName = "mt19937_64";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  // Independent stream `stream` of `seed`.
  static Rng derive(std::uint64_t seed, std::uint64_t stream);

  // Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  template <class T> void shuffle(std::vector<T> &items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[uniform_index(i)]);
    }
  }

private:
  std::mt19937_64 engine_;
};

struct ClassWeights {
  double bot = 1.0;
  double human = 1.0;

  double operator[](Label label) const { return label == Label::bot ? bot : human; }
};

// Balanced weights N / (2 N_c). Throws TrainingDataError if a class is absent.
ClassWeights compute_class_weights(std::span<const Label> labels);

// Shannon entropy in bits of a class-mass vector. Throws DomainError when
// the total mass is not positive.
double weighted_entropy(std::span<const double> class_mass);

// Flat node storage; children are indices into DecisionTree::nodes.
struct TreeNode {
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  // Internal: feature <= threshold goes left.
  std::size_t feature = kNone;
  double threshold = 0.0;
  std::size_t left = kNone;
  std::size_t right = kNone;
  // Leaf (also filled on internal nodes for auditing).
  double bot_mass = 0.0;
  double human_mass = 0.0;
  Label predicted = Label::bot;

  bool is_leaf() const { return feature == kNone; }
  bool operator==(const TreeNode &) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes; // nodes[0] is the root

  Label predict(const std::array<double, kFeatureCount> &x) const;
  // Edges on the longest root-to-leaf path.
  std::size_t depth() const;

  bool operator==(const DecisionTree &) const = default;
};

struct TreeParams {
  std::size_t max_depth = 10;
  std::size_t features_per_split = kFeatureCount;
};

struct WeightedExample {
  std::array<double, kFeatureCount> x{};
  Label label = Label::human;
  double weight = 1.0;
};

// Greedy top-down induction maximizing weighted information gain. Equal
// gains resolve to the lowest feature index, then the smallest threshold.
DecisionTree train_tree(std::span<const WeightedExample> examples, const TreeParams &params, Rng &rng);

enum class ClassifierFamily { random_forest, decision_tree, zero_r };

std::string_view to_string(ClassifierFamily family);
ClassifierFamily family_from_string(std::string_view text);

struct ForestParams {
  std::size_t n_trees = 10;
  std::size_t max_depth = 10;
  std::size_t features_per_split = 2;
  bool bootstrap = true;

  bool operator==(const ForestParams &) const = default;
};

inline constexpr std::string_view kModelFormat = "botgate-forest";
inline constexpr std::string_view kModelVersion = "1";

struct ForestModel {
  ClassifierFamily family = ClassifierFamily::random_forest;
  ForestParams params;
  std::uint64_t seed = 0;
  ClassWeights class_weights;
  std::vector<std::string> feature_schema;
  std::vector<DecisionTree> trees;
  // Free-form run metadata, e.g. the feature-extraction settings.
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
  std::string version{kModelVersion};
};

// Throws TrainingDataError for fewer than two examples or a single class.
ForestModel train_forest(std::span<const LabeledExample> examples, const ForestParams &params,
                         std::uint64_t seed);

// A single unbootstrapped tree over all features.
ForestModel train_decision_tree(std::span<const LabeledExample> examples, std::size_t max_depth,
                                std::uint64_t seed);

struct Prediction {
  Label label = Label::human;
  double score = 0.0; // fraction of trees voting bot
};

// Throws ModelCompatibilityError if the model's feature schema differs.
Prediction predict(const ForestModel &model, const FeatureVector &features);

// Majority-class baseline; ties go to bot.
struct ZeroR {
  Label majority = Label::bot;

  Label predict(const FeatureVector &) const { return majority; }
  // The same classifier as a one-leaf forest, for uniform persistence.
  ForestModel as_model() const;
};

// Throws DomainError for an empty list.
ZeroR zero_r(std::span<const Label> train_labels);

std::string serialize_model(const ForestModel &model);
// Throws CorruptModelError or ModelVersionError.
ForestModel parse_model(std::string_view text);

void save_model(const ForestModel &model, const std::filesystem::path &path);
ForestModel load_model(const std::filesystem::path &path);

} // namespace botgate
