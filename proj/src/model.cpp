#include "botgate/model.hpp"

#include "botgate/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace botgate {

using ojson = nlohmann::ordered_json;

std::string_view to_string(Label label) { return label == Label::bot ? "bot" : "human"; }

Label label_from_string(std::string_view text) {
  if (text == "bot") {
    return Label::bot;
  }
  if (text == "human") {
    return Label::human;
  }
  throw DomainError("unknown label: " + std::string(text));
}

Rng Rng::derive(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  Rng rng(0);
  rng.engine_.seed(seq);
  return rng;
}

std::size_t Rng::uniform_index(std::size_t n) {
  const auto bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw = engine_();
  while (draw >= limit) {
    draw = engine_();
  }
  return static_cast<std::size_t>(draw % bound);
}

ClassWeights compute_class_weights(std::span<const Label> labels) {
  const auto bots = static_cast<double>(std::count(labels.begin(), labels.end(), Label::bot));
  const auto total = static_cast<double>(labels.size());
  const double humans = total - bots;
  if (bots == 0.0 || humans == 0.0) {
    throw TrainingDataError("training data must contain both bots and humans");
  }
  return {total / (2.0 * bots), total / (2.0 * humans)};
}

double weighted_entropy(std::span<const double> class_mass) {
  const double total = std::accumulate(class_mass.begin(), class_mass.end(), 0.0);
  if (!(total > 0.0)) {
    throw DomainError("entropy of a node without mass");
  }
  double h = 0.0;
  for (double m : class_mass) {
    if (m > 0.0) {
      const double p = m / total;
      h -= p * std::log2(p);
    }
  }
  return std::max(h, 0.0);
}

Label DecisionTree::predict(const std::array<double, kFeatureCount> &x) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    i = x[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  }
  return nodes[i].predicted;
}

std::size_t DecisionTree::depth() const {
  if (nodes.empty()) {
    return 0;
  }
  std::size_t deepest = 0;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[i].is_leaf()) {
      stack.push_back({nodes[i].left, d + 1});
      stack.push_back({nodes[i].right, d + 1});
    }
  }
  return deepest;
}

namespace {

constexpr double kGainTolerance = 1e-12;

double entropy2(double bot, double human) {
  const std::array<double, 2> mass{bot, human};
  return weighted_entropy(mass);
}

struct Split {
  std::size_t feature = TreeNode::kNone;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
public:
  TreeBuilder(std::span<const WeightedExample> examples, const TreeParams &params, Rng &rng)
      : examples_(examples), params_(params), rng_(rng) {}

  DecisionTree build() {
    std::vector<std::size_t> all(examples_.size());
    std::iota(all.begin(), all.end(), 0);
    grow(all, 0);
    return std::move(tree_);
  }

private:
  std::size_t grow(std::vector<std::size_t> &members, std::size_t depth) {
    const std::size_t id = tree_.nodes.size();
    tree_.nodes.emplace_back();
    double bot = 0.0;
    double human = 0.0;
    for (std::size_t i : members) {
      (examples_[i].label == Label::bot ? bot : human) += examples_[i].weight;
    }
    {
      TreeNode &node = tree_.nodes[id];
      node.bot_mass = bot;
      node.human_mass = human;
      node.predicted = bot >= human ? Label::bot : Label::human;
    }
    if (depth >= params_.max_depth || bot == 0.0 || human == 0.0) {
      return id;
    }
    const Split split = best_split(members, bot, human);
    if (split.feature == TreeNode::kNone || split.gain <= kGainTolerance) {
      return id;
    }
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t i : members) {
      (examples_[i].x[split.feature] <= split.threshold ? left : right).push_back(i);
    }
    members.clear();
    members.shrink_to_fit();
    const std::size_t l = grow(left, depth + 1);
    const std::size_t r = grow(right, depth + 1);
    TreeNode &node = tree_.nodes[id];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> features(kFeatureCount);
    std::iota(features.begin(), features.end(), 0);
    const std::size_t take = std::clamp<std::size_t>(params_.features_per_split, 1, kFeatureCount);
    if (take < kFeatureCount) {
      // Partial Fisher-Yates draw.
      for (std::size_t i = 0; i < take; ++i) {
        std::swap(features[i], features[i + rng_.uniform_index(kFeatureCount - i)]);
      }
      features.resize(take);
      std::sort(features.begin(), features.end());
    }
    return features;
  }

  Split best_split(const std::vector<std::size_t> &members, double bot, double human) {
    const double total = bot + human;
    const double parent = entropy2(bot, human);
    Split best;
    std::vector<std::size_t> order = members;
    for (std::size_t f : candidate_features()) {
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return examples_[a].x[f] < examples_[b].x[f];
      });
      double left_bot = 0.0;
      double left_human = 0.0;
      for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        const auto &e = examples_[order[k]];
        (e.label == Label::bot ? left_bot : left_human) += e.weight;
        const double lo = e.x[f];
        const double hi = examples_[order[k + 1]].x[f];
        if (!(lo < hi)) {
          continue;
        }
        const double left_mass = left_bot + left_human;
        const double right_bot = bot - left_bot;
        const double right_human = human - left_human;
        const double right_mass = total - left_mass;
        if (left_mass <= 0.0 || right_mass <= 0.0) {
          continue;
        }
        const double gain = parent - (left_mass / total) * entropy2(left_bot, left_human) -
                            (right_mass / total) * entropy2(std::max(right_bot, 0.0),
                                                            std::max(right_human, 0.0));
        if (gain > best.gain + kGainTolerance) {
          double mid = lo + (hi - lo) / 2.0;
          if (!(lo < mid && mid < hi)) {
            mid = lo;
          }
          best = {f, mid, gain};
        }
      }
    }
    return best;
  }

  std::span<const WeightedExample> examples_;
  TreeParams params_;
  Rng &rng_;
  DecisionTree tree_;
};

std::vector<Label> labels_of(std::span<const LabeledExample> examples) {
  std::vector<Label> labels;
  labels.reserve(examples.size());
  for (const auto &e : examples) {
    labels.push_back(e.label);
  }
  return labels;
}

std::vector<std::string> current_schema() {
  return {kFeatureSchema.begin(), kFeatureSchema.end()};
}

} // namespace

DecisionTree train_tree(std::span<const WeightedExample> examples, const TreeParams &params, Rng &rng) {
  if (examples.empty()) {
    throw DomainError("train_tree needs at least one example");
  }
  return TreeBuilder(examples, params, rng).build();
}

std::string_view to_string(ClassifierFamily family) {
  switch (family) {
  case ClassifierFamily::random_forest:
    return "random_forest";
  case ClassifierFamily::decision_tree:
    return "decision_tree";
  case ClassifierFamily::zero_r:
    return "zero_r";
  }
  return "?";
}

ClassifierFamily family_from_string(std::string_view text) {
  if (text == "random_forest") {
    return ClassifierFamily::random_forest;
  }
  if (text == "decision_tree") {
    return ClassifierFamily::decision_tree;
  }
  if (text == "zero_r") {
    return ClassifierFamily::zero_r;
  }
  throw DomainError("unknown classifier family: " + std::string(text));
}

ForestModel train_forest(std::span<const LabeledExample> examples, const ForestParams &params,
                         std::uint64_t seed) {
  if (examples.size() < 2) {
    throw TrainingDataError("training needs at least two examples");
  }
  if (params.n_trees < 1) {
    throw DomainError("n_trees must be at least 1");
  }
  const auto labels = labels_of(examples);
  const ClassWeights weights = compute_class_weights(labels);

  std::vector<WeightedExample> full;
  full.reserve(examples.size());
  for (const auto &e : examples) {
    full.push_back({e.features.values(), e.label, weights[e.label]});
  }

  ForestModel model;
  model.family = ClassifierFamily::random_forest;
  model.params = params;
  model.seed = seed;
  model.class_weights = weights;
  model.feature_schema = current_schema();

  const TreeParams tree_params{params.max_depth, params.features_per_split};
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    Rng rng = Rng::derive(seed, t);
    if (params.bootstrap) {
      std::vector<WeightedExample> sample;
      sample.reserve(full.size());
      for (std::size_t i = 0; i < full.size(); ++i) {
        sample.push_back(full[rng.uniform_index(full.size())]);
      }
      model.trees.push_back(train_tree(sample, tree_params, rng));
    } else {
      model.trees.push_back(train_tree(full, tree_params, rng));
    }
  }
  return model;
}

ForestModel train_decision_tree(std::span<const LabeledExample> examples, std::size_t max_depth,
                                std::uint64_t seed) {
  ForestModel model = train_forest(examples, {1, max_depth, kFeatureCount, false}, seed);
  model.family = ClassifierFamily::decision_tree;
  return model;
}

Prediction predict(const ForestModel &model, const FeatureVector &features) {
  if (model.feature_schema != current_schema()) {
    throw ModelCompatibilityError("model feature schema does not match this build");
  }
  if (model.trees.empty()) {
    throw ModelCompatibilityError("model has no trees");
  }
  const auto x = features.values();
  std::size_t bot_votes = 0;
  for (const auto &tree : model.trees) {
    if (tree.predict(x) == Label::bot) {
      ++bot_votes;
    }
  }
  Prediction p;
  p.score = static_cast<double>(bot_votes) / static_cast<double>(model.trees.size());
  // 2 * votes >= n is the exact form of score >= 0.5
  p.label = 2 * bot_votes >= model.trees.size() ? Label::bot : Label::human;
  return p;
}

ZeroR zero_r(std::span<const Label> train_labels) {
  if (train_labels.empty()) {
    throw DomainError("zero_r needs at least one label");
  }
  const auto bots = std::count(train_labels.begin(), train_labels.end(), Label::bot);
  const auto humans = static_cast<std::ptrdiff_t>(train_labels.size()) - bots;
  return {bots >= humans ? Label::bot : Label::human};
}

ForestModel ZeroR::as_model() const {
  ForestModel model;
  model.family = ClassifierFamily::zero_r;
  model.params = {1, 0, kFeatureCount, false};
  model.feature_schema = current_schema();
  TreeNode leaf;
  leaf.predicted = majority;
  (majority == Label::bot ? leaf.bot_mass : leaf.human_mass) = 1.0;
  model.trees.push_back(DecisionTree{{leaf}});
  return model;
}

// --- persistence ---

namespace {

ojson node_to_json(const DecisionTree &tree, std::size_t i, const std::vector<std::string> &schema) {
  const TreeNode &n = tree.nodes[i];
  ojson out;
  if (n.is_leaf()) {
    out["leaf"] = true;
    out["label"] = to_string(n.predicted);
    out["mass"] = {{"bot", n.bot_mass}, {"human", n.human_mass}};
    return out;
  }
  out["feature"] = schema.at(n.feature);
  out["feature_index"] = n.feature;
  out["threshold"] = n.threshold;
  out["mass"] = {{"bot", n.bot_mass}, {"human", n.human_mass}};
  out["left"] = node_to_json(tree, n.left, schema);
  out["right"] = node_to_json(tree, n.right, schema);
  return out;
}

std::size_t node_from_json(const ojson &j, DecisionTree &tree, std::size_t depth) {
  if (depth > 10000) {
    throw CorruptModelError("tree nesting too deep");
  }
  const std::size_t id = tree.nodes.size();
  tree.nodes.emplace_back();
  TreeNode node;
  node.bot_mass = j.at("mass").at("bot").get<double>();
  node.human_mass = j.at("mass").at("human").get<double>();
  if (j.value("leaf", false)) {
    node.predicted = label_from_string(j.at("label").get<std::string>());
    tree.nodes[id] = node;
    return id;
  }
  node.feature = j.at("feature_index").get<std::size_t>();
  if (node.feature >= kFeatureCount) {
    throw CorruptModelError("feature index out of range");
  }
  node.threshold = j.at("threshold").get<double>();
  node.predicted = node.bot_mass >= node.human_mass ? Label::bot : Label::human;
  node.left = node_from_json(j.at("left"), tree, depth + 1);
  node.right = node_from_json(j.at("right"), tree, depth + 1);
  tree.nodes[id] = node;
  return id;
}

} // namespace

std::string serialize_model(const ForestModel &model) {
  ojson j;
  j["format"] = kModelFormat;
  j["version"] = model.version;
  j["family"] = to_string(model.family);
  j["params"] = {{"n_trees", model.params.n_trees},
                 {"max_depth", model.params.max_depth},
                 {"criterion", "entropy"},
                 {"features_per_split", model.params.features_per_split},
                 {"bootstrap", model.params.bootstrap}};
  j["seed"] = model.seed;
  j["generator"] = Rng::kGeneratorName;
  j["class_weights"] = {{"bot", model.class_weights.bot}, {"human", model.class_weights.human}};
  j["feature_schema"] = model.feature_schema;
  j["metadata"] = model.metadata;
  ojson trees = ojson::array();
  for (const auto &t : model.trees) {
    trees.push_back(node_to_json(t, 0, model.feature_schema));
  }
  j["trees"] = std::move(trees);
  return j.dump(2) + "\n";
}

ForestModel parse_model(std::string_view text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const ojson::exception &e) {
    throw CorruptModelError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("format", std::string()) != kModelFormat) {
      throw CorruptModelError("not a botgate model file");
    }
    const auto version = j.at("version").get<std::string>();
    if (version != kModelVersion) {
      throw ModelVersionError("unsupported model version '" + version + "' (expected " +
                              std::string(kModelVersion) + ")");
    }
    ForestModel m;
    m.version = version;
    m.family = family_from_string(j.at("family").get<std::string>());
    const auto &p = j.at("params");
    m.params.n_trees = p.at("n_trees").get<std::size_t>();
    m.params.max_depth = p.at("max_depth").get<std::size_t>();
    m.params.features_per_split = p.at("features_per_split").get<std::size_t>();
    m.params.bootstrap = p.at("bootstrap").get<bool>();
    if (p.at("criterion").get<std::string>() != "entropy") {
      throw CorruptModelError("unsupported split criterion");
    }
    m.seed = j.at("seed").get<std::uint64_t>();
    m.class_weights.bot = j.at("class_weights").at("bot").get<double>();
    m.class_weights.human = j.at("class_weights").at("human").get<double>();
    m.feature_schema = j.at("feature_schema").get<std::vector<std::string>>();
    if (j.contains("metadata")) {
      m.metadata = j["metadata"];
    }
    for (const auto &tj : j.at("trees")) {
      DecisionTree tree;
      node_from_json(tj, tree, 0);
      if (tree.depth() > m.params.max_depth) {
        throw CorruptModelError("tree deeper than max_depth");
      }
      m.trees.push_back(std::move(tree));
    }
    if (m.trees.size() != m.params.n_trees) {
      throw CorruptModelError("tree count does not match n_trees");
    }
    return m;
  } catch (const ModelError &) {
    throw;
  } catch (const std::exception &e) {
    throw CorruptModelError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const ForestModel &model, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write model file " + path.string());
  }
  out << serialize_model(model);
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

ForestModel load_model(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ModelError("cannot open model file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

} // namespace botgate
