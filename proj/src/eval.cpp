#include "botgate/eval.hpp"

#include "botgate/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace botgate {

using ojson = nlohmann::ordered_json;

void ConfusionMatrix::add(Label truth, Label predicted) {
  if (truth == Label::bot) {
    ++(predicted == Label::bot ? tp : fn);
  } else {
    ++(predicted == Label::bot ? fp : tn);
  }
}

namespace {

// Ratio with the zero-denominator convention: 0 plus a flag.
double ratio(double num, double den, bool &undefined) {
  if (den == 0.0) {
    undefined = true;
    return 0.0;
  }
  return num / den;
}

double harmonic(double p, double r, bool &undefined) {
  if (p + r == 0.0) {
    undefined = true;
    return 0.0;
  }
  return 2.0 * p * r / (p + r);
}

} // namespace

MetricsReport metrics_from_confusion(const ConfusionMatrix &cm, std::size_t n_bots,
                                     std::size_t n_humans) {
  if (cm.bots() != n_bots || cm.humans() != n_humans) {
    throw DomainError("confusion matrix does not match the class sizes");
  }
  const auto tp = static_cast<double>(cm.tp);
  const auto fn = static_cast<double>(cm.fn);
  const auto fp = static_cast<double>(cm.fp);
  const auto tn = static_cast<double>(cm.tn);

  MetricsReport m;
  m.bot.precision = ratio(tp, tp + fp, m.bot.precision_undefined);
  m.bot.recall = ratio(tp, tp + fn, m.bot.recall_undefined);
  m.bot.f1 = harmonic(m.bot.precision, m.bot.recall, m.bot.f1_undefined);
  m.human.precision = ratio(tn, tn + fn, m.human.precision_undefined);
  m.human.recall = ratio(tn, tn + fp, m.human.recall_undefined);
  m.human.f1 = harmonic(m.human.precision, m.human.recall, m.human.f1_undefined);

  const auto b = static_cast<double>(n_bots);
  const auto h = static_cast<double>(n_humans);
  bool unused = false;
  m.precision = ratio(m.bot.precision * b + m.human.precision * h, b + h, unused);
  m.recall = ratio(m.bot.recall * b + m.human.recall * h, b + h, unused);
  m.f1 = harmonic(m.precision, m.recall, m.f1_undefined);
  return m;
}

MetricsReport metrics_from_confusion(const ConfusionMatrix &cm) {
  return metrics_from_confusion(cm, cm.bots(), cm.humans());
}

namespace {

std::array<std::vector<std::size_t>, 2> indices_by_class(std::span<const Label> labels) {
  std::array<std::vector<std::size_t>, 2> out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[labels[i] == Label::bot ? 0 : 1].push_back(i);
  }
  return out;
}

} // namespace

SplitIndices stratified_split(std::span<const Label> labels, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw DomainError("test_fraction must lie in (0, 1)");
  }
  auto classes = indices_by_class(labels);
  if (classes[0].empty() || classes[1].empty()) {
    throw DomainError("stratified split needs both classes");
  }
  const std::size_t total_test =
      static_cast<std::size_t>(std::llround(static_cast<double>(labels.size()) * test_fraction));
  // Smaller class first; on a tie the bot class counts as the smaller one.
  const std::size_t minor = classes[0].size() <= classes[1].size() ? 0 : 1;
  const std::size_t major = 1 - minor;
  std::array<std::size_t, 2> take{};
  take[minor] = static_cast<std::size_t>(
      std::llround(static_cast<double>(classes[minor].size()) * test_fraction));
  take[major] = std::min(classes[major].size(), total_test - std::min(total_test, take[minor]));

  SplitIndices out;
  for (std::size_t c = 0; c < 2; ++c) {
    Rng rng = Rng::derive(seed, c);
    rng.shuffle(classes[c]);
    out.test.insert(out.test.end(), classes[c].begin(), classes[c].begin() + take[c]);
    out.train.insert(out.train.end(), classes[c].begin() + take[c], classes[c].end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::vector<std::vector<std::size_t>> stratified_kfold(std::span<const Label> labels, std::size_t k,
                                                       std::uint64_t seed) {
  if (k < 2) {
    throw DomainError("k-fold needs k >= 2");
  }
  auto classes = indices_by_class(labels);
  for (const auto &members : classes) {
    if (members.size() < k) {
      throw DomainError("every class needs at least k members for k-fold");
    }
  }
  std::vector<std::vector<std::size_t>> folds(k);
  // Deal round-robin, continuing across classes so fold sizes stay within one.
  std::size_t position = 0;
  for (std::size_t c = 0; c < 2; ++c) {
    Rng rng = Rng::derive(seed, c);
    rng.shuffle(classes[c]);
    for (std::size_t idx : classes[c]) {
      folds[position++ % k].push_back(idx);
    }
  }
  for (auto &f : folds) {
    std::sort(f.begin(), f.end());
  }
  return folds;
}

void GridSpec::validate() const {
  if (families.empty()) {
    throw DomainError("grid has no classifier families");
  }
  for (const auto &f : families) {
    if (f.family == ClassifierFamily::zero_r) {
      continue;
    }
    if (f.max_depth.empty()) {
      throw DomainError("grid entry has an empty max_depth list");
    }
    if (f.family == ClassifierFamily::random_forest &&
        (f.n_trees.empty() || f.features_per_split.empty())) {
      throw DomainError("grid entry has an empty value list");
    }
  }
}

std::string Configuration::describe() const {
  std::string s{to_string(family)};
  switch (family) {
  case ClassifierFamily::random_forest:
    s += "(n_trees=" + std::to_string(params.n_trees) +
         ",max_depth=" + std::to_string(params.max_depth) +
         ",features_per_split=" + std::to_string(params.features_per_split) + ")";
    break;
  case ClassifierFamily::decision_tree:
    s += "(max_depth=" + std::to_string(params.max_depth) + ")";
    break;
  case ClassifierFamily::zero_r:
    break;
  }
  return s;
}

std::vector<Configuration> expand_grid(const GridSpec &grid) {
  grid.validate();
  std::vector<Configuration> out;
  for (const auto &f : grid.families) {
    switch (f.family) {
    case ClassifierFamily::zero_r:
      out.push_back({f.family, {1, 0, kFeatureCount, false}});
      break;
    case ClassifierFamily::decision_tree:
      for (std::size_t depth : f.max_depth) {
        out.push_back({f.family, {1, depth, kFeatureCount, false}});
      }
      break;
    case ClassifierFamily::random_forest:
      for (std::size_t trees : f.n_trees) {
        for (std::size_t depth : f.max_depth) {
          for (std::size_t fps : f.features_per_split) {
            out.push_back({f.family, {trees, depth, fps, true}});
          }
        }
      }
      break;
    }
  }
  return out;
}

ForestModel fit(const Configuration &config, std::span<const LabeledExample> examples,
                std::uint64_t seed) {
  switch (config.family) {
  case ClassifierFamily::zero_r: {
    std::vector<Label> labels;
    labels.reserve(examples.size());
    for (const auto &e : examples) {
      labels.push_back(e.label);
    }
    return zero_r(labels).as_model();
  }
  case ClassifierFamily::decision_tree:
    return train_decision_tree(examples, config.params.max_depth, seed);
  case ClassifierFamily::random_forest:
    return train_forest(examples, config.params, seed);
  }
  throw DomainError("unknown classifier family");
}

std::vector<CvResult> grid_search_cv(std::span<const LabeledExample> train, const GridSpec &grid) {
  const auto configs = expand_grid(grid);
  std::vector<Label> labels;
  labels.reserve(train.size());
  for (const auto &e : train) {
    labels.push_back(e.label);
  }
  const auto folds = stratified_kfold(labels, grid.k, grid.seed);

  std::vector<CvResult> results;
  for (const auto &config : configs) {
    CvResult r;
    r.config = config;
    try {
      for (std::size_t held = 0; held < folds.size(); ++held) {
        std::vector<LabeledExample> fit_set;
        for (std::size_t f = 0; f < folds.size(); ++f) {
          if (f == held) {
            continue;
          }
          for (std::size_t i : folds[f]) {
            fit_set.push_back(train[i]);
          }
        }
        const ForestModel model = fit(config, fit_set, grid.seed);
        ConfusionMatrix cm;
        for (std::size_t i : folds[held]) {
          cm.add(train[i].label, predict(model, train[i].features).label);
        }
        r.folds.push_back(metrics_from_confusion(cm));
      }
    } catch (const Error &e) {
      throw Error("configuration " + config.describe() + ": " + e.what());
    }
    const auto n = static_cast<double>(r.folds.size());
    for (const auto &m : r.folds) {
      r.mean_precision += m.precision / n;
      r.mean_recall += m.recall / n;
      r.mean_f1 += m.f1 / n;
      r.mean_bot_recall += m.bot.recall / n;
    }
    results.push_back(std::move(r));
  }

  std::stable_sort(results.begin(), results.end(), [](const CvResult &a, const CvResult &b) {
    if (a.mean_f1 != b.mean_f1) {
      return a.mean_f1 > b.mean_f1;
    }
    if (a.mean_bot_recall != b.mean_bot_recall) {
      return a.mean_bot_recall > b.mean_bot_recall;
    }
    if (a.config.params.n_trees != b.config.params.n_trees) {
      return a.config.params.n_trees < b.config.params.n_trees;
    }
    return a.config.params.max_depth < b.config.params.max_depth;
  });
  return results;
}

std::vector<BinReport> f1_by_comment_bins(std::span<const BinInput> predictions, std::size_t bin_width) {
  if (bin_width < 1) {
    throw DomainError("bin_width must be at least 1");
  }
  std::map<std::size_t, ConfusionMatrix> bins;
  for (const auto &p : predictions) {
    bins[p.non_empty_comments / bin_width].add(p.truth, p.predicted);
  }
  std::vector<BinReport> out;
  for (const auto &[bin, cm] : bins) {
    BinReport r;
    r.lower = bin * bin_width;
    r.upper = r.lower + bin_width - 1;
    r.population = cm.bots() + cm.humans();
    r.confusion = cm;
    r.metrics = metrics_from_confusion(cm);
    out.push_back(r);
  }
  return out;
}

ojson to_json(const ConfusionMatrix &cm) {
  return {{"tp", cm.tp}, {"fn", cm.fn}, {"fp", cm.fp}, {"tn", cm.tn}};
}

namespace {

ojson class_json(const ClassMetrics &c) {
  ojson j = {{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}};
  ojson undefined = ojson::array();
  if (c.precision_undefined) {
    undefined.push_back("precision");
  }
  if (c.recall_undefined) {
    undefined.push_back("recall");
  }
  if (c.f1_undefined) {
    undefined.push_back("f1");
  }
  j["undefined"] = undefined;
  return j;
}

} // namespace

ojson to_json(const MetricsReport &m) {
  return {{"bot", class_json(m.bot)},
          {"human", class_json(m.human)},
          {"weighted", {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}}}};
}

ojson to_json(const CvResult &r) {
  return {{"configuration", r.config.describe()},
          {"family", to_string(r.config.family)},
          {"n_trees", r.config.params.n_trees},
          {"max_depth", r.config.params.max_depth},
          {"features_per_split", r.config.params.features_per_split},
          {"mean_precision", r.mean_precision},
          {"mean_recall", r.mean_recall},
          {"mean_f1", r.mean_f1},
          {"mean_bot_recall", r.mean_bot_recall}};
}

ojson to_json(const BinReport &b) {
  return {{"bin", std::to_string(b.lower) + "-" + std::to_string(b.upper)},
          {"lower", b.lower},
          {"upper", b.upper},
          {"population", b.population},
          {"confusion", to_json(b.confusion)},
          {"f1", b.metrics.f1}};
}

} // namespace botgate
