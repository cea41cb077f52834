#include "botgate/pipeline.hpp"

#include "botgate/errors.hpp"

#include <algorithm>
#include <cstdio>

namespace botgate {

using ojson = nlohmann::ordered_json;

namespace {

std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::vector<std::size_t> size_list(const nlohmann::json &j, const char *key, std::vector<std::size_t> fallback) {
  if (!j.contains(key)) {
    return fallback;
  }
  return j.at(key).get<std::vector<std::size_t>>();
}

} // namespace

GridSpec default_grid(std::size_t k, std::uint64_t seed) {
  GridSpec g;
  g.k = k;
  g.seed = seed;
  FamilyGrid rf;
  rf.family = ClassifierFamily::random_forest;
  rf.n_trees = {10, 50};
  rf.max_depth = {5, 10};
  rf.features_per_split = {2};
  FamilyGrid dt;
  dt.family = ClassifierFamily::decision_tree;
  dt.max_depth = {5, 10};
  FamilyGrid zr;
  zr.family = ClassifierFamily::zero_r;
  g.families = {rf, dt, zr};
  return g;
}

GridSpec parse_grid(std::string_view text, std::size_t k, std::uint64_t seed) {
  GridSpec g;
  g.k = k;
  g.seed = seed;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto &f : j.at("families")) {
      FamilyGrid fg;
      fg.family = family_from_string(f.at("family").get<std::string>());
      fg.n_trees = size_list(f, "n_trees", fg.n_trees);
      fg.max_depth = size_list(f, "max_depth", fg.max_depth);
      fg.features_per_split = size_list(f, "features_per_split", fg.features_per_split);
      for (const auto *values : {&fg.n_trees, &fg.max_depth, &fg.features_per_split}) {
        if (std::find(values->begin(), values->end(), std::size_t{0}) != values->end()) {
          throw LoadError("invalid grid: values must be positive");
        }
      }
      g.families.push_back(std::move(fg));
    }
    g.validate();
  } catch (const nlohmann::json::exception &e) {
    throw LoadError(std::string("invalid grid: ") + e.what());
  } catch (const DomainError &e) {
    throw LoadError(std::string("invalid grid: ") + e.what());
  }
  return g;
}

EvaluationReport evaluate_model(const ForestModel &model, const FeatureTable &table) {
  const auto examples = table.examples();
  EvaluationReport r;
  std::vector<BinInput> bins;
  for (const auto &e : examples) {
    const auto p = predict(model, e.features);
    r.confusion.add(e.label, p.label);
    r.predictions.push_back({e.features.account, e.label, p, e.features.non_empty_comments()});
    bins.push_back({e.label, p.label, e.features.non_empty_comments()});
  }
  std::sort(r.predictions.begin(), r.predictions.end(),
            [](const AccountPrediction &a, const AccountPrediction &b) { return a.account < b.account; });
  r.metrics = metrics_from_confusion(r.confusion);
  r.bins = f1_by_comment_bins(bins);
  return r;
}

TrainReport train_pipeline(const FeatureTable &table, const TrainOptions &options, const StageObserver &observer) {
  const auto examples = table.examples();
  std::vector<Label> labels;
  for (const auto &e : examples) {
    labels.push_back(e.label);
  }
  const auto split = stratified_split(labels, options.test_fraction, options.seed);

  TrainReport report;
  FeatureTable train_part;
  FeatureTable test_part;
  std::vector<LabeledExample> train;
  for (std::size_t i : split.train) {
    train.push_back(examples[i]);
    train_part.rows.push_back(examples[i].features);
    train_part.labels.push_back(examples[i].label);
    report.train_accounts.push_back(examples[i].features.account);
  }
  for (std::size_t i : split.test) {
    test_part.rows.push_back(examples[i].features);
    test_part.labels.push_back(examples[i].label);
    report.test_accounts.push_back(examples[i].features.account);
  }
  std::sort(report.train_accounts.begin(), report.train_accounts.end());
  std::sort(report.test_accounts.begin(), report.test_accounts.end());

  const GridSpec grid = options.grid ? *options.grid : default_grid(options.folds, options.seed);
  if (observer) {
    observer("grid_search", train);
  }
  report.cv = grid_search_cv(train, grid);
  report.best = report.cv.front().config;

  if (observer) {
    observer("refit", train);
  }
  report.model = fit(report.best, train, options.seed);

  if (observer) {
    observer("test", test_part.examples());
  }
  report.test = evaluate_model(report.model, test_part);
  report.zero_r_test = evaluate_model(fit(Configuration{ClassifierFamily::zero_r, {}}, train, options.seed), test_part);

  auto &meta = report.model.metadata;
  meta["training"] = {{"examples", examples.size()},
                      {"train_examples", split.train.size()},
                      {"test_examples", split.test.size()},
                      {"test_fraction", options.test_fraction},
                      {"folds", grid.k},
                      {"seed", options.seed},
                      {"configuration", report.best.describe()},
                      {"test_weighted_f1", report.test.metrics.f1}};
  return report;
}

ojson to_json(const EvaluationReport &r) {
  ojson bins = ojson::array();
  for (const auto &b : r.bins) {
    bins.push_back(to_json(b));
  }
  ojson predictions = ojson::array();
  for (const auto &p : r.predictions) {
    predictions.push_back({{"account", p.account},
                           {"truth", to_string(p.truth)},
                           {"prediction", to_string(p.prediction.label)},
                           {"score", p.prediction.score},
                           {"non_empty_comments", p.non_empty_comments}});
  }
  return {{"confusion", to_json(r.confusion)},
          {"metrics", to_json(r.metrics)},
          {"bins", std::move(bins)},
          {"predictions", std::move(predictions)}};
}

ojson to_json(const TrainReport &r) {
  ojson cv = ojson::array();
  for (const auto &c : r.cv) {
    cv.push_back(to_json(c));
  }
  return {{"best", r.best.describe()},
          {"cross_validation", std::move(cv)},
          {"split", {{"train_accounts", r.train_accounts}, {"test_accounts", r.test_accounts}}},
          {"test", to_json(r.test)},
          {"zero_r_test", {{"confusion", to_json(r.zero_r_test.confusion)}, {"metrics", to_json(r.zero_r_test.metrics)}}}};
}

std::string evaluation_csv(const EvaluationReport &r) {
  const auto &m = r.metrics;
  std::string out = "metric,value\n";
  auto row = [&out](const std::string &name, double v) { out += name + "," + fixed6(v) + "\n"; };
  row("precision_bot", m.bot.precision);
  row("recall_bot", m.bot.recall);
  row("f1_bot", m.bot.f1);
  row("precision_human", m.human.precision);
  row("recall_human", m.human.recall);
  row("f1_human", m.human.f1);
  row("precision_weighted", m.precision);
  row("recall_weighted", m.recall);
  row("f1_weighted", m.f1);
  out += "tp," + std::to_string(r.confusion.tp) + "\n";
  out += "fn," + std::to_string(r.confusion.fn) + "\n";
  out += "fp," + std::to_string(r.confusion.fp) + "\n";
  out += "tn," + std::to_string(r.confusion.tn) + "\n";
  return out;
}

std::string train_report_csv(const TrainReport &r) {
  std::string out = "rank,configuration,mean_precision,mean_recall,mean_f1,mean_bot_recall\n";
  for (std::size_t i = 0; i < r.cv.size(); ++i) {
    const auto &c = r.cv[i];
    // describe() contains commas
    out += std::to_string(i + 1) + ",\"" + c.config.describe() + "\"," + fixed6(c.mean_precision) + "," +
           fixed6(c.mean_recall) + "," + fixed6(c.mean_f1) + "," + fixed6(c.mean_bot_recall) + "\n";
  }
  return out;
}

std::string bins_csv(const std::vector<BinReport> &bins) {
  std::string out = "lower,upper,population,tp,fn,fp,tn,f1\n";
  for (const auto &b : bins) {
    out += std::to_string(b.lower) + "," + std::to_string(b.upper) + "," + std::to_string(b.population) + "," +
           std::to_string(b.confusion.tp) + "," + std::to_string(b.confusion.fn) + "," +
           std::to_string(b.confusion.fp) + "," + std::to_string(b.confusion.tn) + "," + fixed6(b.metrics.f1) + "\n";
  }
  return out;
}

} // namespace botgate
