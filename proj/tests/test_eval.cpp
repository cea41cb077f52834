#include "doctest.h"

#include "botgate/errors.hpp"
#include "botgate/eval.hpp"

#include <map>
#include <random>
#include <set>

using namespace botgate;

namespace {

std::vector<Label> labels_with(std::size_t bots, std::size_t total) {
  std::vector<Label> out(total, Label::human);
  // interleave so classes are not contiguous
  for (std::size_t i = 0; i < bots; ++i) {
    out[(i * 7919) % total] = Label::bot;
  }
  std::size_t placed = 0;
  for (auto l : out) {
    placed += l == Label::bot ? 1 : 0;
  }
  for (std::size_t i = 0; placed < bots; ++i) {
    if (out[i] == Label::human) {
      out[i] = Label::bot;
      ++placed;
    }
  }
  return out;
}

std::size_t count_bots(std::span<const Label> labels, std::span<const std::size_t> idx) {
  std::size_t n = 0;
  for (auto i : idx) {
    n += labels[i] == Label::bot ? 1 : 0;
  }
  return n;
}

LabeledExample ex(std::size_t total, std::size_t patterns, Label label) {
  return {FeatureVector{"", total, 0, patterns, 0.0}, label};
}

} // namespace

TEST_CASE("metrics on the published test-set confusion matrix") {
  const ConfusionMatrix cm{192, 19, 13, 1776};
  const auto m = metrics_from_confusion(cm, 211, 1789);
  // independent arithmetic
  const double pb = 192.0 / 205.0;
  const double rb = 192.0 / 211.0;
  const double ph = 1776.0 / 1795.0;
  const double rh = 1776.0 / 1789.0;
  CHECK(m.bot.precision == doctest::Approx(pb));
  CHECK(m.bot.recall == doctest::Approx(rb));
  CHECK(m.human.precision == doctest::Approx(ph));
  CHECK(m.human.recall == doctest::Approx(rh));
  const double wp = (pb * 211 + ph * 1789) / 2000;
  const double wr = (rb * 211 + rh * 1789) / 2000;
  CHECK(m.precision == doctest::Approx(wp));
  CHECK(m.recall == doctest::Approx(wr));
  CHECK(m.f1 == doctest::Approx(2 * wp * wr / (wp + wr)));

  CHECK(std::abs(m.bot.precision - 0.94) <= 0.005);
  CHECK(std::abs(m.bot.recall - 0.91) <= 0.005);
  CHECK(std::abs(m.bot.f1 - 0.92) <= 0.005);
  CHECK(std::abs(m.human.precision - 0.99) <= 0.005);
  CHECK(std::abs(m.human.recall - 0.99) <= 0.005);
  CHECK(std::abs(m.human.f1 - 0.99) <= 0.005);
  CHECK(std::abs(m.precision - 0.98) <= 0.005);
  CHECK(std::abs(m.recall - 0.98) <= 0.005);
  CHECK(std::abs(m.f1 - 0.98) <= 0.005);
}

TEST_CASE("metrics for the majority baseline") {
  const ConfusionMatrix cm{0, 107, 0, 893};
  const auto m = metrics_from_confusion(cm, 107, 893);
  CHECK(m.bot.precision == 0.0);
  CHECK(m.bot.precision_undefined);
  CHECK(m.bot.recall == 0.0);
  CHECK_FALSE(m.bot.recall_undefined);
  CHECK(m.bot.f1_undefined);
  CHECK(m.human.precision == doctest::Approx(0.893));
  CHECK(m.human.recall == 1.0);
  CHECK(std::abs(m.precision - 0.798) <= 0.005);
  CHECK(std::abs(m.recall - 0.893) <= 0.005);
  CHECK(std::abs(m.f1 - 0.843) <= 0.005);
}

TEST_CASE("metrics edge cases") {
  const auto perfect = metrics_from_confusion({5, 0, 0, 45});
  CHECK(perfect.bot.f1 == 1.0);
  CHECK(perfect.human.f1 == 1.0);
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.f1 == 1.0);
  CHECK_THROWS_AS(metrics_from_confusion({5, 0, 0, 45}, 6, 44), DomainError);

  // weighted values are class-size weighted means, F1 is not the mean of F1s
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::size_t> d(1, 50);
  for (int i = 0; i < 100; ++i) {
    const ConfusionMatrix cm{d(rng), d(rng), d(rng), d(rng)};
    const auto m = metrics_from_confusion(cm);
    const double b = static_cast<double>(cm.bots());
    const double h = static_cast<double>(cm.humans());
    CHECK(m.precision == doctest::Approx((m.bot.precision * b + m.human.precision * h) / (b + h)));
    CHECK(m.recall == doctest::Approx((m.bot.recall * b + m.human.recall * h) / (b + h)));
    CHECK(m.f1 == doctest::Approx(2 * m.precision * m.recall / (m.precision + m.recall)));
    for (double v : {m.precision, m.recall, m.f1, m.bot.f1, m.human.f1}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
}

TEST_CASE("stratified split") {
  const auto labels = labels_with(527, 5000);
  const auto split = stratified_split(labels, 0.4, 7);
  CHECK(split.test.size() == 2000);
  CHECK(count_bots(labels, split.test) == 211);
  CHECK(split.test.size() - count_bots(labels, split.test) == 1789);
  std::set<std::size_t> all(split.train.begin(), split.train.end());
  all.insert(split.test.begin(), split.test.end());
  CHECK(all.size() == 5000);
  CHECK(split.train.size() + split.test.size() == 5000);

  const auto again = stratified_split(labels, 0.4, 7);
  CHECK(again.test == split.test);
  CHECK(stratified_split(labels, 0.4, 8).test != split.test);

  const auto ten = labels_with(5, 10);
  const auto half = stratified_split(ten, 0.5, 1);
  const auto tb = count_bots(ten, half.test);
  CHECK(tb >= 2);
  CHECK(tb <= 3);
  CHECK(half.test.size() == 5);

  CHECK_THROWS_AS(stratified_split(labels, 0.0, 1), DomainError);
  CHECK_THROWS_AS(stratified_split(labels, 1.0, 1), DomainError);
  CHECK_THROWS_AS(stratified_split(std::vector<Label>(10, Label::human), 0.4, 1), DomainError);
}

TEST_CASE("stratified split proportionality property") {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<std::size_t> total(4, 400);
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  for (int i = 0; i < 200; ++i) {
    const std::size_t n = total(rng);
    const std::size_t bots = 1 + rng() % (n - 1);
    const double f = frac(rng);
    const auto labels = labels_with(bots, n);
    const auto s = stratified_split(labels, f, i);
    const double expected_b = static_cast<double>(bots) * f;
    const double expected_h = static_cast<double>(n - bots) * f;
    const auto tb = static_cast<double>(count_bots(labels, s.test));
    const auto th = static_cast<double>(s.test.size()) - tb;
    CHECK(std::abs(tb - expected_b) <= 1.0);
    CHECK(std::abs(th - expected_h) <= 1.0);
  }
}

TEST_CASE("stratified k-fold") {
  const auto labels = labels_with(10, 100);
  const auto folds = stratified_kfold(labels, 10, 3);
  REQUIRE(folds.size() == 10);
  std::set<std::size_t> seen;
  for (const auto &f : folds) {
    CHECK(f.size() == 10);
    CHECK(count_bots(labels, f) == 1);
    for (auto i : f) {
      CHECK(seen.insert(i).second);
    }
  }
  CHECK(seen.size() == 100);
  CHECK_THROWS_AS(stratified_kfold(labels, 1, 3), DomainError);
  CHECK_THROWS_AS(stratified_kfold(labels_with(4, 20), 10, 3), DomainError);
  const auto a = stratified_kfold(labels_with(10, 20), 10, 9);
  CHECK(a == stratified_kfold(labels_with(10, 20), 10, 9));

  // sizes within one and per-fold class counts within one of the global ratio
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    const std::size_t k = 2 + rng() % 9;
    const std::size_t n = k * 2 + rng() % 200;
    const std::size_t bots = k + rng() % (n - 2 * k + 1);
    const auto l = labels_with(bots, n);
    const auto fs = stratified_kfold(l, k, i);
    std::size_t lo = n;
    std::size_t hi = 0;
    for (const auto &f : fs) {
      lo = std::min(lo, f.size());
      hi = std::max(hi, f.size());
      const double expect = static_cast<double>(bots) / static_cast<double>(k);
      CHECK(std::abs(static_cast<double>(count_bots(l, f)) - expect) < 1.0);
    }
    CHECK(hi - lo <= 1);
  }
}

TEST_CASE("grid search") {
  std::vector<LabeledExample> train;
  for (std::size_t i = 0; i < 20; ++i) {
    train.push_back(ex(20 + i, 1 + i % 2, Label::bot));
  }
  for (std::size_t i = 0; i < 80; ++i) {
    train.push_back(ex(15 + i % 40, 10 + i % 30, Label::human));
  }
  GridSpec one{{FamilyGrid{ClassifierFamily::random_forest, {10}, {10}, {2}}}, 10, 1};
  const auto single = grid_search_cv(train, one);
  REQUIRE(single.size() == 1);
  CHECK(single[0].folds.size() == 10);

  GridSpec grid{{FamilyGrid{ClassifierFamily::zero_r, {}, {}, {}},
                 FamilyGrid{ClassifierFamily::random_forest, {5, 10}, {3, 10}, {2}},
                 FamilyGrid{ClassifierFamily::decision_tree, {}, {2, 5}, {}}},
                5,
                11};
  CHECK(expand_grid(grid).size() == 7);
  const auto ranked = grid_search_cv(train, grid);
  REQUIRE(ranked.size() == 7);
  CHECK(ranked.back().config.family == ClassifierFamily::zero_r);
  CHECK(ranked.front().mean_f1 > ranked.back().mean_f1);
  for (std::size_t i = 1; i < ranked.size(); ++i) {
    CHECK(ranked[i - 1].mean_f1 >= ranked[i].mean_f1);
  }
  const auto again = grid_search_cv(train, grid);
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    CHECK(again[i].config == ranked[i].config);
    CHECK(again[i].mean_f1 == ranked[i].mean_f1);
  }

  // ties: equal F1 and recall prefer fewer trees, then shallower depth
  GridSpec tie{{FamilyGrid{ClassifierFamily::random_forest, {10, 3}, {10, 4}, {4}}}, 5, 11};
  const auto tied = grid_search_cv(train, tie);
  if (tied[0].mean_f1 == tied[1].mean_f1 && tied[0].mean_bot_recall == tied[1].mean_bot_recall) {
    CHECK(tied[0].config.params.n_trees <= tied[1].config.params.n_trees);
  }

  CHECK_THROWS_AS(grid_search_cv(train, GridSpec{}), DomainError);
  CHECK_THROWS_AS(
      grid_search_cv(train, GridSpec{{FamilyGrid{ClassifierFamily::random_forest, {}, {10}, {2}}}, 10, 1}),
      DomainError);
}

TEST_CASE("grid search attributes fold failures to the configuration") {
  std::vector<LabeledExample> train;
  for (std::size_t i = 0; i < 12; ++i) {
    train.push_back(ex(20 + i, 1, i < 2 ? Label::bot : Label::human));
  }
  GridSpec g{{FamilyGrid{ClassifierFamily::random_forest, {0}, {3}, {2}}}, 2, 1};
  bool thrown = false;
  try {
    grid_search_cv(train, g);
  } catch (const Error &e) {
    thrown = true;
    CHECK(std::string(e.what()).find("random_forest(n_trees=0") != std::string::npos);
  }
  CHECK(thrown);
}

TEST_CASE("f1 by comment bins") {
  std::vector<BinInput> preds{{Label::bot, Label::bot, 3}, {Label::human, Label::human, 7}};
  auto bins = f1_by_comment_bins(preds);
  REQUIRE(bins.size() == 2);
  CHECK(bins[0].lower == 0);
  CHECK(bins[0].upper == 4);
  CHECK(bins[0].population == 1);
  CHECK(bins[1].lower == 5);
  CHECK(bins[1].upper == 9);

  std::vector<BinInput> same{{Label::bot, Label::bot, 11},
                             {Label::bot, Label::human, 12},
                             {Label::human, Label::human, 10},
                             {Label::human, Label::bot, 14}};
  bins = f1_by_comment_bins(same);
  REQUIRE(bins.size() == 1);
  CHECK(bins[0].metrics.f1 == metrics_from_confusion({1, 1, 1, 1}).f1);

  // recomputation oracle
  std::mt19937_64 rng(4);
  std::vector<BinInput> many;
  std::map<std::size_t, ConfusionMatrix> expected;
  for (int i = 0; i < 300; ++i) {
    BinInput b{rng() % 2 ? Label::bot : Label::human, rng() % 3 ? Label::bot : Label::human,
               static_cast<std::size_t>(rng() % 60)};
    many.push_back(b);
    expected[b.non_empty_comments / 5].add(b.truth, b.predicted);
  }
  bins = f1_by_comment_bins(many);
  REQUIRE(bins.size() == expected.size());
  for (const auto &bin : bins) {
    const auto &cm = expected.at(bin.lower / 5);
    CHECK(bin.confusion == cm);
    CHECK(bin.metrics.f1 == metrics_from_confusion(cm).f1);
  }
  CHECK_THROWS_AS(f1_by_comment_bins(many, 0), DomainError);
}

TEST_CASE("report json") {
  const auto j = to_json(metrics_from_confusion({0, 3, 0, 7}));
  CHECK(j["bot"]["undefined"].size() == 2);
  CHECK(j["weighted"]["recall"].get<double>() == doctest::Approx(0.7));
  CHECK(to_json(ConfusionMatrix{1, 2, 3, 4}).dump() == R"({"tp":1,"fn":2,"fp":3,"tn":4})");
}
