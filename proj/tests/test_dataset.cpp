#include "doctest.h"

#include "botgate/dataset.hpp"
#include "botgate/errors.hpp"
#include "botgate/features.hpp"
#include "botgate/synthetic.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

using namespace botgate;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string &name) {
  return fs::temp_directory_path() / ("botgate_dataset_" + std::to_string(::getpid()) + "_" + name);
}

void write(const fs::path &p, const std::string &text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string read(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string header(bool label) { return feature_csv_header(label) + "\n"; }

} // namespace

TEST_CASE("feature CSV round trip keeps every bit") {
  FeatureTable t;
  t.rows = {{"alice", 12, 2, 9, 0.1 + 0.2}, {"ci-helper[bot]", 80, 0, 1, 0.0}, {"zed", 10, 10, 0, 0.0}};
  t.labels = {Label::human, Label::bot, Label::human};
  const auto p = temp_file("roundtrip.csv");
  save_feature_csv(p, t);
  const auto back = load_feature_csv(p);
  CHECK(back.rows == t.rows);
  CHECK(back.labels == t.labels);
  CHECK(back.labeled());
  CHECK(back.examples().size() == 3);
  CHECK(back.examples()[1].label == Label::bot);

  FeatureTable unlabeled;
  unlabeled.rows = t.rows;
  save_feature_csv(p, unlabeled);
  CHECK(read(p).rfind(header(false), 0) == 0);
  const auto u = load_feature_csv(p);
  CHECK(u.rows == t.rows);
  CHECK_FALSE(u.labeled());
  CHECK_THROWS_AS(u.examples(), TrainingDataError);
  fs::remove(p);

  FeatureTable bad;
  bad.rows = {{"a,b", 10, 0, 1, 0.0}};
  CHECK_THROWS_AS(save_feature_csv(p, bad), DomainError);
}

TEST_CASE("feature CSV parsing tolerates CRLF and blank lines") {
  const std::string text = header(true) + "a,10,0,1,0,bot\r\n\r\nb,20,5,3,0.25,human\r\n";
  const auto t = parse_feature_csv(text);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1].gini_patterns == 0.25);
  CHECK(t.labels[1] == Label::human);
  CHECK(parse_feature_csv(header(false)).rows.empty());
}

TEST_CASE("feature CSV errors name the source line") {
  auto error_of = [](const std::string &text) {
    try {
      parse_feature_csv(text, "f.csv");
    } catch (const LoadError &e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(error_of("").find("missing header") != std::string::npos);
  CHECK(error_of("account,x\n").find("unexpected header") != std::string::npos);
  CHECK(error_of(header(true) + "a,10,0,1,0,bot\na,10,0,1,0,bot\n").find("f.csv:3: duplicate account 'a'") !=
        std::string::npos);
  CHECK(error_of(header(true) + "a,10,0,1,0\n").find("f.csv:2: expected 6 fields") != std::string::npos);
  CHECK(error_of(header(true) + "a,10,0,1,0,robot\n").find("f.csv:2") != std::string::npos);
  CHECK(error_of(header(false) + "a,-1,0,1,0\n").find("f.csv:2") != std::string::npos);
  CHECK(error_of(header(false) + "a,10,11,1,0\n").find("out of range") != std::string::npos);
  CHECK(error_of(header(false) + "a,10,0,11,0\n").find("out of range") != std::string::npos);
  CHECK(error_of(header(false) + "a,10,0,1,1.5\n").find("out of range") != std::string::npos);
  CHECK(error_of(header(false) + "a,10,0,1,0.5x\n").find("not a number") != std::string::npos);
  CHECK(error_of(header(false) + ",10,0,1,0\n").find("empty account") != std::string::npos);
  CHECK_THROWS_AS(load_feature_csv("/nonexistent/features.csv"), LoadError);
}

TEST_CASE("ground truth files") {
  const auto p = temp_file("gt.csv");
  const std::vector<GroundTruthRow> rows = {
      {"acme/a", "alice", Label::human}, {"acme/b", "alice", Label::human}, {"acme/a", "bot1", Label::bot}};
  save_ground_truth(p, rows);
  CHECK(read(p) == "repository,account,label\nacme/a,alice,human\nacme/b,alice,human\nacme/a,bot1,bot\n");
  const auto gt = load_ground_truth(p);
  CHECK(gt.size() == 2);
  CHECK(gt.at("bot1") == Label::bot);

  write(p, "repository,account,label\nacme/a,alice,human\nacme/b,alice,bot\n");
  try {
    load_ground_truth(p);
    FAIL("expected a LoadError");
  } catch (const LoadError &e) {
    CHECK(std::string(e.what()).find(":3: conflicting labels for 'alice'") != std::string::npos);
  }
  write(p, "repo,account,label\n");
  CHECK_THROWS_AS(load_ground_truth(p), LoadError);
  write(p, "repository,account,label\nacme/a,alice,mixed\n");
  CHECK_THROWS_AS(load_ground_truth(p), LoadError);
  fs::remove(p);
}

TEST_CASE("synthetic corpus: shape, labels and determinism") {
  const auto corpus = generate_synthetic_corpus();
  const auto again = generate_synthetic_corpus();
  CHECK(corpus.comments == again.comments);

  SyntheticOptions other;
  other.seed = 7;
  CHECK(generate_synthetic_corpus(other).comments != corpus.comments);

  std::map<std::string, Label> labels;
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto &r : corpus.ground_truth) {
    const auto [it, inserted] = labels.emplace(r.account, r.label);
    CHECK((inserted || it->second == r.label));
    CHECK(pairs.insert({r.account, r.repository}).second);
  }
  CHECK(labels.size() == 600);
  std::size_t bots = 0;
  for (const auto &[name, label] : labels) {
    bots += label == Label::bot ? 1 : 0;
    // nothing in the name gives the class away
    CHECK(name.find("bot") == std::string::npos);
  }
  CHECK(bots == 60);

  std::set<std::pair<std::string, std::string>> seen;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < corpus.comments.size(); ++i) {
    const auto &c = corpus.comments[i];
    CHECK(ids.insert(c.id).second);
    CHECK(is_valid_repository_name(c.repository));
    seen.insert({c.author, c.repository});
    if (i > 0) {
      CHECK(more_recent(corpus.comments[i - 1], c));
    }
  }
  CHECK(seen == pairs);

  // Enough accounts survive the default filter, and the class balance holds.
  const auto accounts = group_and_filter(corpus.comments, {});
  CHECK(accounts.size() >= 300);
  CHECK(accounts.size() < 600);
  std::size_t kept_bots = 0;
  for (const auto &a : accounts) {
    kept_bots += labels.at(a.account) == Label::bot ? 1 : 0;
  }
  const double fraction = static_cast<double>(kept_bots) / static_cast<double>(accounts.size());
  CHECK(fraction > 0.08);
  CHECK(fraction < 0.12);
}

TEST_CASE("synthetic bots repeat themselves, humans do not") {
  SyntheticOptions o;
  o.accounts = 200;
  o.seed = 3;
  const auto corpus = generate_synthetic_corpus(o);
  std::map<std::string, Label> labels;
  for (const auto &r : corpus.ground_truth) {
    labels[r.account] = r.label;
  }
  std::vector<double> bot_ratio;
  std::vector<double> human_ratio;
  for (const auto &a : group_and_filter(corpus.comments, {})) {
    const auto f = extract_features(a);
    if (f.non_empty_comments() < 10) {
      continue;
    }
    const double ratio = static_cast<double>(f.pattern_count) / static_cast<double>(f.non_empty_comments());
    (labels.at(a.account) == Label::bot ? bot_ratio : human_ratio).push_back(ratio);
  }
  REQUIRE(bot_ratio.size() >= 5);
  REQUIRE(human_ratio.size() >= 50);
  const double bot_mean = std::accumulate(bot_ratio.begin(), bot_ratio.end(), 0.0) / static_cast<double>(bot_ratio.size());
  const double human_mean =
      std::accumulate(human_ratio.begin(), human_ratio.end(), 0.0) / static_cast<double>(human_ratio.size());
  CHECK(bot_mean < 0.5);
  CHECK(human_mean > 0.7);
}

TEST_CASE("synthetic options are validated") {
  SyntheticOptions o;
  o.accounts = 9;
  CHECK_THROWS_AS(generate_synthetic_corpus(o), DomainError);
  o.accounts = 100;
  o.bot_fraction = 0.0;
  CHECK_THROWS_AS(generate_synthetic_corpus(o), DomainError);
  o.bot_fraction = 1.0;
  CHECK_THROWS_AS(generate_synthetic_corpus(o), DomainError);
}
