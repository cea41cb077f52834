#include "botgate/synthetic.hpp"

#include "botgate/errors.hpp"
#include "botgate/model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string_view>

namespace botgate {

namespace {

constexpr std::array kBotTemplates = std::to_array<std::string_view>({
    "Coverage {dir} ({delta}%) to {pct}% when pulling **{sha}** on {branch} into **main**.",
    "Bumps {pkg} from {ver} to {ver2}.",
    "This issue has been automatically marked as stale because it has not had recent activity. "
    "It will be closed if no further activity occurs. Thank you for your contributions.",
    "Thanks for your pull request! Before we can look at it, please sign the CLA at "
    "https://cla.example.org/sign/{num}",
    "Build #{num} succeeded in {dur}. Artifacts: https://ci.example.org/builds/{num}",
    "Build #{num} failed at step `{step}`. Full log: https://ci.example.org/builds/{num}/log",
    "Deploy preview for {branch} is ready at https://{sha}--preview.example.app",
    "@{user} thank you for opening this issue. A maintainer will triage it soon.",
    ":white_check_mark: All {n} checks passed on {sha}.",
    "Merging {sha} into main. Queue position: {n}.",
    "Hi @{user}, this pull request touches {n} files. Labels added: {label}.",
    "Closing this issue because it has been inactive for {n} days.",
    "Size: {size}. Lines changed: +{n} -{m}.",
    "Benchmark for {sha}: median {dur}, p95 {dur} ({dir} {delta}%).",
    "These files are not formatted: {file}. Run `make fmt` to fix them.",
    "Dependency review: {pkg} {ver} has {n} known vulnerabilities.",
    "Backport to release-{ver} created in #{num}.",
    "Translation sync: {n} strings updated for locale {locale}.",
    "Security scan found {n} issues in {pkg}@{ver}.",
    "Requesting review from @{user} (round-robin assignment).",
    "Welcome @{user}! Thanks for your first contribution to this project.",
    "Release {ver} has been published. Changelog: https://example.org/releases/{ver}",
    "Lint report for {sha}: {n} warnings, {m} errors.",
    "Triage: added label `{label}` and milestone {ver}.",
});

constexpr std::array kVocabulary = std::to_array<std::string_view>({
    "the", "a", "this", "that", "it", "we", "you", "I", "they", "should", "could", "would", "maybe",
    "probably", "actually", "really", "just", "also", "still", "already", "again", "now", "then",
    "before", "after", "when", "while", "because", "since", "but", "and", "or", "so", "if", "not",
    "think", "guess", "agree", "wonder", "noticed", "tried", "tested", "checked", "found", "fixed",
    "broke", "changed", "moved", "renamed", "removed", "added", "updated", "merged", "reverted",
    "rebased", "squashed", "pushed", "reviewed", "approved", "suggest", "prefer", "need", "want",
    "parser", "config", "function", "method", "class", "module", "test", "tests", "build", "release",
    "branch", "commit", "patch", "change", "diff", "issue", "bug", "crash", "error", "warning",
    "exception", "stack", "trace", "log", "output", "input", "file", "path", "directory", "cache",
    "memory", "thread", "lock", "queue", "buffer", "socket", "request", "response", "header", "token",
    "timeout", "retry", "loop", "index", "value", "key", "map", "list", "string", "number", "flag",
    "option", "argument", "parameter", "default", "version", "dependency", "package", "library",
    "plugin", "script", "docs", "example", "comment", "line", "case", "edge", "corner", "performance",
    "latency", "speed", "slower", "faster", "smaller", "larger", "cleaner", "simpler", "safer",
    "weird", "strange", "odd", "nice", "great", "good", "bad", "wrong", "right", "better", "worse",
    "correct", "missing", "extra", "unused", "deprecated", "legacy", "new", "old", "first", "last",
    "next", "previous", "same", "different", "whole", "part", "only", "every", "some", "any", "few",
    "many", "on", "in", "at", "for", "with", "without", "from", "into", "about", "over", "under",
    "between", "Linux", "Windows", "macOS", "CI", "upstream", "downstream", "locally", "here",
    "there", "elsewhere", "tomorrow", "today", "yesterday", "week", "soon", "later", "ok", "hmm"});

constexpr std::array kStockReplies = std::to_array<std::string_view>({
    "LGTM", "LGTM!", "+1", "Thanks!", "Thank you!", "Done.", "Fixed.", "Good catch.", "Nice!", "ping"});

constexpr std::array kPackages = std::to_array<std::string_view>({
    "lodash", "requests", "serde", "tokio", "numpy", "react", "express", "jackson-databind",
    "urllib3", "webpack", "pytest", "eslint", "boto3", "rand", "chrono", "axios"});

constexpr std::array kBranches = std::to_array<std::string_view>({"fix-parser", "feature/cache", "docs-update",
                                                       "refactor-io", "bump-deps", "hotfix-42",
                                                       "ci-matrix", "perf-tuning"});

constexpr std::array kSteps = std::to_array<std::string_view>({"compile", "unit-tests", "lint", "package",
                                                    "integration", "docs", "e2e", "publish"});

constexpr std::array kLabels = std::to_array<std::string_view>({"bug", "enhancement", "documentation",
                                                     "needs-triage", "good first issue", "ci",
                                                     "dependencies", "question"});

constexpr std::array kLocales = std::to_array<std::string_view>({"de", "fr", "ja", "pt-BR", "zh-CN", "es", "it", "ko"});

constexpr std::array kSizes = std::to_array<std::string_view>({"XS", "S", "M", "L", "XL", "XXL"});

constexpr std::array kAdjectives = std::to_array<std::string_view>({
    "quiet", "brisk", "amber", "lunar", "rapid", "gentle", "hollow", "vivid", "solar", "misty",
    "noble", "rustic", "silent", "steady", "sunny", "tidy", "urban", "velvet", "wild", "young",
    "bold", "calm", "dusty", "eager"});

constexpr std::array kNouns = std::to_array<std::string_view>({
    "falcon", "harbor", "maple", "otter", "pixel", "quartz", "raven", "spruce", "tiger", "walnut",
    "badger", "comet", "delta", "ember", "fjord", "glacier", "heron", "iris", "jasper", "kestrel",
    "lynx", "meadow", "nebula", "orchid"});

constexpr std::array kRepositories = std::to_array<std::string_view>({
    "synthetic/atlas", "synthetic/beacon", "synthetic/cinder", "synthetic/drift",
    "synthetic/ember-ui", "synthetic/flux", "synthetic/granite", "synthetic/harbor-api",
    "synthetic/ion", "synthetic/juniper", "synthetic/kiln", "synthetic/lattice"});

class Gen {
public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::size_t index(std::size_t n) { return rng_.uniform_index(n); }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + index(hi - lo + 1); }
  double unit() { return static_cast<double>(index(std::size_t{1} << 30)) / static_cast<double>(std::size_t{1} << 30); }
  bool chance(double p) { return unit() < p; }
  template <class C> std::string pick(const C &items) { return std::string(items[index(items.size())]); }

  std::string hex(std::size_t digits) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string s;
    for (std::size_t i = 0; i < digits; ++i) {
      s += kHex[index(16)];
    }
    return s;
  }

  std::string fixed(double value, int decimals) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
    return buf;
  }

  std::string version() {
    return std::to_string(between(0, 9)) + "." + std::to_string(between(0, 30)) + "." +
           std::to_string(between(0, 12));
  }

private:
  Rng rng_;
};

std::string fill_template(std::string_view tmpl, Gen &g, const std::string &user) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl[i] != '{') {
      out += tmpl[i++];
      continue;
    }
    const auto close = tmpl.find('}', i);
    const std::string_view slot = tmpl.substr(i + 1, close - i - 1);
    i = close + 1;
    if (slot == "dir") {
      out += g.chance(0.6) ? "increased" : "decreased";
    } else if (slot == "delta") {
      out += g.fixed(g.unit() * 2.0, 2);
    } else if (slot == "pct") {
      out += g.fixed(70.0 + g.unit() * 29.0, 2);
    } else if (slot == "sha") {
      out += g.hex(7);
    } else if (slot == "branch") {
      out += g.pick(kBranches);
    } else if (slot == "pkg") {
      out += g.pick(kPackages);
    } else if (slot == "ver" || slot == "ver2") {
      out += g.version();
    } else if (slot == "num") {
      out += std::to_string(g.between(100, 9999));
    } else if (slot == "dur") {
      out += std::to_string(g.between(1, 59)) + "m" + std::to_string(g.between(0, 59)) + "s";
    } else if (slot == "step") {
      out += g.pick(kSteps);
    } else if (slot == "user") {
      out += user;
    } else if (slot == "n" || slot == "m") {
      out += std::to_string(g.between(1, 60));
    } else if (slot == "label") {
      out += g.pick(kLabels);
    } else if (slot == "size") {
      out += g.pick(kSizes);
    } else if (slot == "file") {
      out += "src/" + g.pick(kVocabulary) + ".c";
    } else if (slot == "locale") {
      out += g.pick(kLocales);
    }
  }
  return out;
}

std::string human_sentence(Gen &g) {
  const std::size_t words = g.between(4, 24);
  std::string s;
  for (std::size_t w = 0; w < words; ++w) {
    std::string word = g.pick(kVocabulary);
    if (w == 0) {
      word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
    } else {
      s += ' ';
    }
    if (g.chance(0.04)) {
      word = "`" + word + "()`";
    }
    s += word;
    if (w + 1 < words && g.chance(0.06)) {
      s += ',';
    }
  }
  s += g.chance(0.2) ? "?" : (g.chance(0.1) ? "!" : ".");
  if (g.chance(0.15)) {
    s += "\n\n" + human_sentence(g);
  }
  return s;
}

struct Body {
  std::string text;
  bool description = false;
};

// Template usage weights decay with rank, so one template dominates.
std::vector<Body> bot_bodies(Gen &g, std::size_t count, bool noisy) {
  const std::size_t n_templates = 1 + std::min<std::size_t>(4, static_cast<std::size_t>(std::floor(g.unit() * g.unit() * 5.0)));
  std::vector<std::string_view> chosen;
  std::set<std::size_t> used;
  while (chosen.size() < n_templates) {
    const std::size_t t = g.index(kBotTemplates.size());
    if (used.insert(t).second) {
      chosen.push_back(kBotTemplates[t]);
    }
  }
  std::vector<double> cumulative;
  double total = 0.0;
  for (std::size_t r = 0; r < chosen.size(); ++r) {
    total += 1.0 / std::pow(static_cast<double>(r + 1), 1.5);
    cumulative.push_back(total);
  }
  const std::string mention = g.pick(kAdjectives) + "-" + g.pick(kNouns);
  const double empty_rate = g.chance(0.3) ? 0.1 * g.unit() : 0.0;
  std::vector<Body> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (g.chance(empty_rate)) {
      out.push_back({"", true});
    } else if (noisy && g.chance(0.15)) {
      out.push_back({human_sentence(g), false});
    } else {
      const double u = g.unit() * total;
      const std::size_t t = static_cast<std::size_t>(
          std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
      out.push_back({fill_template(chosen[std::min(t, chosen.size() - 1)], g, mention), false});
    }
  }
  return out;
}

std::vector<Body> sparse_bodies(Gen &g, std::size_t count, bool bot) {
  const std::size_t non_empty = std::min(count, g.between(0, 4));
  std::vector<Body> out;
  const std::string_view tmpl = kBotTemplates[g.index(kBotTemplates.size())];
  for (std::size_t i = 0; i < count; ++i) {
    if (i < non_empty) {
      out.push_back({bot ? fill_template(tmpl, g, "maintainers") : human_sentence(g), false});
    } else {
      out.push_back({g.chance(0.2) ? "\n" : "", true});
    }
  }
  return out;
}

std::vector<Body> human_bodies(Gen &g, std::size_t count) {
  const double stock_rate = g.chance(0.5) ? 0.25 * g.unit() : 0.0;
  const double empty_rate = 0.08 * g.unit();
  std::vector<Body> out;
  for (std::size_t i = 0; i < count; ++i) {
    if (g.chance(empty_rate)) {
      out.push_back({"", true});
    } else if (g.chance(stock_rate)) {
      out.push_back({g.pick(kStockReplies), false});
    } else {
      out.push_back({human_sentence(g), g.chance(0.1)});
    }
  }
  return out;
}

} // namespace

SyntheticCorpus generate_synthetic_corpus(const SyntheticOptions &options) {
  if (options.accounts < 10) {
    throw DomainError("the synthetic corpus needs at least 10 accounts");
  }
  if (!(options.bot_fraction > 0.0 && options.bot_fraction < 1.0)) {
    throw DomainError("bot_fraction must lie in (0, 1)");
  }
  Gen g(options.seed);
  const auto n_bots = static_cast<std::size_t>(std::llround(static_cast<double>(options.accounts) * options.bot_fraction));
  std::vector<Label> labels(options.accounts, Label::human);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_bots), Label::bot);
  Rng shuffler = Rng::derive(options.seed, 1);
  shuffler.shuffle(labels);

  std::set<std::string> names;
  const auto base = parse_timestamp("2022-01-01T00:00:00Z");
  const long long span_ms = 730LL * 24 * 3600 * 1000;

  SyntheticCorpus out;
  std::size_t next_id = 1;
  std::map<std::pair<std::string, std::string>, Label> pairs; // (account, repository)
  for (std::size_t a = 0; a < options.accounts; ++a) {
    std::string name;
    do {
      name = g.pick(kAdjectives) + "-" + g.pick(kNouns) + "-" + std::to_string(g.between(1, 99));
    } while (!names.insert(name).second);

    const bool bot = labels[a] == Label::bot;
    std::size_t count;
    std::vector<Body> bodies;
    if (g.chance(0.04)) {
      // below the usual threshold; such accounts are filtered before training
      count = g.between(3, 9);
      bodies = bot ? bot_bodies(g, count, false) : human_bodies(g, count);
    } else if (g.chance(bot ? 0.15 : 0.08)) {
      count = g.between(10, 40);
      bodies = sparse_bodies(g, count, bot);
    } else if (bot) {
      count = g.between(10, 100);
      bodies = bot_bodies(g, count, g.chance(0.1));
    } else {
      const double u = g.unit();
      count = 10 + static_cast<std::size_t>(std::floor(90.0 * u * u));
      bodies = human_bodies(g, count);
    }

    std::vector<std::string> repos;
    const std::size_t n_repos = g.between(1, 3);
    while (repos.size() < n_repos) {
      auto r = g.pick(kRepositories);
      if (std::find(repos.begin(), repos.end(), r) == repos.end()) {
        repos.push_back(r);
      }
    }
    for (auto &b : bodies) {
      RawComment c;
      char id[16];
      std::snprintf(id, sizeof id, "C%07zu", next_id++);
      c.id = id;
      c.repository = repos[g.index(repos.size())];
      c.is_description = b.description;
      c.thread_kind = b.description || g.chance(0.5) ? ThreadKind::pull_request : ThreadKind::issue;
      c.author = name;
      c.created_at = base + std::chrono::milliseconds(static_cast<long long>(g.unit() * static_cast<double>(span_ms)));
      c.body = std::move(b.text);
      pairs[{name, c.repository}] = labels[a];
      out.comments.push_back(std::move(c));
    }
  }
  std::sort(out.comments.begin(), out.comments.end(), more_recent);
  for (const auto &[key, label] : pairs) {
    out.ground_truth.push_back({key.second, key.first, label});
  }
  return out;
}

} // namespace botgate
