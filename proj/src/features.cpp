#include "botgate/features.hpp"

#include "botgate/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace botgate {

FeatureVector extract_features(const AccountActivity &activity, const FeatureOptions &options) {
  if (activity.comments.empty()) {
    throw DomainError("account '" + activity.account + "' has no comments");
  }
  FeatureVector fv;
  fv.account = activity.account;
  fv.total_comments = activity.comments.size();

  for (const auto &c : activity.comments) {
    if (is_empty_comment(c.body)) {
      ++fv.empty_comments;
    }
  }
  const auto assignment = comment_patterns(activity, options);
  const auto sizes = pattern_sizes(assignment);
  std::vector<double> as_real(sizes.begin(), sizes.end());
  fv.pattern_count = assignment.pattern_count;
  fv.gini_patterns = gini(as_real);
  return fv;
}

PatternAssignment comment_patterns(const AccountActivity &activity, const FeatureOptions &options) {
  const auto &comments = activity.comments;
  if (comments.empty()) {
    throw DomainError("account '" + activity.account + "' has no comments");
  }
  // Clustering visits points in index order, so a canonical order keeps the
  // result independent of how the comments were listed.
  std::vector<std::size_t> order(comments.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return comments[a].body < comments[b].body; });
  std::vector<std::string> bodies;
  bodies.reserve(comments.size());
  for (std::size_t i : order) {
    bodies.push_back(comments[i].body);
  }
  const auto canonical = cluster_comments(pairwise_distances(bodies, options.text), options.clustering);

  PatternAssignment out;
  out.pattern_count = canonical.pattern_count;
  out.labels.assign(comments.size(), 0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.labels[order[k]] = canonical.labels[k];
  }
  // Renumber by first occurrence in the account's own comment order.
  std::vector<std::size_t> renumber(out.pattern_count, static_cast<std::size_t>(-1));
  std::size_t next = 0;
  for (auto &label : out.labels) {
    if (renumber[label] == static_cast<std::size_t>(-1)) {
      renumber[label] = next++;
    }
    label = renumber[label];
  }
  return out;
}

std::vector<FeatureVector> extract_features_batch(std::span<const AccountActivity> accounts,
                                                  const FeatureOptions &options, unsigned threads) {
  std::vector<FeatureVector> out(accounts.size());
  std::vector<std::string> failures(accounts.size());
  if (accounts.empty()) {
    return out;
  }
  if (threads == 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  threads = std::min<unsigned>(threads, static_cast<unsigned>(accounts.size()));

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < accounts.size(); i = next++) {
      try {
        out[i] = extract_features(accounts[i], options);
      } catch (const std::exception &e) {
        failures[i] = e.what();
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back(worker);
    }
  }

  std::string message;
  for (std::size_t i = 0; i < accounts.size(); ++i) {
    if (!failures[i].empty()) {
      message += "\n  " + accounts[i].account + ": " + failures[i];
    }
  }
  if (!message.empty()) {
    throw Error("feature extraction failed for:" + message);
  }
  return out;
}

std::string feature_csv_header(bool with_label) {
  std::string h = "account";
  for (auto name : kFeatureSchema) {
    h += ',';
    h += name;
  }
  if (with_label) {
    h += ",label";
  }
  return h;
}

std::string feature_csv_row(const FeatureVector &features, std::optional<std::string_view> label) {
  char gini_buf[32];
  std::snprintf(gini_buf, sizeof gini_buf, "%.17g", features.gini_patterns);
  std::string row = features.account + ',' + std::to_string(features.total_comments) + ',' +
                    std::to_string(features.empty_comments) + ',' +
                    std::to_string(features.pattern_count) + ',' + gini_buf;
  if (label) {
    row += ',';
    row += *label;
  }
  return row;
}

} // namespace botgate
