#pragma once

#include "botgate/corpus.hpp"
#include "botgate/patterns.hpp"
#include "botgate/textsim.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace botgate {

inline constexpr std::size_t kFeatureCount = 4;

// Column order of the model input. Persisted in model files.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureSchema = {
    "total_comments", "empty_comments", "pattern_count", "gini_patterns"};

struct FeatureVector {
  std::string account;
  std::size_t total_comments = 0;
  std::size_t empty_comments = 0;
  std::size_t pattern_count = 0;
  double gini_patterns = 0.0;

  std::array<double, kFeatureCount> values() const {
    return {static_cast<double>(total_comments), static_cast<double>(empty_comments),
            static_cast<double>(pattern_count), gini_patterns};
  }

  std::size_t non_empty_comments() const { return total_comments - empty_comments; }

  bool operator==(const FeatureVector &) const = default;
};

struct FeatureOptions {
  ClusteringParams clustering;
  TextSimOptions text;
};

// Throws DomainError for an account without comments.
FeatureVector extract_features(const AccountActivity &activity, const FeatureOptions &options = {});

// Pattern label of every comment, in the account's comment order and
// numbered by first occurrence there. Throws DomainError without comments.
PatternAssignment comment_patterns(const AccountActivity &activity, const FeatureOptions &options = {});

// Order-preserving. Work is spread over `threads` workers (0 = hardware
// concurrency); the result does not depend on the schedule. Failures are
// rethrown as one Error listing every failed account.
std::vector<FeatureVector> extract_features_batch(std::span<const AccountActivity> accounts,
                                                  const FeatureOptions &options = {},
                                                  unsigned threads = 0);

// Feature CSV: account,total_comments,empty_comments,pattern_count,gini_patterns
// with an optional trailing label column.
std::string feature_csv_header(bool with_label);
std::string feature_csv_row(const FeatureVector &features, std::optional<std::string_view> label = {});

} // namespace botgate
