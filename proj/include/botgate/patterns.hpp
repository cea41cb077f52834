#pragma once

#include "botgate/textsim.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace botgate {

struct ClusteringParams {
  double eps = 0.5;
  std::size_t min_samples = 1;

  // Throws DomainError unless eps is in (0, 1] and min_samples >= 1.
  void validate() const;
};

// One label per comment. Labels are 0..pattern_count-1, numbered by first
// occurrence, and every label is used.
struct PatternAssignment {
  std::vector<std::size_t> labels;
  std::size_t pattern_count = 0;

  bool operator==(const PatternAssignment &) const = default;
};

// DBSCAN over a precomputed distance matrix with neighbourhoods
// {j : d(i, j) <= eps}. Points DBSCAN would call noise become singleton
// patterns. Points are visited in index order.
PatternAssignment cluster_comments(const DistanceMatrix &distances,
                                   const ClusteringParams &params = {});

// Cardinality of each pattern, indexed by label.
std::vector<std::size_t> pattern_sizes(const PatternAssignment &assignment);

// Relative mean absolute difference sum_i sum_j |x_i - x_j| / (2 n^2 mean).
// Throws DomainError for an empty list, a negative entry or an all-zero list.
double gini(std::span<const double> values);

} // namespace botgate
