#include "botgate/patterns.hpp"

#include "botgate/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace botgate {

void ClusteringParams::validate() const {
  if (!(eps > 0.0 && eps <= 1.0)) {
    throw DomainError("eps must lie in (0, 1]");
  }
  if (min_samples < 1) {
    throw DomainError("min_samples must be at least 1");
  }
}

namespace {

constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
constexpr std::size_t kNoise = kUnvisited - 1;

std::vector<std::size_t> region_query(const DistanceMatrix &d, std::size_t i, double eps) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < d.size(); ++j) {
    if (d(i, j) <= eps) {
      out.push_back(j);
    }
  }
  return out;
}

} // namespace

PatternAssignment cluster_comments(const DistanceMatrix &distances, const ClusteringParams &params) {
  params.validate();
  const std::size_t n = distances.size();
  std::vector<std::size_t> raw(n, kUnvisited);
  std::size_t next_cluster = 0;

  for (std::size_t i = 0; i < n; ++i) {
    if (raw[i] != kUnvisited) {
      continue;
    }
    auto neighbours = region_query(distances, i, params.eps);
    if (neighbours.size() < params.min_samples) {
      raw[i] = kNoise;
      continue;
    }
    const std::size_t cluster = next_cluster++;
    raw[i] = cluster;
    std::deque<std::size_t> frontier(neighbours.begin(), neighbours.end());
    while (!frontier.empty()) {
      const std::size_t j = frontier.front();
      frontier.pop_front();
      if (raw[j] == kNoise) {
        raw[j] = cluster; // border point
      }
      if (raw[j] != kUnvisited) {
        continue;
      }
      raw[j] = cluster;
      auto reach = region_query(distances, j, params.eps);
      if (reach.size() >= params.min_samples) {
        frontier.insert(frontier.end(), reach.begin(), reach.end());
      }
    }
  }

  // Renumber by first occurrence; every noise point gets its own label.
  PatternAssignment out;
  out.labels.resize(n);
  std::vector<std::size_t> remap(next_cluster, kUnvisited);
  std::size_t next_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (raw[i] == kNoise) {
      out.labels[i] = next_label++;
      continue;
    }
    if (remap[raw[i]] == kUnvisited) {
      remap[raw[i]] = next_label++;
    }
    out.labels[i] = remap[raw[i]];
  }
  out.pattern_count = next_label;
  return out;
}

std::vector<std::size_t> pattern_sizes(const PatternAssignment &assignment) {
  std::vector<std::size_t> sizes(assignment.pattern_count, 0);
  for (std::size_t label : assignment.labels) {
    ++sizes.at(label);
  }
  return sizes;
}

double gini(std::span<const double> values) {
  if (values.empty()) {
    throw DomainError("gini of an empty list");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 0.0 || !std::isfinite(sorted.back())) {
    throw DomainError("gini needs finite non-negative values");
  }
  if (sorted.back() == 0.0) {
    throw DomainError("gini of an all-zero list");
  }
  if (sorted.front() == sorted.back()) {
    return 0.0;
  }
  // With ascending order, sum_i sum_j |x_i - x_j| = 2 * sum_i (2i - n + 1) x_i.
  const auto n = static_cast<double>(sorted.size());
  double weighted = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    weighted += (2.0 * static_cast<double>(i) - n + 1.0) * sorted[i];
    total += sorted[i];
  }
  // 2 * weighted / (2 n^2 * total / n)
  const double g = weighted / (n * total);
  return std::clamp(g, 0.0, 1.0);
}

} // namespace botgate
