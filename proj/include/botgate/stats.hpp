#pragma once

#include "botgate/errors.hpp"

#include <cstddef>
#include <map>
#include <span>
#include <string_view>

namespace botgate {

struct KappaResult {
  double kappa = 0.0;
  double observed = 0.0; // p_o
  double expected = 0.0; // p_e
  // Chance agreement is 1 (both raters used one identical category).
  bool degenerate = false;
};

// Cohen's kappa for two raters over any ordered category type.
// Throws DomainError on empty or unequal-length inputs.
template <class T>
KappaResult cohens_kappa(std::span<const T> ratings_a, std::span<const T> ratings_b) {
  if (ratings_a.size() != ratings_b.size()) {
    throw DomainError("cohens_kappa needs rating lists of equal length");
  }
  if (ratings_a.empty()) {
    throw DomainError("cohens_kappa needs at least one rated item");
  }
  const std::size_t n = ratings_a.size();
  std::map<T, std::size_t> marginal_a;
  std::map<T, std::size_t> marginal_b;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ++marginal_a[ratings_a[i]];
    ++marginal_b[ratings_b[i]];
    if (ratings_a[i] == ratings_b[i]) {
      ++agree;
    }
  }
  std::size_t chance_pairs = 0; // sum over categories of n_a(c) * n_b(c)
  for (const auto &[category, count] : marginal_a) {
    auto it = marginal_b.find(category);
    if (it != marginal_b.end()) {
      chance_pairs += count * it->second;
    }
  }
  KappaResult r;
  const auto nd = static_cast<double>(n);
  r.observed = static_cast<double>(agree) / nd;
  r.expected = static_cast<double>(chance_pairs) / (nd * nd);
  if (chance_pairs == n * n) {
    r.degenerate = true;
    r.kappa = agree == n ? 1.0 : 0.0;
    return r;
  }
  r.kappa = (r.observed - r.expected) / (1.0 - r.expected);
  return r;
}

struct MannWhitneyResult {
  double u = 0.0;       // statistic for sample x
  double u_other = 0.0; // statistic for sample y; u + u_other = n1 * n2
  double z = 0.0;
  double p_value = 1.0; // two-sided
};

// Rank-sum U with midranks for ties; two-sided p from the normal
// approximation with tie-corrected variance and continuity correction.
// Throws DomainError when either sample is empty.
MannWhitneyResult mann_whitney_u(std::span<const double> sample_x, std::span<const double> sample_y);

enum class EffectMagnitude { negligible, small, medium, large };

std::string_view to_string(EffectMagnitude magnitude);

struct CliffsDelta {
  double delta = 0.0;
  EffectMagnitude magnitude = EffectMagnitude::negligible;
};

// (#{x > y} - #{x < y}) / (n1 n2). Bands on |delta|: < 0.147 negligible,
// < 0.33 small, < 0.474 medium, else large.
CliffsDelta cliffs_delta(std::span<const double> sample_x, std::span<const double> sample_y);

} // namespace botgate
