#include "botgate/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace botgate {

MannWhitneyResult mann_whitney_u(std::span<const double> sample_x, std::span<const double> sample_y) {
  if (sample_x.empty() || sample_y.empty()) {
    throw DomainError("mann_whitney_u needs two non-empty samples");
  }
  const std::size_t n1 = sample_x.size();
  const std::size_t n2 = sample_y.size();
  const std::size_t n = n1 + n2;

  std::vector<std::pair<double, bool>> pooled; // (value, from x)
  pooled.reserve(n);
  for (double v : sample_x) {
    pooled.emplace_back(v, true);
  }
  for (double v : sample_y) {
    pooled.emplace_back(v, false);
  }
  std::sort(pooled.begin(), pooled.end(),
            [](const auto &a, const auto &b) { return a.first < b.first; });

  double rank_sum_x = 0.0;
  double tie_term = 0.0; // sum of t^3 - t over tie groups
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && pooled[j].first == pooled[i].first) {
      ++j;
    }
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (pooled[k].second) {
        rank_sum_x += midrank;
      }
    }
    const auto t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }

  const auto d1 = static_cast<double>(n1);
  const auto d2 = static_cast<double>(n2);
  const auto dn = static_cast<double>(n);
  MannWhitneyResult r;
  r.u = rank_sum_x - d1 * (d1 + 1.0) / 2.0;
  r.u_other = d1 * d2 - r.u;

  const double mean = d1 * d2 / 2.0;
  double variance = d1 * d2 / 12.0 * (dn + 1.0);
  if (n > 1) {
    variance -= d1 * d2 * tie_term / (12.0 * dn * (dn - 1.0));
  }
  if (variance <= 0.0) {
    r.z = 0.0;
    r.p_value = 1.0;
    return r;
  }
  const double sd = std::sqrt(variance);
  r.z = std::max(0.0, std::abs(r.u - mean) - 0.5) / sd;
  r.p_value = std::min(1.0, std::erfc(r.z / std::sqrt(2.0)));
  return r;
}

std::string_view to_string(EffectMagnitude magnitude) {
  switch (magnitude) {
  case EffectMagnitude::negligible:
    return "negligible";
  case EffectMagnitude::small:
    return "small";
  case EffectMagnitude::medium:
    return "medium";
  case EffectMagnitude::large:
    return "large";
  }
  return "?";
}

CliffsDelta cliffs_delta(std::span<const double> sample_x, std::span<const double> sample_y) {
  if (sample_x.empty() || sample_y.empty()) {
    throw DomainError("cliffs_delta needs two non-empty samples");
  }
  std::vector<double> ys(sample_y.begin(), sample_y.end());
  std::sort(ys.begin(), ys.end());
  long long greater = 0;
  long long smaller = 0;
  for (double x : sample_x) {
    greater += std::lower_bound(ys.begin(), ys.end(), x) - ys.begin();
    smaller += ys.end() - std::upper_bound(ys.begin(), ys.end(), x);
  }
  CliffsDelta out;
  out.delta = static_cast<double>(greater - smaller) /
              (static_cast<double>(sample_x.size()) * static_cast<double>(sample_y.size()));
  const double magnitude = std::abs(out.delta);
  if (magnitude < 0.147) {
    out.magnitude = EffectMagnitude::negligible;
  } else if (magnitude < 0.33) {
    out.magnitude = EffectMagnitude::small;
  } else if (magnitude < 0.474) {
    out.magnitude = EffectMagnitude::medium;
  } else {
    out.magnitude = EffectMagnitude::large;
  }
  return out;
}

} // namespace botgate
