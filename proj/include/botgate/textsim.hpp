#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace botgate {

// Words of a comment, in order. No token is empty or contains whitespace.
struct TokenSequence {
  std::vector<std::string> tokens;

  bool operator==(const TokenSequence &) const = default;
};

struct TextSimOptions {
  // Comments are cut to this many scalar values before the edit distance
  // is computed; quadratic cost stays bounded on very long bodies.
  std::size_t levenshtein_char_cap = 2000;
};

// Symmetric n x n matrix of distances in [0, 1] with a zero diagonal.
class DistanceMatrix {
public:
  explicit DistanceMatrix(std::size_t n);

  // Validates symmetry, the zero diagonal and the [0, 1] range.
  static DistanceMatrix from_rows(const std::vector<std::vector<double>> &rows);

  std::size_t size() const { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }

  // Writes both (i, j) and (j, i).
  void set(std::size_t i, std::size_t j, double value);

private:
  std::size_t n_;
  std::vector<double> values_;
};

struct MeanDistances {
  double mean_levenshtein = 0.0;
  double mean_jaccard = 0.0;
};

// Splits on Unicode whitespace, then peels leading and trailing punctuation
// characters off each chunk as one-character tokens. Case is preserved.
TokenSequence tokenize(std::string_view body);

// 1 - |words(a) & words(b)| / |words(a) | words(b)| over distinct tokens.
// Two empty token sets are at distance 0, one empty set is at distance 1.
double jaccard_distance(std::string_view a, std::string_view b);

// Unit-cost edit distance between two scalar-value sequences.
std::size_t levenshtein_distance(std::u32string_view a, std::u32string_view b);

// Edit distance divided by the longer length; both empty gives 0.
double levenshtein_distance_norm(std::string_view a, std::string_view b,
                                 const TextSimOptions &options = {});

// Mean of the normalized Levenshtein and Jaccard distances.
double combined_distance(std::string_view a, std::string_view b,
                         const TextSimOptions &options = {});

// Throws DomainError on an empty list.
DistanceMatrix pairwise_distances(std::span<const std::string> comments,
                                  const TextSimOptions &options = {});

// Per-metric means over all unordered pairs. Throws DomainError for fewer
// than two comments.
MeanDistances mean_distances(std::span<const std::string> comments,
                             const TextSimOptions &options = {});

} // namespace botgate
