#include "botgate/textsim.hpp"

#include "botgate/errors.hpp"
#include "botgate/unicode.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <unordered_map>

namespace botgate {

DistanceMatrix::DistanceMatrix(std::size_t n) : n_(n), values_(n * n, 0.0) {}

DistanceMatrix DistanceMatrix::from_rows(const std::vector<std::vector<double>> &rows) {
  const std::size_t n = rows.size();
  DistanceMatrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) {
      throw DomainError("distance matrix row " + std::to_string(i) + " has wrong length");
    }
    if (rows[i][i] != 0.0) {
      throw DomainError("distance matrix diagonal must be zero");
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double v = rows[i][j];
      if (!(v >= 0.0 && v <= 1.0)) {
        throw DomainError("distance matrix entry out of [0,1]");
      }
      if (v != rows[j][i]) {
        throw DomainError("distance matrix is not symmetric");
      }
      m.values_[i * n + j] = v;
    }
  }
  return m;
}

void DistanceMatrix::set(std::size_t i, std::size_t j, double value) {
  values_[i * n_ + j] = value;
  values_[j * n_ + i] = value;
}

TokenSequence tokenize(std::string_view body) {
  TokenSequence out;
  const std::u32string text = unicode::decode_utf8(body);
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    while (i < n && unicode::is_whitespace(text[i])) {
      ++i;
    }
    std::size_t end = i;
    while (end < n && !unicode::is_whitespace(text[end])) {
      ++end;
    }
    if (end == i) {
      break;
    }
    std::size_t lo = i;
    std::size_t hi = end;
    while (lo < hi && unicode::is_punctuation(text[lo])) {
      ++lo;
    }
    while (hi > lo && unicode::is_punctuation(text[hi - 1])) {
      --hi;
    }
    for (std::size_t k = i; k < lo; ++k) {
      out.tokens.push_back(unicode::encode_utf8(text.substr(k, 1)));
    }
    if (hi > lo) {
      out.tokens.push_back(unicode::encode_utf8(std::u32string_view(text).substr(lo, hi - lo)));
    }
    for (std::size_t k = hi; k < end; ++k) {
      out.tokens.push_back(unicode::encode_utf8(text.substr(k, 1)));
    }
    i = end;
  }
  return out;
}

namespace {

std::vector<std::string> distinct_words(std::string_view body) {
  auto words = tokenize(body).tokens;
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  return words;
}

double jaccard_sorted(const std::vector<std::string> &a, const std::vector<std::string> &b) {
  if (a.empty() && b.empty()) {
    return 0.0;
  }
  std::size_t common = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++common;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - common;
  return 1.0 - static_cast<double>(common) / static_cast<double>(uni);
}

// Bit-parallel edit distance (Myers' algorithm with Hyyro's block
// extension). The shorter string is the pattern, one bit per position.
class PatternMasks {
public:
  explicit PatternMasks(std::u32string_view pattern)
      : blocks_((pattern.size() + 63) / 64), ascii_(128 * blocks_, 0), zeros_(blocks_, 0) {
    for (std::size_t i = 0; i < pattern.size(); ++i) {
      const char32_t c = pattern[i];
      const std::uint64_t bit = std::uint64_t{1} << (i % 64);
      if (c < 128) {
        ascii_[c * blocks_ + i / 64] |= bit;
      } else {
        auto &v = other_[c];
        if (v.empty()) {
          v.assign(blocks_, 0);
        }
        v[i / 64] |= bit;
      }
    }
  }

  std::size_t blocks() const { return blocks_; }

  const std::uint64_t *get(char32_t c) const {
    if (c < 128) {
      return &ascii_[c * blocks_];
    }
    auto it = other_.find(c);
    return it == other_.end() ? zeros_.data() : it->second.data();
  }

private:
  std::size_t blocks_;
  std::vector<std::uint64_t> ascii_;
  std::vector<std::uint64_t> zeros_;
  std::unordered_map<char32_t, std::vector<std::uint64_t>> other_;
};

int advance_block(std::uint64_t &pv, std::uint64_t &mv, std::uint64_t eq, int hin,
                  std::uint64_t high_bit) {
  const std::uint64_t xv = eq | mv;
  if (hin < 0) {
    eq |= 1;
  }
  const std::uint64_t xh = (((eq & pv) + pv) ^ pv) | eq;
  std::uint64_t ph = mv | ~(xh | pv);
  std::uint64_t mh = pv & xh;
  int hout = 0;
  if (ph & high_bit) {
    hout = 1;
  } else if (mh & high_bit) {
    hout = -1;
  }
  ph <<= 1;
  mh <<= 1;
  if (hin < 0) {
    mh |= 1;
  } else if (hin > 0) {
    ph |= 1;
  }
  pv = mh | ~(xv | ph);
  mv = ph & xv;
  return hout;
}

struct PreparedText {
  std::u32string chars;
  std::vector<std::string> words;
};

PreparedText prepare(std::string_view body, const TextSimOptions &options) {
  PreparedText p;
  p.chars = unicode::decode_utf8(body);
  if (p.chars.size() > options.levenshtein_char_cap) {
    p.chars.resize(options.levenshtein_char_cap);
  }
  p.words = distinct_words(body);
  return p;
}

double normalized_levenshtein(std::u32string_view a, std::u32string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) {
    return 0.0;
  }
  return static_cast<double>(levenshtein_distance(a, b)) / static_cast<double>(longest);
}

} // namespace

double jaccard_distance(std::string_view a, std::string_view b) {
  return jaccard_sorted(distinct_words(a), distinct_words(b));
}

std::size_t levenshtein_distance(std::u32string_view a, std::u32string_view b) {
  if (a.size() > b.size()) {
    std::swap(a, b);
  }
  // a is now the shorter one (the pattern)
  if (a.empty()) {
    return b.size();
  }
  const std::size_t m = a.size();
  const PatternMasks masks(a);
  const std::size_t blocks = masks.blocks();
  std::vector<std::uint64_t> pv(blocks, ~std::uint64_t{0});
  std::vector<std::uint64_t> mv(blocks, 0);
  const std::uint64_t last_bit = std::uint64_t{1} << ((m - 1) % 64);
  constexpr std::uint64_t top_bit = std::uint64_t{1} << 63;

  std::size_t score = m;
  for (char32_t c : b) {
    const std::uint64_t *eq = masks.get(c);
    int carry = 1;
    for (std::size_t k = 0; k < blocks; ++k) {
      carry = advance_block(pv[k], mv[k], eq[k], carry, k + 1 == blocks ? last_bit : top_bit);
    }
    score = static_cast<std::size_t>(static_cast<long long>(score) + carry);
  }
  return score;
}

double levenshtein_distance_norm(std::string_view a, std::string_view b,
                                 const TextSimOptions &options) {
  auto ua = unicode::decode_utf8(a);
  auto ub = unicode::decode_utf8(b);
  if (ua.size() > options.levenshtein_char_cap) {
    ua.resize(options.levenshtein_char_cap);
  }
  if (ub.size() > options.levenshtein_char_cap) {
    ub.resize(options.levenshtein_char_cap);
  }
  return normalized_levenshtein(ua, ub);
}

double combined_distance(std::string_view a, std::string_view b, const TextSimOptions &options) {
  return (levenshtein_distance_norm(a, b, options) + jaccard_distance(a, b)) / 2.0;
}

DistanceMatrix pairwise_distances(std::span<const std::string> comments,
                                  const TextSimOptions &options) {
  if (comments.empty()) {
    throw DomainError("pairwise_distances needs at least one comment");
  }
  std::vector<PreparedText> prepared;
  prepared.reserve(comments.size());
  for (const auto &c : comments) {
    prepared.push_back(prepare(c, options));
  }
  DistanceMatrix m(comments.size());
  for (std::size_t i = 0; i < prepared.size(); ++i) {
    for (std::size_t j = i + 1; j < prepared.size(); ++j) {
      const double lev = normalized_levenshtein(prepared[i].chars, prepared[j].chars);
      const double jac = jaccard_sorted(prepared[i].words, prepared[j].words);
      m.set(i, j, std::clamp((lev + jac) / 2.0, 0.0, 1.0));
    }
  }
  return m;
}

MeanDistances mean_distances(std::span<const std::string> comments, const TextSimOptions &options) {
  if (comments.size() < 2) {
    throw DomainError("mean_distances needs at least two comments");
  }
  std::vector<PreparedText> prepared;
  prepared.reserve(comments.size());
  for (const auto &c : comments) {
    prepared.push_back(prepare(c, options));
  }
  double lev_sum = 0.0;
  double jac_sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < prepared.size(); ++i) {
    for (std::size_t j = i + 1; j < prepared.size(); ++j) {
      lev_sum += normalized_levenshtein(prepared[i].chars, prepared[j].chars);
      jac_sum += jaccard_sorted(prepared[i].words, prepared[j].words);
      ++pairs;
    }
  }
  return {lev_sum / static_cast<double>(pairs), jac_sum / static_cast<double>(pairs)};
}

} // namespace botgate
