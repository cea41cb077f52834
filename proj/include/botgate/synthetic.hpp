#pragma once

#include "botgate/corpus.hpp"
#include "botgate/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace botgate {

// Labeled stand-in corpus. Bot accounts fill one to five slot templates with
// skewed usage; human accounts write unique sentences over a shared
// vocabulary with the occasional stock reply. A minority of both classes is
// sparse: mostly empty PR descriptions and only a handful of non-empty
// comments. A few accounts fall below the usual 10-comment threshold.
struct SyntheticOptions {
  std::size_t accounts = 600;
  double bot_fraction = 0.1;
  std::uint64_t seed = 42;
};

struct SyntheticCorpus {
  std::vector<RawComment> comments;          // most recent first
  std::vector<GroundTruthRow> ground_truth;  // one row per (account, repository)
};

// Deterministic in `options`. Throws DomainError for fewer than 10 accounts
// or a bot fraction outside (0, 1).
SyntheticCorpus generate_synthetic_corpus(const SyntheticOptions &options = {});

} // namespace botgate
