#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace faqrank {

/// Position of a document in its index. Indexes keep documents sorted by id,
/// so ascending DocIndex is ascending doc id.
using DocIndex = std::uint32_t;

struct ScoredDoc {
  DocIndex doc = 0;
  double score = 0.0;

  bool operator==(const ScoredDoc&) const = default;
};

/// Score descending, then doc ascending. Every ranker in the engine uses
/// this order, which makes runs reproducible byte for byte.
inline bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc < b.doc;
}

/// Output of a single ranker for one query. Ranks are 1-based positions.
struct RankedList {
  std::string query_id;
  std::string ranker;
  std::vector<ScoredDoc> entries;
};

/// Orders `candidates` with `ranks_before` and keeps the first `top_n`.
std::vector<ScoredDoc> select_top(std::vector<ScoredDoc> candidates, std::size_t top_n);

}  // namespace faqrank
