#include "faqrank/ranking.hpp"

#include <algorithm>

namespace faqrank {

std::vector<ScoredDoc> select_top(std::vector<ScoredDoc> candidates, std::size_t top_n) {
  if (top_n < candidates.size()) {
    std::partial_sort(candidates.begin(),
                      candidates.begin() + static_cast<std::ptrdiff_t>(top_n),
                      candidates.end(), ranks_before);
    candidates.resize(top_n);
  } else {
    std::sort(candidates.begin(), candidates.end(), ranks_before);
  }
  return candidates;
}

}  // namespace faqrank
