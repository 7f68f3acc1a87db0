#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "faqrank/bm25.hpp"
#include "faqrank/corpus.hpp"
#include "faqrank/dense.hpp"
#include "faqrank/fusion.hpp"
#include "faqrank/tfidf.hpp"

namespace faqrank {

/// Immutable bundle of every index over one corpus. Documents are held in
/// ascending id order and DocIndex i always refers to docs()[i].
class HybridIndex {
 public:
  /// Sorts `docs` by id, validates them and embeds questions with `provider`.
  static HybridIndex build(std::vector<FaqDoc> docs, const EmbeddingProvider& provider,
                           Bm25Params bm25 = {});

  /// Same, with question embeddings taken from an interchange file.
  static HybridIndex build(std::vector<FaqDoc> docs, const EmbeddingFile& embeddings,
                           Bm25Params bm25 = {});

  /// Assembles pre-built parts. Throws ValidationError unless docs are sorted
  /// by id and every part covers exactly those docs.
  HybridIndex(std::vector<FaqDoc> docs, TfidfIndex tfidf, Bm25Index bm25, EmbeddingMatrix dense);

  std::size_t size() const noexcept { return docs_.size(); }
  std::span<const FaqDoc> docs() const noexcept { return docs_; }
  const FaqDoc& doc(DocIndex i) const { return docs_.at(i); }
  std::optional<DocIndex> find(std::string_view id) const;

  const TfidfIndex& tfidf() const noexcept { return tfidf_; }
  const Bm25Index& bm25() const noexcept { return bm25_; }
  const EmbeddingMatrix& dense() const noexcept { return dense_; }

 private:
  std::vector<FaqDoc> docs_;
  TfidfIndex tfidf_;
  Bm25Index bm25_;
  EmbeddingMatrix dense_;
};

struct Query {
  std::string id;
  std::string text;

  bool operator==(const Query&) const = default;
};

/// Query files hold `<query-id><TAB><text>` per line; blank lines skipped.
std::vector<Query> parse_queries(std::istream& in, std::string_view origin);
std::vector<Query> load_queries(const std::filesystem::path& path);

/// Runs one query through the selected pipeline.
///   tfidf / bm25 / sbert: that ranker's top-N, cut to M.
///   hybrid: damped mix of dense and TF-IDF scores over the union of the
///           dense and TF-IDF top-N candidates, cut to M.
///   rrf:    the hybrid ranking fused with the BM25 top-N, cut to M.
/// Throws ValidationError when the query has no tokens or the provider does
/// not match the index, std::invalid_argument on bad params (including a
/// missing alpha in hybrid/rrf mode).
FusedResult retrieve(const HybridIndex& index, const Query& query, const FusionParams& params,
                     RankerMode mode, const EmbeddingProvider& provider);

/// The full (uncut) R_SBERT+TFIDF ranking used by hybrid and rrf modes.
RankedList hybrid_ranking(const HybridIndex& index, const Query& query,
                          const FusionParams& params, const EmbeddingProvider& provider);

/// retrieve() for each query on `threads` workers; results keep query order
/// and do not depend on the thread count. The first failure (in query
/// order) is rethrown.
std::vector<FusedResult> retrieve_batch(const HybridIndex& index, std::span<const Query> queries,
                                        const FusionParams& params, RankerMode mode,
                                        const EmbeddingProvider& provider, unsigned threads = 1);

}  // namespace faqrank
