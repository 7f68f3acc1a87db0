#include "faqrank/hybrid_index.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <istream>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "faqrank/error.hpp"
#include "faqrank/textproc.hpp"
#include "faqrank/util.hpp"

namespace faqrank {

namespace {

void sort_by_id(std::vector<FaqDoc>& docs) {
  std::sort(docs.begin(), docs.end(),
            [](const FaqDoc& a, const FaqDoc& b) { return a.id < b.id; });
}

std::vector<ScoredDoc> cut(std::vector<ScoredDoc> entries, std::size_t m) {
  if (entries.size() > m) entries.resize(m);
  return entries;
}

}  // namespace

HybridIndex HybridIndex::build(std::vector<FaqDoc> docs, const EmbeddingProvider& provider,
                               Bm25Params bm25) {
  validate_corpus(docs);
  sort_by_id(docs);
  auto tfidf = TfidfIndex::build(docs);
  auto bm = Bm25Index::build(docs, bm25);
  auto dense = embed_questions(provider, docs);
  return HybridIndex(std::move(docs), std::move(tfidf), std::move(bm), std::move(dense));
}

HybridIndex HybridIndex::build(std::vector<FaqDoc> docs, const EmbeddingFile& embeddings,
                               Bm25Params bm25) {
  validate_corpus(docs);
  sort_by_id(docs);
  auto dense = align_embeddings(embeddings, docs);
  auto tfidf = TfidfIndex::build(docs);
  auto bm = Bm25Index::build(docs, bm25);
  return HybridIndex(std::move(docs), std::move(tfidf), std::move(bm), std::move(dense));
}

HybridIndex::HybridIndex(std::vector<FaqDoc> docs, TfidfIndex tfidf, Bm25Index bm25,
                         EmbeddingMatrix dense)
    : docs_(std::move(docs)), tfidf_(std::move(tfidf)), bm25_(std::move(bm25)),
      dense_(std::move(dense)) {
  validate_corpus(docs_);
  for (std::size_t i = 1; i < docs_.size(); ++i) {
    if (!(docs_[i - 1].id < docs_[i].id)) throw ValidationError("index documents not sorted by id");
  }
  if (tfidf_.size() != size() || bm25_.n_docs() != size() || dense_.rows() != size()) {
    throw ValidationError("index parts cover different document counts");
  }
}

std::optional<DocIndex> HybridIndex::find(std::string_view id) const {
  auto it = std::lower_bound(docs_.begin(), docs_.end(), id,
                             [](const FaqDoc& d, std::string_view key) { return d.id < key; });
  if (it == docs_.end() || it->id != id) return std::nullopt;
  return static_cast<DocIndex>(it - docs_.begin());
}

std::vector<Query> parse_queries(std::istream& in, std::string_view origin) {
  std::vector<Query> queries;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto tab = line.find('\t');
    std::ostringstream where;
    where << origin << ":" << line_no << ": ";
    if (tab == std::string::npos) throw ValidationError(where.str() + "expected <id><TAB><text>");
    Query q{std::string(trim(std::string_view(line).substr(0, tab))), line.substr(tab + 1)};
    if (q.id.empty() || split_whitespace(q.id).size() != 1) {
      throw ValidationError(where.str() + "query id must be one nonempty word");
    }
    if (!seen.insert(q.id).second) throw ValidationError(where.str() + "duplicate query id '" + q.id + "'");
    queries.push_back(std::move(q));
  }
  return queries;
}

std::vector<Query> load_queries(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open queries " + path.string());
  return parse_queries(in, path.string());
}

namespace {

std::vector<double> embed_query(const HybridIndex& index, const Query& query,
                                const EmbeddingProvider& provider) {
  if (provider.tag() != index.dense().provider() || provider.dim() != index.dense().dim()) {
    throw ValidationError("embedding provider '" + provider.tag() + "' (dim " +
                          std::to_string(provider.dim()) + ") does not match index provider '" +
                          index.dense().provider() + "' (dim " +
                          std::to_string(index.dense().dim()) + ")");
  }
  auto vec = provider.embed(query.text);
  if (vec.size() != index.dense().dim()) throw ValidationError("provider returned wrong dimension");
  return vec;
}

TokenStream query_tokens(const Query& query) {
  auto tokens = tokenize(query.text);
  if (tokens.empty()) {
    throw ValidationError("query '" + query.id + "' has no tokens after tokenization");
  }
  return tokens;
}

RankedList hybrid_from_parts(const HybridIndex& index, const Query& query,
                             const FusionParams& params, const TokenStream& tokens,
                             std::span<const double> query_vec, const SparseVec& query_sparse) {
  const double zeta = damping(tokens.len(), params.beta);
  const double alpha = *params.alpha;
  const auto dense = knn_dense(index.dense(), query_vec, params.top_n);
  const auto lexical = index.tfidf().rank(query_sparse, params.w, params.top_n);

  std::vector<DocIndex> pool;
  pool.reserve(dense.entries.size() + lexical.entries.size());
  for (const auto& e : dense.entries) pool.push_back(e.doc);
  for (const auto& e : lexical.entries) pool.push_back(e.doc);
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

  std::vector<ScoredDoc> scored;
  scored.reserve(pool.size());
  for (DocIndex doc : pool) {
    const double f_sbert = index.dense().similarity(query_vec, doc);
    const double f_tfidf = index.tfidf().score(query_sparse, doc, params.w);
    scored.push_back({doc, hybrid_score(f_sbert, f_tfidf, alpha, zeta, params.damping)});
  }
  RankedList out;
  out.query_id = query.id;
  out.ranker = "hybrid";
  out.entries = select_top(std::move(scored), pool.size());
  return out;
}

void require_alpha(const FusionParams& params, RankerMode mode) {
  if (!params.alpha) {
    throw std::invalid_argument("alpha must be set for mode " + std::string(to_string(mode)));
  }
}

}  // namespace

RankedList hybrid_ranking(const HybridIndex& index, const Query& query,
                          const FusionParams& params, const EmbeddingProvider& provider) {
  params.validate();
  require_alpha(params, RankerMode::kHybrid);
  const auto tokens = query_tokens(query);
  const auto vec = embed_query(index, query, provider);
  return hybrid_from_parts(index, query, params, tokens, vec, index.tfidf().vectorize(tokens));
}

FusedResult retrieve(const HybridIndex& index, const Query& query, const FusionParams& params,
                     RankerMode mode, const EmbeddingProvider& provider) {
  params.validate();
  if (mode == RankerMode::kHybrid || mode == RankerMode::kRrf) require_alpha(params, mode);
  const auto tokens = query_tokens(query);

  RankedList list;
  switch (mode) {
    case RankerMode::kTfidf:
      list = index.tfidf().rank(index.tfidf().vectorize(tokens), params.w, params.top_n);
      break;
    case RankerMode::kBm25:
      list = index.bm25().rank(tokens, params.w, params.top_n, params.bm25);
      break;
    case RankerMode::kSbert:
      list = knn_dense(index.dense(), embed_query(index, query, provider), params.top_n);
      break;
    case RankerMode::kHybrid:
    case RankerMode::kRrf: {
      const auto vec = embed_query(index, query, provider);
      list = hybrid_from_parts(index, query, params, tokens, vec, index.tfidf().vectorize(tokens));
      break;
    }
  }
  list.query_id = query.id;

  if (mode != RankerMode::kRrf) {
    list.entries = cut(std::move(list.entries), params.top_m);
    return as_fused(list);
  }
  auto lexical = index.bm25().rank(tokens, params.w, params.top_n, params.bm25);
  lexical.query_id = query.id;
  auto fused = fuse_rrf(list, lexical, params.rrf_k);
  if (fused.entries.size() > params.top_m) fused.entries.resize(params.top_m);
  return fused;
}

std::vector<FusedResult> retrieve_batch(const HybridIndex& index, std::span<const Query> queries,
                                        const FusionParams& params, RankerMode mode,
                                        const EmbeddingProvider& provider, unsigned threads) {
  std::vector<FusedResult> results(queries.size());
  std::vector<std::exception_ptr> errors(queries.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < queries.size(); i = next++) {
      try {
        results[i] = retrieve(index, queries[i], params, mode, provider);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n_workers =
      std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(queries.size())));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(n_workers);
    for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace faqrank
