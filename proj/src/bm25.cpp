#include "faqrank/bm25.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "faqrank/error.hpp"

namespace faqrank {

void Bm25Params::validate() const {
  if (!(k1 > 0.0) || !std::isfinite(k1)) throw std::invalid_argument("BM25 k1 must be positive");
  if (!(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("BM25 b must lie in [0, 1]");
}

namespace {

Bm25Index::FieldStats build_field(std::span<const FaqDoc> docs, Field which) {
  std::map<std::string, std::vector<Bm25Index::Posting>, std::less<>> postings;
  Bm25Index::FieldStats stats;
  stats.doc_lengths.reserve(docs.size());
  for (std::size_t d = 0; d < docs.size(); ++d) {
    const auto& text = which == Field::kQuestion ? docs[d].question : docs[d].answer;
    auto tokens = tokenize(text).tokens;
    stats.doc_lengths.push_back(static_cast<std::uint32_t>(tokens.size()));
    std::map<std::string, std::uint32_t, std::less<>> tf;
    for (auto& t : tokens) ++tf[std::move(t)];
    for (auto& [term, count] : tf) {
      postings[term].push_back({static_cast<DocIndex>(d), count});
    }
  }
  for (auto& [term, list] : postings) {
    stats.terms.push_back(term);
    stats.postings.push_back(std::move(list));
  }
  return stats;
}

double average_length(const Bm25Index::FieldStats& f) {
  if (f.doc_lengths.empty()) return 0.0;
  double total = 0.0;
  for (auto len : f.doc_lengths) total += len;
  return total / static_cast<double>(f.doc_lengths.size());
}

void check_field(const Bm25Index::FieldStats& f, std::size_t n_docs, std::string_view name) {
  const std::string where = "bm25 " + std::string(name) + " field: ";
  if (f.doc_lengths.size() != n_docs) throw ValidationError(where + "doc length count mismatch");
  if (f.terms.size() != f.postings.size()) throw ValidationError(where + "terms/postings mismatch");
  std::vector<std::uint64_t> length_check(n_docs, 0);
  for (std::size_t t = 0; t < f.terms.size(); ++t) {
    if (f.terms[t].empty() || (t > 0 && !(f.terms[t - 1] < f.terms[t]))) {
      throw ValidationError(where + "terms not strictly increasing");
    }
    const auto& list = f.postings[t];
    if (list.empty() || list.size() > n_docs) throw ValidationError(where + "bad df for " + f.terms[t]);
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (list[i].doc >= n_docs || list[i].tf == 0 || (i > 0 && list[i - 1].doc >= list[i].doc)) {
        throw ValidationError(where + "malformed postings for " + f.terms[t]);
      }
      length_check[list[i].doc] += list[i].tf;
    }
  }
  for (std::size_t d = 0; d < n_docs; ++d) {
    if (length_check[d] != f.doc_lengths[d]) {
      throw ValidationError(where + "doc length disagrees with postings");
    }
  }
}

void check_weight(double w) {
  if (!(w >= 0.0 && w <= 1.0)) throw std::invalid_argument("field weight w must lie in [0, 1]");
}

}  // namespace

Bm25Index Bm25Index::build(std::span<const FaqDoc> docs, Bm25Params params) {
  if (docs.empty()) throw std::invalid_argument("build_bm25: empty corpus");
  return Bm25Index(build_field(docs, Field::kQuestion), build_field(docs, Field::kAnswer), params);
}

Bm25Index::Bm25Index(FieldStats question, FieldStats answer, Bm25Params params)
    : question_(std::move(question)), answer_(std::move(answer)), params_(params) {
  params_.validate();
  const std::size_t n = question_.doc_lengths.size();
  if (n == 0) throw std::invalid_argument("build_bm25: empty corpus");
  check_field(question_, n, "question");
  check_field(answer_, n, "answer");
  question_avgdl_ = average_length(question_);
  answer_avgdl_ = average_length(answer_);
  if (!(question_avgdl_ > 0.0)) throw ValidationError("bm25: question field has no tokens");
}

std::optional<std::size_t> Bm25Index::term_slot(const FieldStats& f, std::string_view term) const {
  auto it = std::lower_bound(f.terms.begin(), f.terms.end(), term,
                             [](const std::string& a, std::string_view b) { return a < b; });
  if (it == f.terms.end() || *it != term) return std::nullopt;
  return static_cast<std::size_t>(it - f.terms.begin());
}

std::uint32_t Bm25Index::df(Field f, std::string_view term) const {
  const auto& stats = field(f);
  auto slot = term_slot(stats, term);
  return slot ? static_cast<std::uint32_t>(stats.postings[*slot].size()) : 0U;
}

double Bm25Index::idf(std::uint32_t df) const {
  const double n = static_cast<double>(n_docs());
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

double Bm25Index::saturate(std::uint32_t tf, std::uint32_t dl, double avgdl,
                           const Bm25Params& p) const {
  const double t = tf;
  return t * (p.k1 + 1.0) / (t + p.k1 * (1.0 - p.b + p.b * dl / avgdl));
}

double Bm25Index::field_score(Field f, const TokenStream& query, DocIndex doc,
                              const Bm25Params& params) const {
  params.validate();
  if (doc >= n_docs()) throw std::out_of_range("bm25: unknown doc index");
  const auto& stats = field(f);
  const double avg = avgdl(f);
  double sum = 0.0;
  for (const auto& token : query.tokens) {
    auto slot = term_slot(stats, token);
    if (!slot) continue;
    const auto& list = stats.postings[*slot];
    auto it = std::lower_bound(list.begin(), list.end(), doc,
                               [](const Posting& p, DocIndex d) { return p.doc < d; });
    if (it == list.end() || it->doc != doc) continue;
    sum += idf(static_cast<std::uint32_t>(list.size())) *
           saturate(it->tf, stats.doc_lengths[doc], avg, params);
  }
  return sum;
}

double Bm25Index::score(const TokenStream& query, DocIndex doc, double w,
                        const Bm25Params& params) const {
  check_weight(w);
  return w * field_score(Field::kQuestion, query, doc, params) +
         (1.0 - w) * field_score(Field::kAnswer, query, doc, params);
}

void Bm25Index::accumulate(const FieldStats& f, double avgdl, const TokenStream& query,
                           const Bm25Params& p, std::vector<double>& acc) const {
  // Token order matches field_score(), so per-doc sums are bit-identical.
  for (const auto& token : query.tokens) {
    auto slot = term_slot(f, token);
    if (!slot) continue;
    const auto& list = f.postings[*slot];
    const double term_idf = idf(static_cast<std::uint32_t>(list.size()));
    for (const auto& posting : list) {
      acc[posting.doc] += term_idf * saturate(posting.tf, f.doc_lengths[posting.doc], avgdl, p);
    }
  }
}

RankedList Bm25Index::rank(const TokenStream& query, double w, std::size_t top_n,
                           const Bm25Params& params) const {
  check_weight(w);
  params.validate();
  RankedList out;
  out.ranker = "bm25";
  if (top_n == 0) return out;
  std::vector<double> acc_q(n_docs(), 0.0);
  std::vector<double> acc_a(n_docs(), 0.0);
  accumulate(question_, question_avgdl_, query, params, acc_q);
  accumulate(answer_, answer_avgdl_, query, params, acc_a);
  std::vector<ScoredDoc> candidates;
  for (std::size_t d = 0; d < n_docs(); ++d) {
    const double s = w * acc_q[d] + (1.0 - w) * acc_a[d];
    if (s > 0.0) candidates.push_back({static_cast<DocIndex>(d), s});
  }
  out.entries = select_top(std::move(candidates), top_n);
  return out;
}

}  // namespace faqrank
