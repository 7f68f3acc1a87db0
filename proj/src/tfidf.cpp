#include "faqrank/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "faqrank/error.hpp"

namespace faqrank {

namespace {

void check_weight(double w) {
  if (!(w >= 0.0 && w <= 1.0)) {
    throw std::invalid_argument("field weight w must lie in [0, 1]");
  }
}

void check_vector(const SparseVec& v, std::size_t vocab_size, std::string_view what) {
  for (std::size_t i = 0; i < v.entries.size(); ++i) {
    const auto& e = v.entries[i];
    if (e.term >= vocab_size) {
      throw ValidationError(std::string(what) + ": term id out of range");
    }
    if (i > 0 && v.entries[i - 1].term >= e.term) {
      throw ValidationError(std::string(what) + ": term ids not strictly increasing");
    }
    if (!std::isfinite(e.weight)) {
      throw ValidationError(std::string(what) + ": non-finite weight");
    }
  }
  if (!v.is_zero() && std::abs(v.norm() - 1.0) > 1e-9) {
    throw ValidationError(std::string(what) + ": vector is not unit length");
  }
}

}  // namespace

double SparseVec::norm() const {
  double sum = 0.0;
  for (const auto& e : entries) sum += e.weight * e.weight;
  return std::sqrt(sum);
}

double dot(const SparseVec& a, const SparseVec& b) {
  double sum = 0.0;
  auto ia = a.entries.begin();
  auto ib = b.entries.begin();
  while (ia != a.entries.end() && ib != b.entries.end()) {
    if (ia->term < ib->term) {
      ++ia;
    } else if (ib->term < ia->term) {
      ++ib;
    } else {
      sum += ia->weight * ib->weight;
      ++ia;
      ++ib;
    }
  }
  return sum;
}

double cosine(const SparseVec& a, const SparseVec& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

Vocabulary Vocabulary::fit(std::span<const FaqDoc> docs) {
  if (docs.empty()) throw std::invalid_argument("Vocabulary::fit: empty corpus");
  std::map<std::string, std::uint32_t, std::less<>> df;
  std::vector<std::string> seen;
  for (const auto& doc : docs) {
    auto tokens = tokenize(doc.question).tokens;
    auto answer = tokenize(doc.answer).tokens;
    tokens.insert(tokens.end(), std::make_move_iterator(answer.begin()),
                  std::make_move_iterator(answer.end()));
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (auto& t : tokens) ++df[std::move(t)];
  }
  if (df.empty()) throw ValidationError("Vocabulary::fit: corpus has no tokens");
  std::vector<std::string> terms;
  std::vector<std::uint32_t> counts;
  terms.reserve(df.size());
  counts.reserve(df.size());
  for (auto& [term, count] : df) {
    terms.push_back(term);
    counts.push_back(count);
  }
  return Vocabulary(std::move(terms), std::move(counts), docs.size());
}

Vocabulary::Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> df,
                       std::size_t n_docs)
    : terms_(std::move(terms)), df_(std::move(df)), n_docs_(n_docs) {
  if (terms_.size() != df_.size()) throw ValidationError("vocabulary: terms/df size mismatch");
  if (n_docs_ == 0) throw ValidationError("vocabulary: n_docs must be positive");
  idf_.reserve(terms_.size());
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (terms_[i].empty()) throw ValidationError("vocabulary: empty term");
    if (i > 0 && !(terms_[i - 1] < terms_[i])) {
      throw ValidationError("vocabulary: terms not strictly increasing at '" + terms_[i] + "'");
    }
    if (df_[i] == 0 || df_[i] > n_docs_) {
      throw ValidationError("vocabulary: df out of range for '" + terms_[i] + "'");
    }
    const double n = static_cast<double>(n_docs_);
    idf_.push_back(std::log((1.0 + n) / (1.0 + df_[i])) + 1.0);
  }
}

std::optional<TermId> Vocabulary::find(std::string_view term) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), term,
                             [](const std::string& a, std::string_view b) { return a < b; });
  if (it == terms_.end() || *it != term) return std::nullopt;
  return static_cast<TermId>(it - terms_.begin());
}

SparseVec vectorize(const Vocabulary& vocab, const TokenStream& tokens) {
  std::map<TermId, std::uint32_t> counts;
  for (const auto& token : tokens.tokens) {
    if (auto id = vocab.find(token)) ++counts[*id];
  }
  SparseVec v;
  v.entries.reserve(counts.size());
  for (auto [term, tf] : counts) {
    v.entries.push_back({term, static_cast<double>(tf) * vocab.idf(term)});
  }
  const double n = v.norm();
  if (n > 0.0) {
    for (auto& e : v.entries) e.weight /= n;
  }
  return v;
}

double score_tfidf(const SparseVec& query, const SparseVec& doc_q, const SparseVec& doc_a,
                   double w) {
  check_weight(w);
  return w * cosine(query, doc_q) + (1.0 - w) * cosine(query, doc_a);
}

TfidfIndex TfidfIndex::build(std::span<const FaqDoc> docs) {
  Vocabulary vocab = Vocabulary::fit(docs);
  std::vector<SparseVec> questions;
  std::vector<SparseVec> answers;
  questions.reserve(docs.size());
  answers.reserve(docs.size());
  for (const auto& doc : docs) {
    questions.push_back(faqrank::vectorize(vocab, tokenize(doc.question)));
    answers.push_back(faqrank::vectorize(vocab, tokenize(doc.answer)));
  }
  return TfidfIndex(std::move(vocab), std::move(questions), std::move(answers));
}

TfidfIndex::TfidfIndex(Vocabulary vocab, std::vector<SparseVec> questions,
                       std::vector<SparseVec> answers)
    : vocab_(std::move(vocab)), questions_(std::move(questions)), answers_(std::move(answers)) {
  if (questions_.size() != answers_.size() || questions_.size() != vocab_.n_docs()) {
    throw ValidationError("tfidf index: document count mismatch");
  }
  question_postings_.resize(vocab_.size());
  answer_postings_.resize(vocab_.size());
  question_norms_.reserve(size());
  answer_norms_.reserve(size());
  for (std::size_t d = 0; d < size(); ++d) {
    check_vector(questions_[d], vocab_.size(), "tfidf question vector");
    check_vector(answers_[d], vocab_.size(), "tfidf answer vector");
    question_norms_.push_back(questions_[d].norm());
    answer_norms_.push_back(answers_[d].norm());
    const auto doc = static_cast<DocIndex>(d);
    for (const auto& e : questions_[d].entries) question_postings_[e.term].push_back({doc, e.weight});
    for (const auto& e : answers_[d].entries) answer_postings_[e.term].push_back({doc, e.weight});
  }
}

double TfidfIndex::score(const SparseVec& query, DocIndex doc, double w) const {
  return score_tfidf(query, questions_.at(doc), answers_.at(doc), w);
}

RankedList TfidfIndex::rank(const SparseVec& query, double w, std::size_t top_n) const {
  check_weight(w);
  RankedList out;
  out.ranker = "tfidf";
  const double query_norm = query.norm();
  if (query_norm == 0.0 || top_n == 0) return out;

  // Same summation order as dot(): ascending term id per document.
  std::vector<double> acc_q(size(), 0.0);
  std::vector<double> acc_a(size(), 0.0);
  for (const auto& e : query.entries) {
    if (e.term >= vocab_.size()) continue;
    for (const auto& p : question_postings_[e.term]) acc_q[p.doc] += e.weight * p.weight;
    for (const auto& p : answer_postings_[e.term]) acc_a[p.doc] += e.weight * p.weight;
  }
  std::vector<ScoredDoc> candidates;
  for (std::size_t d = 0; d < size(); ++d) {
    const double cq =
        question_norms_[d] == 0.0 ? 0.0 : acc_q[d] / (query_norm * question_norms_[d]);
    const double ca = answer_norms_[d] == 0.0 ? 0.0 : acc_a[d] / (query_norm * answer_norms_[d]);
    const double s = w * cq + (1.0 - w) * ca;
    if (s > 0.0) candidates.push_back({static_cast<DocIndex>(d), s});
  }
  out.entries = select_top(std::move(candidates), top_n);
  return out;
}

}  // namespace faqrank
