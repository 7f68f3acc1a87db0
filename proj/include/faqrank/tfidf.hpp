#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "faqrank/corpus.hpp"
#include "faqrank/ranking.hpp"
#include "faqrank/textproc.hpp"

namespace faqrank {

using TermId = std::uint32_t;

struct SparseEntry {
  TermId term = 0;
  double weight = 0.0;

  bool operator==(const SparseEntry&) const = default;
};

/// Entries sorted by strictly increasing term id.
struct SparseVec {
  std::vector<SparseEntry> entries;

  double norm() const;
  bool is_zero() const { return entries.empty(); }

  bool operator==(const SparseVec&) const = default;
};

double dot(const SparseVec& a, const SparseVec& b);

/// Cosine similarity; 0 when either side is the zero vector.
double cosine(const SparseVec& a, const SparseVec& b);

/// Terms in byte order; a term's id is its position. One fitting document is
/// the concatenation of a pair's question and answer.
class Vocabulary {
 public:
  /// Smoothed idf: ln((1 + n_docs) / (1 + df)) + 1.
  /// Throws std::invalid_argument on an empty corpus and ValidationError when
  /// the corpus has no tokens at all.
  static Vocabulary fit(std::span<const FaqDoc> docs);

  /// Rebuilds a fitted vocabulary. Terms must be strictly increasing and
  /// 1 <= df <= n_docs; throws ValidationError otherwise.
  Vocabulary(std::vector<std::string> terms, std::vector<std::uint32_t> df,
             std::size_t n_docs);

  std::optional<TermId> find(std::string_view term) const;

  std::size_t size() const noexcept { return terms_.size(); }
  std::size_t n_docs() const noexcept { return n_docs_; }
  const std::string& term(TermId id) const { return terms_.at(id); }
  std::uint32_t df(TermId id) const { return df_.at(id); }
  double idf(TermId id) const { return idf_.at(id); }

 private:
  std::vector<std::string> terms_;
  std::vector<std::uint32_t> df_;
  std::vector<double> idf_;
  std::size_t n_docs_ = 0;
};

/// Raw term counts times idf, then L2-normalized. Unknown terms are dropped,
/// so an all-unknown input gives the zero vector.
SparseVec vectorize(const Vocabulary& vocab, const TokenStream& tokens);

/// w * cos(query, doc_q) + (1 - w) * cos(query, doc_a).
/// Throws std::invalid_argument when w is outside [0, 1].
double score_tfidf(const SparseVec& query, const SparseVec& doc_q,
                   const SparseVec& doc_a, double w);

/// Per-field TF-IDF vectors over one shared vocabulary, with inverted lists
/// for ranking.
class TfidfIndex {
 public:
  static TfidfIndex build(std::span<const FaqDoc> docs);

  /// Throws ValidationError if a vector breaks the SparseVec invariants or
  /// refers to a term outside the vocabulary.
  TfidfIndex(Vocabulary vocab, std::vector<SparseVec> questions,
             std::vector<SparseVec> answers);

  const Vocabulary& vocabulary() const noexcept { return vocab_; }
  std::size_t size() const noexcept { return questions_.size(); }
  const SparseVec& question(DocIndex doc) const { return questions_.at(doc); }
  const SparseVec& answer(DocIndex doc) const { return answers_.at(doc); }

  SparseVec vectorize(const TokenStream& tokens) const {
    return faqrank::vectorize(vocab_, tokens);
  }

  double score(const SparseVec& query, DocIndex doc, double w) const;

  /// Docs with a positive score, best first, at most top_n.
  RankedList rank(const SparseVec& query, double w, std::size_t top_n) const;

 private:
  struct Posting {
    DocIndex doc;
    double weight;
  };

  Vocabulary vocab_;
  std::vector<SparseVec> questions_;
  std::vector<SparseVec> answers_;
  std::vector<double> question_norms_;
  std::vector<double> answer_norms_;
  std::vector<std::vector<Posting>> question_postings_;
  std::vector<std::vector<Posting>> answer_postings_;
};

}  // namespace faqrank
