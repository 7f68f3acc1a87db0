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

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;

  /// Throws std::invalid_argument unless k1 > 0 and b in [0, 1].
  void validate() const;

  bool operator==(const Bm25Params&) const = default;
};

enum class Field { kQuestion, kAnswer };

/// Okapi BM25 statistics kept separately for the question and answer fields.
/// Each field is scored as its own collection: own postings, own document
/// frequencies and own average length.
class Bm25Index {
 public:
  struct Posting {
    DocIndex doc = 0;
    std::uint32_t tf = 0;

    bool operator==(const Posting&) const = default;
  };

  struct FieldStats {
    std::vector<std::string> terms;               // strictly increasing
    std::vector<std::vector<Posting>> postings;   // parallel to terms, by doc
    std::vector<std::uint32_t> doc_lengths;       // one per doc
  };

  /// Throws std::invalid_argument on an empty corpus or bad params and
  /// ValidationError when no question has a token.
  static Bm25Index build(std::span<const FaqDoc> docs, Bm25Params params = {});

  /// Rebuilds an index from persisted statistics; validates every invariant.
  Bm25Index(FieldStats question, FieldStats answer, Bm25Params params);

  std::size_t n_docs() const noexcept { return question_.doc_lengths.size(); }
  const Bm25Params& params() const noexcept { return params_; }
  const FieldStats& field(Field f) const { return f == Field::kQuestion ? question_ : answer_; }
  double avgdl(Field f) const { return f == Field::kQuestion ? question_avgdl_ : answer_avgdl_; }

  /// Document frequency of `term` within field `f`, 0 if absent.
  std::uint32_t df(Field f, std::string_view term) const;

  /// ln(1 + (n - df + 0.5) / (df + 0.5)); always positive.
  double idf(std::uint32_t df) const;

  /// Sum over query tokens (repeats count) of idf * saturated tf for one field.
  double field_score(Field f, const TokenStream& query, DocIndex doc,
                     const Bm25Params& params) const;

  /// w * BM25_question + (1 - w) * BM25_answer with the index's params.
  /// Throws std::out_of_range for an unknown doc and std::invalid_argument
  /// for w outside [0, 1].
  double score(const TokenStream& query, DocIndex doc, double w) const {
    return score(query, doc, w, params_);
  }
  double score(const TokenStream& query, DocIndex doc, double w,
               const Bm25Params& params) const;

  /// Positive-score docs, best first, ties by ascending doc, at most top_n.
  RankedList rank(const TokenStream& query, double w, std::size_t top_n) const {
    return rank(query, w, top_n, params_);
  }
  RankedList rank(const TokenStream& query, double w, std::size_t top_n,
                  const Bm25Params& params) const;

 private:
  std::optional<std::size_t> term_slot(const FieldStats& f, std::string_view term) const;
  double saturate(std::uint32_t tf, std::uint32_t dl, double avgdl, const Bm25Params& p) const;
  void accumulate(const FieldStats& f, double avgdl, const TokenStream& query,
                  const Bm25Params& p, std::vector<double>& acc) const;

  FieldStats question_;
  FieldStats answer_;
  double question_avgdl_ = 0.0;
  double answer_avgdl_ = 0.0;
  Bm25Params params_;
};

}  // namespace faqrank
