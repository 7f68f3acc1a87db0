#pragma once

// Brute-force reference implementations used as test oracles. They share no
// code with the engine: own tokenizer (ASCII corpora only), map-based TF-IDF,
// BM25 recomputed from raw token scans, exhaustive sorting.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "faqrank/corpus.hpp"

namespace faqrank::oracle {

inline std::vector<std::string> ascii_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      cur += static_cast<char>(std::tolower(u));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

using DenseVec = std::map<std::string, double>;

struct TfidfModel {
  std::map<std::string, double> idf;
};

inline TfidfModel fit_tfidf(const std::vector<FaqDoc>& docs) {
  std::map<std::string, int> df;
  for (const auto& d : docs) {
    std::set<std::string> uniq;
    for (auto& t : ascii_tokens(d.question)) uniq.insert(t);
    for (auto& t : ascii_tokens(d.answer)) uniq.insert(t);
    for (auto& t : uniq) df[t]++;
  }
  TfidfModel m;
  const double n = static_cast<double>(docs.size());
  for (auto& [t, c] : df) m.idf[t] = std::log((1.0 + n) / (1.0 + c)) + 1.0;
  return m;
}

inline DenseVec tfidf_vec(const TfidfModel& m, const std::vector<std::string>& tokens) {
  DenseVec v;
  for (auto& t : tokens) {
    auto it = m.idf.find(t);
    if (it != m.idf.end()) v[t] += it->second;  // tf * idf accumulated one count at a time
  }
  double n = 0.0;
  for (auto& [t, x] : v) n += x * x;
  n = std::sqrt(n);
  if (n > 0) {
    for (auto& [t, x] : v) x /= n;
  }
  return v;
}

inline double cosine(const DenseVec& a, const DenseVec& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (auto& [t, x] : a) {
    na += x * x;
    auto it = b.find(t);
    if (it != b.end()) dot += x * it->second;
  }
  for (auto& [t, x] : b) nb += x * x;
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

inline double bm25_field(const std::vector<FaqDoc>& docs, bool question_field,
                         const std::vector<std::string>& query, std::size_t doc, double k1,
                         double b) {
  auto field = [&](std::size_t i) {
    return ascii_tokens(question_field ? docs[i].question : docs[i].answer);
  };
  const double n = static_cast<double>(docs.size());
  double total_len = 0.0;
  for (std::size_t i = 0; i < docs.size(); ++i) total_len += static_cast<double>(field(i).size());
  const double avgdl = total_len / n;
  const auto target = field(doc);
  double score = 0.0;
  for (const auto& term : query) {
    double df = 0.0;
    for (std::size_t i = 0; i < docs.size(); ++i) {
      auto f = field(i);
      if (std::find(f.begin(), f.end(), term) != f.end()) df += 1.0;
    }
    const double tf = static_cast<double>(std::count(target.begin(), target.end(), term));
    if (tf == 0.0) continue;
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    const double dl = static_cast<double>(target.size());
    score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / avgdl));
  }
  return score;
}

struct Ranked {
  std::string id;
  double score;
};

inline std::vector<Ranked> sorted(std::vector<Ranked> v) {
  std::sort(v.begin(), v.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  return v;
}

struct PipelineSettings {
  double alpha = 0.5;
  double w = 0.5;
  double beta = 3.0;
  double rrf_k = 60.0;
  double k1 = 1.2;
  double b = 0.75;
  bool prose_intent = false;
};

/// Every ranking the engine exposes, computed over all documents with no
/// candidate truncation. `embeddings[i]` belongs to docs[i].
struct PipelineOutput {
  std::vector<Ranked> tfidf, bm25, dense, hybrid, rrf;
};

inline PipelineOutput run_pipeline(const std::vector<FaqDoc>& docs,
                                   const std::vector<std::vector<double>>& embeddings,
                                   const std::string& query, const std::vector<double>& query_vec,
                                   const PipelineSettings& s) {
  const auto q_tokens = ascii_tokens(query);
  const auto model = fit_tfidf(docs);
  const auto e_q = tfidf_vec(model, q_tokens);
  const double len = static_cast<double>(q_tokens.size());
  const double zeta = std::exp((1.0 - len) / s.beta);
  const double z = s.prose_intent ? 1.0 - zeta : zeta;
  const double c_dense = s.alpha + (1.0 - s.alpha) * z;
  const double c_lex = (1.0 - s.alpha) * (1.0 - z);

  PipelineOutput out;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto e_qf = tfidf_vec(model, ascii_tokens(docs[i].question));
    const auto e_af = tfidf_vec(model, ascii_tokens(docs[i].answer));
    const double f_tfidf = s.w * cosine(e_q, e_qf) + (1.0 - s.w) * cosine(e_q, e_af);
    const double f_sbert = cosine(query_vec, embeddings[i]);
    const double f_bm25 = s.w * bm25_field(docs, true, q_tokens, i, s.k1, s.b) +
                          (1.0 - s.w) * bm25_field(docs, false, q_tokens, i, s.k1, s.b);
    if (f_tfidf > 0.0) out.tfidf.push_back({docs[i].id, f_tfidf});
    if (f_bm25 > 0.0) out.bm25.push_back({docs[i].id, f_bm25});
    out.dense.push_back({docs[i].id, f_sbert});
    out.hybrid.push_back({docs[i].id, c_dense * f_sbert + c_lex * f_tfidf});
  }
  out.tfidf = sorted(out.tfidf);
  out.bm25 = sorted(out.bm25);
  out.dense = sorted(out.dense);
  out.hybrid = sorted(out.hybrid);

  std::map<std::string, double> rrf;
  for (std::size_t r = 0; r < out.hybrid.size(); ++r) rrf[out.hybrid[r].id] += 1.0 / (s.rrf_k + r + 1);
  for (std::size_t r = 0; r < out.bm25.size(); ++r) rrf[out.bm25[r].id] += 1.0 / (s.rrf_k + r + 1);
  for (auto& [id, score] : rrf) out.rrf.push_back({id, score});
  out.rrf = sorted(out.rrf);
  return out;
}

}  // namespace faqrank::oracle
