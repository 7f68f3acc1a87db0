#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "faqrank/bm25.hpp"
#include "faqrank/ranking.hpp"

namespace faqrank {

/// Which way the query-length damping factor leans.
///   kAsWritten:   dense weight alpha + (1-alpha)*zeta, lexical (1-alpha)*(1-zeta).
///                 Short queries (zeta near 1) lean on the dense score.
///   kProseIntent: zeta and (1-zeta) swapped, so short queries lean on TF-IDF.
enum class DampingMode { kAsWritten, kProseIntent };

enum class RankerMode { kTfidf, kBm25, kSbert, kHybrid, kRrf };

std::string_view to_string(DampingMode mode);
std::string_view to_string(RankerMode mode);
std::optional<DampingMode> parse_damping_mode(std::string_view text);
std::optional<RankerMode> parse_ranker_mode(std::string_view text);

struct FusionParams {
  std::optional<double> alpha;  // required by the hybrid and rrf modes
  double w = 0.5;
  double beta = 3.0;
  double rrf_k = 60.0;
  std::size_t top_n = 200;  // candidates taken from each index
  std::size_t top_m = 50;   // results surfaced
  DampingMode damping = DampingMode::kAsWritten;
  Bm25Params bm25;

  /// Throws std::invalid_argument when a value is out of range.
  void validate() const;

  bool operator==(const FusionParams&) const = default;
};

/// Sets one parameter from its config-file key (alpha, w, beta, rrf_k, top_n,
/// top_m, damping_mode, k1, b). Throws std::invalid_argument on an unknown
/// key, an unparsable value or a value outside its range.
void set_param(FusionParams& params, std::string_view key, std::string_view value);

/// Config files hold `key = value` lines; '#' starts a comment. Values not
/// mentioned keep their value from `base`. Throws ValidationError with the
/// line number.
FusionParams parse_params(std::istream& in, std::string_view origin, FusionParams base = {});
FusionParams load_params(const std::filesystem::path& path, FusionParams base = {});

/// Config-file text for `params`; parse_params reads it back unchanged.
std::string format_params(const FusionParams& params);

/// exp((1 - len_q) / beta). Throws std::invalid_argument for len_q == 0 or
/// beta <= 0.
double damping(std::size_t len_q, double beta);

struct HybridWeights {
  double dense = 0.0;
  double lexical = 0.0;
};

/// Coefficients on the dense and TF-IDF scores; they always sum to one.
/// Throws std::invalid_argument unless alpha is in [0, 1] and zeta in (0, 1].
HybridWeights hybrid_weights(double alpha, double zeta, DampingMode mode);

double hybrid_score(double f_sbert, double f_tfidf, double alpha, double zeta,
                    DampingMode mode);

struct FusedEntry {
  DocIndex doc = 0;
  double score = 0.0;
  std::optional<std::size_t> rank_a;  // 1-based rank in the first list
  std::optional<std::size_t> rank_b;  // 1-based rank in the second list

  bool operator==(const FusedEntry&) const = default;
};

struct FusedResult {
  std::string query_id;
  std::string ranker_a;
  std::string ranker_b;  // empty when no fusion happened
  std::vector<FusedEntry> entries;

  bool operator==(const FusedResult&) const = default;
};

/// Reciprocal rank fusion: 1/(k + rank_a) + 1/(k + rank_b), a missing rank
/// contributing nothing. Ordered by score, ties by ascending doc.
/// Throws std::invalid_argument for k <= 0 or differing query ids.
FusedResult fuse_rrf(const RankedList& a, const RankedList& b, double k);

/// Wraps a single ranker's list without fusing.
FusedResult as_fused(const RankedList& list);

}  // namespace faqrank
