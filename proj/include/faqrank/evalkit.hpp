#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "faqrank/corpus.hpp"
#include "faqrank/fusion.hpp"

namespace faqrank {

/// Graded judgments: query id -> doc id -> grade in {0, 1, 2}.
/// 0 irrelevant, 1 somewhat relevant, 2 relevant.
class Qrels {
 public:
  /// Throws std::invalid_argument for a grade outside {0,1,2} or a repeated pair.
  void add(std::string query_id, std::string doc_id, int grade);

  bool has_query(std::string_view query_id) const;
  const std::map<std::string, int, std::less<>>& judgments(std::string_view query_id) const;
  const std::map<std::string, std::map<std::string, int, std::less<>>, std::less<>>& all() const {
    return table_;
  }

 private:
  std::map<std::string, std::map<std::string, int, std::less<>>, std::less<>> table_;
};

struct RunRecord {
  std::string doc_id;
  std::size_t rank = 0;
  double score = 0.0;
  std::string tag;

  bool operator==(const RunRecord&) const = default;
};

/// Query id -> records in rank order (ranks 1..n, scores non-increasing).
using RunFile = std::map<std::string, std::vector<RunRecord>, std::less<>>;

// Qrels lines: `query-id 0 doc-id grade`.
// Run lines:   `query-id Q0 doc-id rank score tag`.
// Both whitespace separated; blank lines skipped. Errors name the line.
Qrels parse_qrels(std::istream& in, std::string_view origin);
Qrels load_qrels(const std::filesystem::path& path);
RunFile parse_run(std::istream& in, std::string_view origin);
RunFile load_run(const std::filesystem::path& path);

void write_qrels(std::ostream& out, const Qrels& qrels);

/// Scores are written with 10 decimals.
void write_run(std::ostream& out, const RunFile& run);

/// Maps engine results to run records tagged `tag`.
RunFile make_run(std::span<const FusedResult> results, std::span<const FaqDoc> docs,
                 std::string_view tag);

enum class GainMode { kLinear, kExponential };

struct MetricOptions {
  std::vector<std::size_t> cutoffs = {5, 10};
  GainMode gain = GainMode::kLinear;
};

/// Metric names in report order: recip_rank, map, then map_cut_k, P_k,
/// recall_k and ndcg_cut_k for every cutoff. Names follow trec_eval.
std::vector<std::string> metric_names(const MetricOptions& options);

struct MetricReport {
  std::vector<std::string> names;
  std::map<std::string, std::vector<double>, std::less<>> per_query;  // values in `names` order
  std::vector<double> mean;

  /// Mean value of a metric; throws std::out_of_range for an unknown name.
  double value(std::string_view name) const;
  double value(std::string_view query_id, std::string_view name) const;
};

// Per-query primitives. `grades` lists the judged grade of each retrieved doc
// in rank order (unjudged = 0); a grade >= 1 counts as relevant.
double reciprocal_rank(std::span<const int> grades);
double average_precision(std::span<const int> grades, std::size_t num_relevant,
                         std::size_t cutoff = 0);  // 0 = no cutoff
double precision_at(std::span<const int> grades, std::size_t k);
double recall_at(std::span<const int> grades, std::size_t num_relevant, std::size_t k);
/// DCG with gain/log2(rank + 1), normalized by the ideal ordering of
/// `judged_grades`. 0 when the ideal DCG is 0.
double ndcg_at(std::span<const int> grades, std::span<const int> judged_grades, std::size_t k,
               GainMode gain = GainMode::kLinear);

/// Evaluates every run query. Throws ValidationError when a run query has no
/// judgments at all. Queries judged but absent from the run are ignored.
MetricReport evaluate(const RunFile& run, const Qrels& qrels, const MetricOptions& options = {});

/// Judgment counts averaged over judged queries.
struct QrelsStats {
  std::size_t n_queries = 0;
  double avg_judged = 0.0;
  double avg_relevant = 0.0;            // grade 2
  double avg_partially_relevant = 0.0;  // grade 1
  double avg_non_relevant = 0.0;        // grade 0
};

QrelsStats compute_qrels_stats(const Qrels& qrels);

}  // namespace faqrank
