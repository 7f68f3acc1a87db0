#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "faqrank/evalkit.hpp"
#include "faqrank/hybrid_index.hpp"

namespace faqrank {

/// 0.0, 0.1, ..., 1.0: the values swept for both alpha and w.
std::vector<double> grid_values();

struct GridOptions {
  std::vector<RankerMode> modes = {RankerMode::kTfidf, RankerMode::kBm25, RankerMode::kHybrid,
                                   RankerMode::kRrf};
  std::string target = "P_5";
  MetricOptions metrics;
  unsigned threads = 1;
};

struct GridCell {
  RankerMode mode = RankerMode::kRrf;
  double alpha = 0.0;
  double w = 0.0;
  MetricReport report;
};

struct GridReport {
  FusionParams base;
  std::string provider;
  std::size_t n_queries = 0;
  std::string target;
  std::vector<GridCell> cells;  // mode-major, then alpha, then w

  /// Cell of `mode` with the highest target metric; the earliest cell wins
  /// ties. Throws std::out_of_range if the mode was not swept.
  const GridCell& best(RankerMode mode) const;
};

/// Sweeps every (alpha, w) pair of grid_values() for each mode, keeping
/// beta and the other parameters from `base`. Modes that ignore alpha or w
/// still get all 121 cells so every mode's table has the same shape.
/// Cells run on `options.threads` workers; the report does not depend on
/// the thread count.
GridReport grid_search(const HybridIndex& index, std::span<const Query> queries, const Qrels& qrels,
                       const FusionParams& base, const GridOptions& options,
                       const EmbeddingProvider& provider);

/// Tab-separated table, one row per (mode, alpha, w), preceded by '#'
/// header lines with the fixed parameters and followed by one
/// '# argmax' line per mode.
void write_grid_report(std::ostream& out, const GridReport& report);

}  // namespace faqrank
