#include "faqrank/grid.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "faqrank/util.hpp"

namespace faqrank {

std::vector<double> grid_values() {
  std::vector<double> values;
  for (int i = 0; i <= 10; ++i) values.push_back(i / 10.0);
  return values;
}

const GridCell& GridReport::best(RankerMode mode) const {
  const GridCell* winner = nullptr;
  double best_value = 0.0;
  for (const auto& cell : cells) {
    if (cell.mode != mode) continue;
    const double v = cell.report.value(target);
    if (winner == nullptr || v > best_value) {
      winner = &cell;
      best_value = v;
    }
  }
  if (winner == nullptr) throw std::out_of_range("mode not in grid: " + std::string(to_string(mode)));
  return *winner;
}

GridReport grid_search(const HybridIndex& index, std::span<const Query> queries, const Qrels& qrels,
                       const FusionParams& base, const GridOptions& options,
                       const EmbeddingProvider& provider) {
  if (queries.empty()) throw std::invalid_argument("grid_search: no queries");
  if (options.modes.empty()) throw std::invalid_argument("grid_search: no modes");
  const auto names = metric_names(options.metrics);
  if (std::find(names.begin(), names.end(), options.target) == names.end()) {
    throw std::invalid_argument("grid_search: unsupported target metric '" + options.target + "'");
  }

  GridReport report;
  report.base = base;
  report.provider = index.dense().provider();
  report.n_queries = queries.size();
  report.target = options.target;
  const auto values = grid_values();
  for (auto mode : options.modes) {
    for (double alpha : values) {
      for (double w : values) report.cells.push_back(GridCell{mode, alpha, w, {}});
    }
  }

  std::vector<std::exception_ptr> errors(report.cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < report.cells.size(); i = next++) {
      auto& cell = report.cells[i];
      try {
        FusionParams params = base;
        params.alpha = cell.alpha;
        params.w = cell.w;
        std::vector<FusedResult> results;
        results.reserve(queries.size());
        for (const auto& q : queries) results.push_back(retrieve(index, q, params, cell.mode, provider));
        cell.report = evaluate(make_run(results, index.docs(), to_string(cell.mode)), qrels,
                               options.metrics);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n_workers = std::max(1U, options.threads);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return report;
}

void write_grid_report(std::ostream& out, const GridReport& report) {
  const auto& p = report.base;
  out << "# faqrank grid report\n"
      << "# beta=" << format_double(p.beta) << " rrf_k=" << format_double(p.rrf_k)
      << " top_n=" << p.top_n << " top_m=" << p.top_m << " damping_mode=" << to_string(p.damping)
      << " k1=" << format_double(p.bm25.k1) << " b=" << format_double(p.bm25.b)
      << " provider=" << report.provider << " queries=" << report.n_queries
      << " target=" << report.target << '\n';
  if (report.cells.empty()) return;
  out << "mode\talpha\tw";
  for (const auto& name : report.cells.front().report.names) out << '\t' << name;
  out << '\n';
  std::vector<RankerMode> modes;
  for (const auto& cell : report.cells) {
    out << to_string(cell.mode) << '\t' << format_fixed(cell.alpha, 1) << '\t'
        << format_fixed(cell.w, 1);
    for (double v : cell.report.mean) out << '\t' << format_fixed(v, 6);
    out << '\n';
    if (std::find(modes.begin(), modes.end(), cell.mode) == modes.end()) modes.push_back(cell.mode);
  }
  for (auto mode : modes) {
    const auto& best = report.best(mode);
    out << "# argmax mode=" << to_string(mode) << " alpha=" << format_fixed(best.alpha, 1)
        << " w=" << format_fixed(best.w, 1) << ' ' << report.target << '='
        << format_fixed(best.report.value(report.target), 6) << '\n';
  }
}

}  // namespace faqrank
