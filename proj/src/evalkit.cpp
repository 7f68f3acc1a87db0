#include "faqrank/evalkit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "faqrank/error.hpp"
#include "faqrank/util.hpp"

namespace faqrank {

void Qrels::add(std::string query_id, std::string doc_id, int grade) {
  if (grade < 0 || grade > 2) {
    throw std::invalid_argument("grade " + std::to_string(grade) + " outside {0,1,2}");
  }
  auto& row = table_[std::move(query_id)];
  if (!row.emplace(doc_id, grade).second) {
    throw std::invalid_argument("duplicate judgment for doc '" + doc_id + "'");
  }
}

bool Qrels::has_query(std::string_view query_id) const { return table_.find(query_id) != table_.end(); }

const std::map<std::string, int, std::less<>>& Qrels::judgments(std::string_view query_id) const {
  auto it = table_.find(query_id);
  if (it == table_.end()) throw std::out_of_range("no judgments for query '" + std::string(query_id) + "'");
  return it->second;
}

namespace {

std::string where(std::string_view origin, std::size_t line_no) {
  std::ostringstream out;
  out << origin << ":" << line_no << ": ";
  return out.str();
}

}  // namespace

Qrels parse_qrels(std::istream& in, std::string_view origin) {
  Qrels qrels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto f = split_whitespace(line);
    if (f.empty()) continue;
    if (f.size() != 4) {
      throw ValidationError(where(origin, line_no) + "expected 'query-id 0 doc-id grade'");
    }
    auto grade = parse_uint(f[3]);
    if (!grade || *grade > 2) {
      throw ValidationError(where(origin, line_no) + "grade '" + std::string(f[3]) +
                            "' outside {0,1,2}");
    }
    try {
      qrels.add(std::string(f[0]), std::string(f[2]), static_cast<int>(*grade));
    } catch (const std::invalid_argument& e) {
      throw ValidationError(where(origin, line_no) + e.what());
    }
  }
  return qrels;
}

Qrels load_qrels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open qrels " + path.string());
  return parse_qrels(in, path.string());
}

RunFile parse_run(std::istream& in, std::string_view origin) {
  RunFile run;
  std::map<std::string, std::set<std::string, std::less<>>, std::less<>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto f = split_whitespace(line);
    if (f.empty()) continue;
    if (f.size() != 6) {
      throw ValidationError(where(origin, line_no) + "expected 'query-id Q0 doc-id rank score tag'");
    }
    auto rank = parse_uint(f[3]);
    if (!rank || *rank == 0) throw ValidationError(where(origin, line_no) + "bad rank '" + std::string(f[3]) + "'");
    auto score = parse_double(f[4]);
    if (!score || !std::isfinite(*score)) {
      throw ValidationError(where(origin, line_no) + "bad score '" + std::string(f[4]) + "'");
    }
    if (!seen[std::string(f[0])].emplace(f[2]).second) {
      throw ValidationError(where(origin, line_no) + "duplicate doc '" + std::string(f[2]) +
                            "' for query '" + std::string(f[0]) + "'");
    }
    run[std::string(f[0])].push_back(
        RunRecord{std::string(f[2]), static_cast<std::size_t>(*rank), *score, std::string(f[5])});
  }
  for (auto& [query, records] : run) {
    std::stable_sort(records.begin(), records.end(),
                     [](const RunRecord& a, const RunRecord& b) { return a.rank < b.rank; });
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (records[i].rank != i + 1) {
        throw ValidationError(std::string(origin) + ": query '" + query +
                              "' ranks are not contiguous from 1");
      }
      if (i > 0 && records[i].score > records[i - 1].score) {
        throw ValidationError(std::string(origin) + ": query '" + query +
                              "' scores increase at rank " + std::to_string(i + 1));
      }
    }
  }
  return run;
}

RunFile load_run(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open run " + path.string());
  return parse_run(in, path.string());
}

void write_qrels(std::ostream& out, const Qrels& qrels) {
  for (const auto& [query, row] : qrels.all()) {
    for (const auto& [doc, grade] : row) out << query << " 0 " << doc << ' ' << grade << '\n';
  }
}

void write_run(std::ostream& out, const RunFile& run) {
  for (const auto& [query, records] : run) {
    for (const auto& r : records) {
      out << query << " Q0 " << r.doc_id << ' ' << r.rank << ' ' << format_fixed(r.score, 10) << ' '
          << r.tag << '\n';
    }
  }
}

RunFile make_run(std::span<const FusedResult> results, std::span<const FaqDoc> docs,
                 std::string_view tag) {
  RunFile run;
  for (const auto& result : results) {
    auto& records = run[result.query_id];
    records.clear();
    for (std::size_t i = 0; i < result.entries.size(); ++i) {
      const auto& e = result.entries[i];
      records.push_back(RunRecord{docs[e.doc].id, i + 1, e.score, std::string(tag)});
    }
  }
  return run;
}

std::vector<std::string> metric_names(const MetricOptions& options) {
  std::vector<std::string> names = {"recip_rank", "map"};
  for (const char* prefix : {"map_cut_", "P_", "recall_", "ndcg_cut_"}) {
    for (auto k : options.cutoffs) names.push_back(prefix + std::to_string(k));
  }
  return names;
}

double MetricReport::value(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("unknown metric '" + std::string(name) + "'");
  return mean[static_cast<std::size_t>(it - names.begin())];
}

double MetricReport::value(std::string_view query_id, std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("unknown metric '" + std::string(name) + "'");
  auto row = per_query.find(query_id);
  if (row == per_query.end()) throw std::out_of_range("unknown query '" + std::string(query_id) + "'");
  return row->second[static_cast<std::size_t>(it - names.begin())];
}

double reciprocal_rank(std::span<const int> grades) {
  for (std::size_t i = 0; i < grades.size(); ++i) {
    if (grades[i] >= 1) return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

double average_precision(std::span<const int> grades, std::size_t num_relevant, std::size_t cutoff) {
  if (num_relevant == 0) return 0.0;
  const std::size_t n = cutoff == 0 ? grades.size() : std::min(cutoff, grades.size());
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (grades[i] >= 1) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(num_relevant);
}

double precision_at(std::span<const int> grades, std::size_t k) {
  if (k == 0) return 0.0;
  const std::size_t n = std::min(k, grades.size());
  const auto hits = std::count_if(grades.begin(), grades.begin() + static_cast<std::ptrdiff_t>(n),
                                  [](int g) { return g >= 1; });
  return static_cast<double>(hits) / static_cast<double>(k);
}

double recall_at(std::span<const int> grades, std::size_t num_relevant, std::size_t k) {
  if (num_relevant == 0) return 0.0;
  const std::size_t n = std::min(k, grades.size());
  const auto hits = std::count_if(grades.begin(), grades.begin() + static_cast<std::ptrdiff_t>(n),
                                  [](int g) { return g >= 1; });
  return static_cast<double>(hits) / static_cast<double>(num_relevant);
}

namespace {

double gain_of(int grade, GainMode mode) {
  if (grade <= 0) return 0.0;
  return mode == GainMode::kLinear ? static_cast<double>(grade) : std::exp2(grade) - 1.0;
}

double dcg(std::span<const int> grades, std::size_t k, GainMode mode) {
  double sum = 0.0;
  const std::size_t n = std::min(k, grades.size());
  for (std::size_t i = 0; i < n; ++i) {
    sum += gain_of(grades[i], mode) / std::log2(static_cast<double>(i + 2));
  }
  return sum;
}

}  // namespace

double ndcg_at(std::span<const int> grades, std::span<const int> judged_grades, std::size_t k,
               GainMode gain) {
  std::vector<int> ideal(judged_grades.begin(), judged_grades.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double ideal_dcg = dcg(ideal, k, gain);
  if (ideal_dcg <= 0.0) return 0.0;
  return dcg(grades, k, gain) / ideal_dcg;
}

MetricReport evaluate(const RunFile& run, const Qrels& qrels, const MetricOptions& options) {
  MetricReport report;
  report.names = metric_names(options);
  report.mean.assign(report.names.size(), 0.0);
  for (const auto& [query, records] : run) {
    if (!qrels.has_query(query)) {
      throw ValidationError("run query '" + query + "' has no relevance judgments");
    }
    const auto& judged = qrels.judgments(query);
    std::vector<int> judged_grades;
    std::size_t num_relevant = 0;
    for (const auto& [doc, grade] : judged) {
      judged_grades.push_back(grade);
      if (grade >= 1) ++num_relevant;
    }
    std::vector<int> grades;
    grades.reserve(records.size());
    for (const auto& r : records) {
      auto it = judged.find(r.doc_id);
      grades.push_back(it == judged.end() ? 0 : it->second);
    }
    std::vector<double> values;
    values.push_back(reciprocal_rank(grades));
    values.push_back(average_precision(grades, num_relevant));
    for (auto k : options.cutoffs) values.push_back(average_precision(grades, num_relevant, k));
    for (auto k : options.cutoffs) values.push_back(precision_at(grades, k));
    for (auto k : options.cutoffs) values.push_back(recall_at(grades, num_relevant, k));
    for (auto k : options.cutoffs) values.push_back(ndcg_at(grades, judged_grades, k, options.gain));
    report.per_query.emplace(query, std::move(values));
  }
  if (!report.per_query.empty()) {
    for (const auto& [query, values] : report.per_query) {
      for (std::size_t i = 0; i < values.size(); ++i) report.mean[i] += values[i];
    }
    for (double& m : report.mean) m /= static_cast<double>(report.per_query.size());
  }
  return report;
}

QrelsStats compute_qrels_stats(const Qrels& qrels) {
  QrelsStats stats;
  stats.n_queries = qrels.all().size();
  if (stats.n_queries == 0) return stats;
  std::size_t judged = 0;
  std::array<std::size_t, 3> by_grade{};
  for (const auto& [query, row] : qrels.all()) {
    judged += row.size();
    for (const auto& [doc, grade] : row) ++by_grade[static_cast<std::size_t>(grade)];
  }
  const auto n = static_cast<double>(stats.n_queries);
  stats.avg_judged = static_cast<double>(judged) / n;
  stats.avg_relevant = static_cast<double>(by_grade[2]) / n;
  stats.avg_partially_relevant = static_cast<double>(by_grade[1]) / n;
  stats.avg_non_relevant = static_cast<double>(by_grade[0]) / n;
  return stats;
}

}  // namespace faqrank
