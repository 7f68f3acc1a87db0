#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "faqrank/evalkit.hpp"
#include "json.hpp"

namespace faqrank::testing {

/// One randomized qrels/run pair with reference values computed by trec_eval.
struct TrecCase {
  Qrels qrels;
  RunFile run;
  std::map<std::string, std::map<std::string, double>> expected;  // query -> metric -> value
};

/// Reads tests/data/trec_eval_fixtures.json. Run records are given in rank
/// order; qrels and run are serialized and parsed back so the file formats
/// are exercised too.
inline std::vector<TrecCase> load_trec_fixtures(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const auto doc = nlohmann::json::parse(in);
  std::vector<TrecCase> cases;
  for (const auto& c : doc.at("cases")) {
    Qrels qrels;
    for (const auto& row : c.at("qrels")) {
      qrels.add(row.at(0).get<std::string>(), row.at(1).get<std::string>(), row.at(2).get<int>());
    }
    RunFile run;
    for (const auto& row : c.at("run")) {
      auto& records = run[row.at(0).get<std::string>()];
      records.push_back({row.at(1).get<std::string>(), records.size() + 1,
                         row.at(2).get<double>(), "fixture"});
    }
    std::stringstream qbuf, rbuf;
    write_qrels(qbuf, qrels);
    write_run(rbuf, run);

    TrecCase tc{parse_qrels(qbuf, "qrels"), parse_run(rbuf, "run"), {}};
    for (const auto& [q, metrics] : c.at("expected").items()) {
      for (const auto& [name, value] : metrics.items()) tc.expected[q][name] = value.get<double>();
    }
    cases.push_back(std::move(tc));
  }
  return cases;
}

/// Largest |engine - reference| over every query and metric of every case.
/// `worst` receives a description of where it happened.
inline double max_trec_deviation(const std::vector<TrecCase>& cases, std::string* worst = nullptr) {
  double max_dev = 0.0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto report = evaluate(cases[i].run, cases[i].qrels);
    for (const auto& [q, metrics] : cases[i].expected) {
      for (const auto& [name, want] : metrics) {
        const double dev = std::abs(report.value(q, name) - want);
        if (dev > max_dev || std::isnan(dev)) {
          max_dev = std::isnan(dev) ? INFINITY : dev;
          if (worst) *worst = "case " + std::to_string(i) + " " + q + " " + name;
        }
      }
    }
  }
  return max_dev;
}

}  // namespace faqrank::testing
