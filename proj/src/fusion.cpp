#include "faqrank/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "faqrank/error.hpp"
#include "faqrank/util.hpp"

namespace faqrank {

std::string_view to_string(DampingMode mode) {
  return mode == DampingMode::kAsWritten ? "as_written" : "prose_intent";
}

std::string_view to_string(RankerMode mode) {
  switch (mode) {
    case RankerMode::kTfidf: return "tfidf";
    case RankerMode::kBm25: return "bm25";
    case RankerMode::kSbert: return "sbert";
    case RankerMode::kHybrid: return "hybrid";
    case RankerMode::kRrf: return "rrf";
  }
  return "unknown";
}

std::optional<DampingMode> parse_damping_mode(std::string_view text) {
  if (text == "as_written") return DampingMode::kAsWritten;
  if (text == "prose_intent") return DampingMode::kProseIntent;
  return std::nullopt;
}

std::optional<RankerMode> parse_ranker_mode(std::string_view text) {
  for (auto mode : {RankerMode::kTfidf, RankerMode::kBm25, RankerMode::kSbert,
                    RankerMode::kHybrid, RankerMode::kRrf}) {
    if (text == to_string(mode)) return mode;
  }
  return std::nullopt;
}

namespace {

bool unit_interval(double x) { return x >= 0.0 && x <= 1.0; }

double require_double(std::string_view key, std::string_view value) {
  auto parsed = parse_double(value);
  if (!parsed || !std::isfinite(*parsed)) {
    throw std::invalid_argument("bad value for " + std::string(key) + ": '" + std::string(value) + "'");
  }
  return *parsed;
}

double require_unit(std::string_view key, std::string_view value) {
  const double x = require_double(key, value);
  if (!unit_interval(x)) throw std::invalid_argument(std::string(key) + " must lie in [0, 1]");
  return x;
}

double require_positive(std::string_view key, std::string_view value) {
  const double x = require_double(key, value);
  if (!(x > 0.0)) throw std::invalid_argument(std::string(key) + " must be positive");
  return x;
}

std::size_t require_count(std::string_view key, std::string_view value) {
  auto parsed = parse_uint(value);
  if (!parsed) {
    throw std::invalid_argument("bad value for " + std::string(key) + ": '" + std::string(value) + "'");
  }
  return static_cast<std::size_t>(*parsed);
}

}  // namespace

void FusionParams::validate() const {
  if (alpha && !unit_interval(*alpha)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (!unit_interval(w)) throw std::invalid_argument("w must lie in [0, 1]");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive");
  if (!(rrf_k > 0.0) || !std::isfinite(rrf_k)) throw std::invalid_argument("rrf_k must be positive");
  if (top_m < 1) throw std::invalid_argument("top_m must be at least 1");
  if (top_n < top_m) throw std::invalid_argument("top_n must be >= top_m");
  bm25.validate();
}

void set_param(FusionParams& params, std::string_view key, std::string_view value) {
  if (key == "alpha") {
    if (value == "unset" || value.empty()) {
      params.alpha.reset();
    } else {
      params.alpha = require_unit(key, value);
    }
  } else if (key == "w") {
    params.w = require_unit(key, value);
  } else if (key == "beta") {
    params.beta = require_positive(key, value);
  } else if (key == "rrf_k") {
    params.rrf_k = require_positive(key, value);
  } else if (key == "top_n") {
    params.top_n = require_count(key, value);
  } else if (key == "top_m") {
    params.top_m = require_count(key, value);
  } else if (key == "damping_mode") {
    auto mode = parse_damping_mode(value);
    if (!mode) throw std::invalid_argument("unknown damping_mode '" + std::string(value) + "'");
    params.damping = *mode;
  } else if (key == "k1") {
    params.bm25.k1 = require_positive(key, value);
  } else if (key == "b") {
    params.bm25.b = require_unit(key, value);
  } else {
    throw std::invalid_argument("unknown parameter '" + std::string(key) + "'");
  }
}

FusionParams parse_params(std::istream& in, std::string_view origin, FusionParams base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    auto eq = view.find('=');
    try {
      if (eq == std::string_view::npos) throw std::invalid_argument("expected key = value");
      set_param(base, trim(view.substr(0, eq)), trim(view.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      std::ostringstream msg;
      msg << origin << ":" << line_no << ": " << e.what();
      throw ValidationError(msg.str());
    }
  }
  try {
    base.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string(origin) + ": " + e.what());
  }
  return base;
}

FusionParams load_params(const std::filesystem::path& path, FusionParams base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_params(in, path.string(), base);
}

std::string format_params(const FusionParams& params) {
  std::ostringstream out;
  out << "alpha = " << (params.alpha ? format_double(*params.alpha) : std::string("unset")) << '\n'
      << "w = " << format_double(params.w) << '\n'
      << "beta = " << format_double(params.beta) << '\n'
      << "rrf_k = " << format_double(params.rrf_k) << '\n'
      << "top_n = " << params.top_n << '\n'
      << "top_m = " << params.top_m << '\n'
      << "damping_mode = " << to_string(params.damping) << '\n'
      << "k1 = " << format_double(params.bm25.k1) << '\n'
      << "b = " << format_double(params.bm25.b) << '\n';
  return out.str();
}

double damping(std::size_t len_q, double beta) {
  if (len_q == 0) throw std::invalid_argument("damping: query has no tokens");
  if (!(beta > 0.0)) throw std::invalid_argument("damping: beta must be positive");
  return std::exp((1.0 - static_cast<double>(len_q)) / beta);
}

HybridWeights hybrid_weights(double alpha, double zeta, DampingMode mode) {
  if (!unit_interval(alpha)) throw std::invalid_argument("alpha must lie in [0, 1]");
  if (!(zeta > 0.0 && zeta <= 1.0)) throw std::invalid_argument("zeta must lie in (0, 1]");
  const double toward_dense = mode == DampingMode::kAsWritten ? zeta : 1.0 - zeta;
  return HybridWeights{
      .dense = alpha + (1.0 - alpha) * toward_dense,
      .lexical = (1.0 - alpha) * (1.0 - toward_dense),
  };
}

double hybrid_score(double f_sbert, double f_tfidf, double alpha, double zeta, DampingMode mode) {
  const auto weights = hybrid_weights(alpha, zeta, mode);
  return weights.dense * f_sbert + weights.lexical * f_tfidf;
}

FusedResult fuse_rrf(const RankedList& a, const RankedList& b, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("fuse_rrf: k must be positive");
  if (a.query_id != b.query_id) {
    throw std::invalid_argument("fuse_rrf: lists belong to different queries ('" + a.query_id +
                                "' vs '" + b.query_id + "')");
  }
  std::unordered_map<DocIndex, FusedEntry> merged;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    auto& entry = merged[a.entries[i].doc];
    entry.doc = a.entries[i].doc;
    entry.rank_a = i + 1;
  }
  for (std::size_t i = 0; i < b.entries.size(); ++i) {
    auto& entry = merged[b.entries[i].doc];
    entry.doc = b.entries[i].doc;
    entry.rank_b = i + 1;
  }
  FusedResult out{a.query_id, a.ranker, b.ranker, {}};
  out.entries.reserve(merged.size());
  for (auto& [doc, entry] : merged) {
    double s = 0.0;
    if (entry.rank_a) s += 1.0 / (k + static_cast<double>(*entry.rank_a));
    if (entry.rank_b) s += 1.0 / (k + static_cast<double>(*entry.rank_b));
    entry.score = s;
    out.entries.push_back(entry);
  }
  std::sort(out.entries.begin(), out.entries.end(), [](const FusedEntry& x, const FusedEntry& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.doc < y.doc;
  });
  return out;
}

FusedResult as_fused(const RankedList& list) {
  FusedResult out{list.query_id, list.ranker, {}, {}};
  out.entries.reserve(list.entries.size());
  for (std::size_t i = 0; i < list.entries.size(); ++i) {
    out.entries.push_back({list.entries[i].doc, list.entries[i].score, i + 1, std::nullopt});
  }
  return out;
}

}  // namespace faqrank
