#include "commands.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "faqrank/corpus.hpp"
#include "faqrank/dense.hpp"
#include "faqrank/error.hpp"
#include "faqrank/evalkit.hpp"
#include "faqrank/grid.hpp"
#include "faqrank/hybrid_index.hpp"
#include "faqrank/index_store.hpp"
#include "faqrank/textproc.hpp"
#include "faqrank/util.hpp"
#include "json.hpp"

namespace faqrank::cli {

namespace {

namespace fs = std::filesystem;

/// Flags shared by every command that runs the ranking pipeline. Unset
/// flags fall back to the config file, then to FusionParams defaults.
struct ParamFlags {
  std::string config;
  std::optional<double> alpha;
  std::optional<double> w;
  std::optional<double> beta;
  std::optional<double> rrf_k;
  std::optional<std::size_t> top_n;
  std::optional<std::size_t> top_m;
  std::optional<std::string> damping_mode;
  std::optional<double> k1;
  std::optional<double> b;

  void attach(CLI::App& app, bool sweep) {
    app.add_option("--config", config, "Parameter file (key = value lines)");
    if (!sweep) {
      app.add_option("--alpha", alpha, "Dense/TF-IDF mix in [0,1]; required for hybrid and rrf");
      app.add_option("--w", w, "Question/answer field weight in [0,1] (default 0.5)");
    }
    app.add_option("--beta", beta, "Damping scale (default 3)");
    app.add_option("--rrf-k", rrf_k, "Reciprocal rank fusion constant (default 60)");
    app.add_option("--top-n", top_n, "Candidates per index (default 200)");
    app.add_option("--top-m", top_m, "Results surfaced (default 50)");
    app.add_option("--damping-mode", damping_mode, "as_written (default) or prose_intent");
    app.add_option("--k1", k1, "BM25 k1 (default 1.2)");
    app.add_option("--b", b, "BM25 b (default 0.75)");
  }

  FusionParams resolve() const {
    FusionParams params = config.empty() ? FusionParams{} : load_params(config);
    if (alpha) params.alpha = *alpha;
    if (w) params.w = *w;
    if (beta) params.beta = *beta;
    if (rrf_k) params.rrf_k = *rrf_k;
    if (top_n) params.top_n = *top_n;
    if (top_m) params.top_m = *top_m;
    if (damping_mode) set_param(params, "damping_mode", *damping_mode);
    if (k1) params.bm25.k1 = *k1;
    if (b) params.bm25.b = *b;
    params.validate();
    return params;
  }
};

std::vector<std::size_t> parse_cutoffs(const std::string& text) {
  std::vector<std::size_t> cutoffs;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto k = parse_uint(trim(item));
    if (!k || *k == 0) throw std::invalid_argument("bad cutoff '" + item + "'");
    cutoffs.push_back(static_cast<std::size_t>(*k));
  }
  if (cutoffs.empty()) throw std::invalid_argument("no cutoffs given");
  return cutoffs;
}

std::vector<RankerMode> parse_modes(const std::string& text) {
  std::vector<RankerMode> modes;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto mode = parse_ranker_mode(trim(item));
    if (!mode) throw std::invalid_argument("unknown mode '" + item + "'");
    modes.push_back(*mode);
  }
  return modes;
}

/// The hashed embedder when the index was built with it; otherwise vectors
/// come from a query-embedding file keyed by query id.
std::unique_ptr<EmbeddingProvider> make_provider(const HybridIndex& index,
                                                 std::span<const Query> queries,
                                                 const std::string& query_embeddings) {
  const auto& dense = index.dense();
  if (dense.provider() == kHashProviderTag && query_embeddings.empty()) {
    return std::make_unique<HashEmbedder>(dense.dim());
  }
  auto table = std::make_unique<TableEmbedder>(dense.provider(), dense.dim());
  if (query_embeddings.empty()) return table;
  auto file = read_embedding_file(query_embeddings);
  if (file.provider != dense.provider() || file.dim != dense.dim()) {
    throw ValidationError("query embeddings (" + file.provider + ", dim " + std::to_string(file.dim) +
                          ") do not match the index (" + dense.provider() + ", dim " +
                          std::to_string(dense.dim()) + ")");
  }
  for (auto& record : file.records) {
    for (const auto& q : queries) {
      if (q.id == record.id) table->add(q.text, record.values);
    }
  }
  return table;
}

std::string snippet(std::string_view text, std::size_t max_bytes) {
  if (text.size() <= max_bytes) return std::string(text);
  std::size_t cut = max_bytes;
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
  return std::string(text.substr(0, cut)) + "...";
}

void print_human(std::ostream& out, const HybridIndex& index, const Query& query,
                 const FusedResult& result, RankerMode mode, const FusionParams& params) {
  const auto tokens = tokenize(query.text);
  out << "query " << query.id << ": " << query.text << "\n";
  out << "  mode=" << to_string(mode) << " tokens=" << tokens.len();
  if (mode == RankerMode::kHybrid || mode == RankerMode::kRrf) {
    out << " zeta=" << format_fixed(damping(tokens.len(), params.beta), 6)
        << " alpha=" << format_double(*params.alpha) << " damping=" << to_string(params.damping);
  }
  if (mode != RankerMode::kSbert) out << " w=" << format_double(params.w);
  if (mode == RankerMode::kRrf) out << " rrf_k=" << format_double(params.rrf_k);
  out << "\n";
  if (result.entries.empty()) {
    out << "  (no results)\n";
    return;
  }
  for (std::size_t i = 0; i < result.entries.size(); ++i) {
    const auto& e = result.entries[i];
    std::string provenance;
    auto add = [&](const std::string& ranker, const std::optional<std::size_t>& rank) {
      if (ranker.empty()) return;
      if (!provenance.empty()) provenance += ' ';
      provenance += ranker + "=" + (rank ? std::to_string(*rank) : std::string("-"));
    };
    add(result.ranker_a, e.rank_a);
    add(result.ranker_b, e.rank_b);
    const auto& doc = index.doc(e.doc);
    out << "  " << std::setw(3) << (i + 1) << "  " << std::left << std::setw(14) << doc.id
        << std::right << "  " << format_fixed(e.score, 6) << "  " << std::left << std::setw(20)
        << provenance << std::right << "  " << snippet(doc.question, 70) << "\n";
  }
}

// ---------------------------------------------------------------- commands

struct IndexCmd {
  std::string corpus;
  std::string embeddings;
  std::size_t hash_dim = 0;
  std::string out_dir;
  double k1 = 1.2;
  double b = 0.75;

  int operator()(std::ostream& out) const {
    if (embeddings.empty() == (hash_dim == 0)) {
      throw std::invalid_argument("give exactly one of --embeddings or --hash-dim");
    }
    auto docs = load_corpus(corpus);
    const Bm25Params bm25{k1, b};
    auto index = embeddings.empty()
                     ? HybridIndex::build(std::move(docs), HashEmbedder(hash_dim), bm25)
                     : HybridIndex::build(std::move(docs), read_embedding_file(embeddings), bm25);
    save_index(index, out_dir);
    out << "indexed " << index.size() << " documents into " << out_dir << " (provider "
        << index.dense().provider() << ", dim " << index.dense().dim() << ", vocabulary "
        << index.tfidf().vocabulary().size() << ")\n";
    return kOk;
  }
};

struct QueryCmd {
  std::string index_dir;
  std::string text;
  std::string queries_path;
  std::string query_embeddings;
  std::string mode_name = "rrf";
  std::string format = "human";
  std::string output;
  unsigned threads = 1;
  ParamFlags flags;

  int operator()(std::istream& in, std::ostream& out, std::ostream& err) const {
    const auto params = flags.resolve();
    const auto mode = parse_ranker_mode(mode_name);
    if (!mode) throw std::invalid_argument("unknown mode '" + mode_name + "'");
    if (format != "human" && format != "run") throw std::invalid_argument("format must be human or run");
    if (!text.empty() && !queries_path.empty()) {
      throw std::invalid_argument("give a query text or --queries, not both");
    }
    const auto index = open_index(index_dir);

    std::ofstream file_out;
    std::ostream* sink = &out;
    if (!output.empty()) {
      file_out.open(output, std::ios::binary | std::ios::trunc);
      if (!file_out) throw IoError("cannot create " + output);
      sink = &file_out;
    }

    if (!text.empty() || !queries_path.empty()) {
      std::vector<Query> queries =
          queries_path.empty() ? std::vector<Query>{{"q1", text}} : load_queries(queries_path);
      auto provider = make_provider(index, queries, query_embeddings);
      auto results = retrieve_batch(index, queries, params, *mode, *provider, threads);
      emit(*sink, index, queries, results, *mode, params);
      return kOk;
    }

    // REPL: one query per line until end of input.
    std::string line;
    std::size_t n = 0;
    err << "faqrank> " << std::flush;
    while (std::getline(in, line)) {
      Query q{"q" + std::to_string(++n), line};
      try {
        std::vector<Query> one{q};
        auto provider = make_provider(index, one, query_embeddings);
        auto result = retrieve(index, q, params, *mode, *provider);
        emit(*sink, index, one, std::vector<FusedResult>{result}, *mode, params);
      } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
      }
      err << "faqrank> " << std::flush;
    }
    err << "\n";
    return kOk;
  }

  void emit(std::ostream& out, const HybridIndex& index, std::span<const Query> queries,
            std::span<const FusedResult> results, RankerMode mode, const FusionParams& params) const {
    if (format == "run") {
      write_run(out, make_run(results, index.docs(), to_string(mode)));
      return;
    }
    for (std::size_t i = 0; i < queries.size(); ++i) {
      print_human(out, index, queries[i], results[i], mode, params);
    }
  }
};

struct EvalCmd {
  std::string run_path;
  std::string qrels_path;
  std::string cutoffs = "5,10";
  std::string gain = "linear";
  std::string json_path;
  bool per_query = false;

  int operator()(std::ostream& out) const {
    MetricOptions options;
    options.cutoffs = parse_cutoffs(cutoffs);
    if (gain == "exponential") {
      options.gain = GainMode::kExponential;
    } else if (gain != "linear") {
      throw std::invalid_argument("gain must be linear or exponential");
    }
    const auto qrels = load_qrels(qrels_path);
    const auto run = load_run(run_path);
    const auto report = evaluate(run, qrels, options);

    auto line = [&](const std::string& name, const std::string& query, double value) {
      out << std::left << std::setw(22) << name << std::right << '\t' << query << '\t'
          << format_fixed(value, 4) << '\n';
    };
    if (per_query) {
      for (const auto& [query, values] : report.per_query) {
        for (std::size_t i = 0; i < values.size(); ++i) line(report.names[i], query, values[i]);
      }
    }
    out << std::left << std::setw(22) << "num_q" << std::right << "\tall\t"
        << report.per_query.size() << '\n';
    for (std::size_t i = 0; i < report.names.size(); ++i) line(report.names[i], "all", report.mean[i]);

    if (!json_path.empty()) {
      nlohmann::ordered_json doc;
      doc["num_q"] = report.per_query.size();
      for (std::size_t i = 0; i < report.names.size(); ++i) doc["mean"][report.names[i]] = report.mean[i];
      for (const auto& [query, values] : report.per_query) {
        for (std::size_t i = 0; i < values.size(); ++i) doc["per_query"][query][report.names[i]] = values[i];
      }
      write_file(json_path, doc.dump(2) + "\n");
    }
    return kOk;
  }
};

struct GridCmd {
  std::string index_dir;
  std::string queries_path;
  std::string qrels_path;
  std::string query_embeddings;
  std::string target = "P_5";
  std::string modes = "tfidf,bm25,hybrid,rrf";
  std::string cutoffs = "5,10";
  std::string output;
  unsigned threads = 1;
  ParamFlags flags;

  int operator()(std::ostream& out) const {
    const auto params = flags.resolve();
    GridOptions options;
    options.modes = parse_modes(modes);
    options.target = target;
    options.metrics.cutoffs = parse_cutoffs(cutoffs);
    options.threads = threads;
    const auto index = open_index(index_dir);
    const auto queries = load_queries(queries_path);
    const auto qrels = load_qrels(qrels_path);
    auto provider = make_provider(index, queries, query_embeddings);
    const auto report = grid_search(index, queries, qrels, params, options, *provider);

    std::ostringstream table;
    write_grid_report(table, report);
    write_file(output, table.str());
    out << "wrote " << report.cells.size() << " cells to " << output << "\n";
    for (auto mode : options.modes) {
      const auto& best = report.best(mode);
      out << "argmax mode=" << to_string(mode) << " alpha=" << format_fixed(best.alpha, 1)
          << " w=" << format_fixed(best.w, 1) << " " << target << "="
          << format_fixed(best.report.value(target), 6) << "\n";
    }
    return kOk;
  }
};

struct StatsCmd {
  std::string corpus;
  std::string qrels_path;

  int operator()(std::ostream& out) const {
    const auto docs = load_corpus(corpus);
    const auto stats = compute_stats(docs);
    out << "documents\t" << stats.n_docs << "\n"
        << "avg_question_len\t" << format_fixed(stats.avg_question_len, 2) << "\n"
        << "avg_answer_len\t" << format_fixed(stats.avg_answer_len, 2) << "\n"
        << "category_coverage\t" << format_fixed(stats.category_coverage, 4) << "\n";
    if (!qrels_path.empty()) {
      const auto q = compute_qrels_stats(load_qrels(qrels_path));
      out << "queries\t" << q.n_queries << "\n"
          << "avg_judged_per_query\t" << format_fixed(q.avg_judged, 2) << "\n"
          << "avg_relevant_per_query\t" << format_fixed(q.avg_relevant, 2) << "\n"
          << "avg_partially_relevant_per_query\t" << format_fixed(q.avg_partially_relevant, 2) << "\n"
          << "avg_non_relevant_per_query\t" << format_fixed(q.avg_non_relevant, 2) << "\n";
    }
    return kOk;
  }
};

struct EmbedCmd {
  std::string corpus;
  std::size_t dim = 256;
  std::string out_path;

  int operator()(std::ostream& out) const {
    const auto docs = load_corpus(corpus);
    const auto matrix = embed_questions(HashEmbedder(dim), docs);
    std::ostringstream buf;
    write_embedding_file(buf, to_embedding_file(matrix, docs));
    write_file(out_path, buf.str());
    out << "wrote " << docs.size() << " hashed question embeddings (dim " << dim << ") to "
        << out_path << "\n";
    return kOk;
  }
};

}  // namespace

int run(std::span<const std::string> args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"hybrid lexical/semantic FAQ retrieval and evaluation", "faqrank"};
  app.require_subcommand(1);

  IndexCmd index_cmd;
  auto* index = app.add_subcommand("index", "Build an index directory from a corpus");
  index->add_option("--corpus", index_cmd.corpus, "Corpus file (JSON Lines)")->required();
  index->add_option("--embeddings", index_cmd.embeddings, "Question embedding file");
  index->add_option("--hash-dim", index_cmd.hash_dim, "Use the hashed fallback embedder at this dim");
  index->add_option("--out", index_cmd.out_dir, "Output index directory")->required();
  index->add_option("--k1", index_cmd.k1, "BM25 k1 stored as the index default");
  index->add_option("--b", index_cmd.b, "BM25 b stored as the index default");

  QueryCmd query_cmd;
  auto* query = app.add_subcommand("query", "Search an index (one-shot, batch or REPL)");
  query->add_option("--index", query_cmd.index_dir, "Index directory")->envname("FAQRANK_INDEX")->required();
  query->add_option("text", query_cmd.text, "Query text; omit for a REPL on stdin");
  query->add_option("--queries", query_cmd.queries_path, "Batch file of <id><TAB><text> lines");
  query->add_option("--query-embeddings", query_cmd.query_embeddings, "Query vectors keyed by query id");
  query->add_option("--mode", query_cmd.mode_name, "tfidf | bm25 | sbert | hybrid | rrf (default rrf)");
  query->add_option("--format", query_cmd.format, "human (default) or run");
  query->add_option("--output", query_cmd.output, "Write results here instead of stdout");
  query->add_option("--threads", query_cmd.threads, "Query worker threads (default 1)");
  query_cmd.flags.attach(*query, false);

  EvalCmd eval_cmd;
  auto* eval = app.add_subcommand("eval", "Score a run file against qrels");
  eval->add_option("--run", eval_cmd.run_path, "Run file")->required();
  eval->add_option("--qrels", eval_cmd.qrels_path, "Qrels file")->required();
  eval->add_option("--cutoffs", eval_cmd.cutoffs, "Comma-separated cutoffs (default 5,10)");
  eval->add_option("--gain", eval_cmd.gain, "nDCG gain: linear (default) or exponential");
  eval->add_option("--json", eval_cmd.json_path, "Also write the report as JSON");
  eval->add_flag("--per-query", eval_cmd.per_query, "Print per-query values");

  GridCmd grid_cmd;
  auto* grid = app.add_subcommand("gridsearch", "Sweep alpha and w over 0..1 in steps of 0.1");
  grid->add_option("--index", grid_cmd.index_dir, "Index directory")->envname("FAQRANK_INDEX")->required();
  grid->add_option("--queries", grid_cmd.queries_path, "Queries file")->required();
  grid->add_option("--qrels", grid_cmd.qrels_path, "Qrels file")->required();
  grid->add_option("--query-embeddings", grid_cmd.query_embeddings, "Query vectors keyed by query id");
  grid->add_option("--target", grid_cmd.target, "Metric to maximize (default P_5)");
  grid->add_option("--modes", grid_cmd.modes, "Modes to sweep (default tfidf,bm25,hybrid,rrf)");
  grid->add_option("--cutoffs", grid_cmd.cutoffs, "Comma-separated cutoffs (default 5,10)");
  grid->add_option("--output", grid_cmd.output, "Report file")->required();
  grid->add_option("--threads", grid_cmd.threads, "Worker threads (default 1)");
  grid_cmd.flags.attach(*grid, true);

  StatsCmd stats_cmd;
  auto* stats = app.add_subcommand("stats", "Corpus and judgment statistics");
  stats->add_option("--corpus", stats_cmd.corpus, "Corpus file")->required();
  stats->add_option("--qrels", stats_cmd.qrels_path, "Optional qrels file");

  EmbedCmd embed_cmd;
  auto* embed = app.add_subcommand("embed", "Write hashed fallback question embeddings");
  embed->add_option("--corpus", embed_cmd.corpus, "Corpus file")->required();
  embed->add_option("--dim", embed_cmd.dim, "Vector dimension (default 256)");
  embed->add_option("--out", embed_cmd.out_path, "Output embedding file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*index) return index_cmd(out);
    if (*query) return query_cmd(in, out, err);
    if (*eval) return eval_cmd(out);
    if (*grid) return grid_cmd(out);
    if (*stats) return stats_cmd(out);
    if (*embed) return embed_cmd(out);
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kIo;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kUsage;
}

}  // namespace faqrank::cli
