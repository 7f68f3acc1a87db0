#include "faqrank/dense.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "faqrank/error.hpp"
#include "faqrank/textproc.hpp"
#include "faqrank/util.hpp"

namespace faqrank {

namespace {

constexpr std::string_view kHeaderMagic = "#faqrank-embeddings";
constexpr std::uint64_t kHashSeed = 0x9e3779b97f4a7c15ULL;

double l2_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

void add_feature(std::vector<double>& v, std::string_view key) {
  const std::uint64_t h = fnv1a64(key, kHashSeed);
  const std::size_t slot = static_cast<std::size_t>(h % v.size());
  v[slot] += (h >> 63) != 0 ? -1.0 : 1.0;
}

std::string line_error(std::string_view origin, std::size_t line_no, std::string_view what) {
  std::ostringstream msg;
  msg << origin << ":" << line_no << ": " << what;
  return msg.str();
}

}  // namespace

std::vector<double> hash_embed(std::string_view text, std::size_t dim) {
  if (dim < 8) throw std::invalid_argument("hash_embed: dim must be at least 8");
  std::vector<double> v(dim, 0.0);
  const auto tokens = tokenize(text).tokens;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    add_feature(v, tokens[i]);
    if (i + 1 < tokens.size()) add_feature(v, tokens[i] + ' ' + tokens[i + 1]);
  }
  const double n = l2_norm(v);
  if (n == 0.0) {
    std::fill(v.begin(), v.end(), 0.0);
    v[0] = 1.0;
    return v;
  }
  for (double& x : v) x /= n;
  return v;
}

HashEmbedder::HashEmbedder(std::size_t dim) : dim_(dim) {
  if (dim < 8) throw std::invalid_argument("HashEmbedder: dim must be at least 8");
}

void TableEmbedder::add(std::string text, std::vector<double> vec) {
  if (vec.size() != dim_) throw std::invalid_argument("TableEmbedder: dimension mismatch");
  table_.insert_or_assign(std::move(text), std::move(vec));
}

std::vector<double> TableEmbedder::embed(std::string_view text) const {
  auto it = table_.find(std::string(text));
  if (it == table_.end()) {
    throw std::out_of_range("no precomputed embedding for query \"" + std::string(text) + "\"");
  }
  return it->second;
}

EmbeddingFile parse_embedding_file(std::istream& in, std::string_view origin) {
  EmbeddingFile file;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (!have_header) {
      if (fields[0] != kHeaderMagic) {
        throw ValidationError(line_error(origin, line_no, "missing #faqrank-embeddings header"));
      }
      for (std::size_t i = 1; i < fields.size(); ++i) {
        auto eq = fields[i].find('=');
        if (eq == std::string_view::npos) {
          throw ValidationError(line_error(origin, line_no, "malformed header field"));
        }
        auto key = fields[i].substr(0, eq);
        auto value = fields[i].substr(eq + 1);
        if (key == "dim") {
          auto dim = parse_uint(value);
          if (!dim || *dim == 0) throw ValidationError(line_error(origin, line_no, "bad dim"));
          file.dim = static_cast<std::size_t>(*dim);
        } else if (key == "provider") {
          file.provider = std::string(value);
        }
      }
      if (file.dim == 0) throw ValidationError(line_error(origin, line_no, "header lacks dim"));
      if (file.provider.empty()) {
        throw ValidationError(line_error(origin, line_no, "header lacks provider"));
      }
      have_header = true;
      continue;
    }
    EmbeddingRecord record;
    record.id = std::string(fields[0]);
    if (fields.size() - 1 != file.dim) {
      throw ValidationError(line_error(
          origin, line_no,
          "row '" + record.id + "' has " + std::to_string(fields.size() - 1) +
              " values, expected dim " + std::to_string(file.dim)));
    }
    record.values.reserve(file.dim);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      auto value = parse_double(fields[i]);
      if (!value) {
        throw ValidationError(line_error(origin, line_no, "row '" + record.id + "': bad number"));
      }
      if (!std::isfinite(*value)) {
        throw ValidationError(
            line_error(origin, line_no, "row '" + record.id + "': non-finite value"));
      }
      record.values.push_back(*value);
    }
    if (!seen.insert(record.id).second) {
      throw ValidationError(line_error(origin, line_no, "duplicate id '" + record.id + "'"));
    }
    file.records.push_back(std::move(record));
  }
  if (!have_header) throw ValidationError(std::string(origin) + ": empty embedding file");
  return file;
}

EmbeddingFile read_embedding_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embeddings " + path.string());
  return parse_embedding_file(in, path.string());
}

void write_embedding_file(std::ostream& out, const EmbeddingFile& file) {
  out << kHeaderMagic << " dim=" << file.dim << " provider=" << file.provider << '\n';
  for (const auto& record : file.records) {
    out << record.id;
    for (double v : record.values) out << ' ' << format_double(v);
    out << '\n';
  }
}

EmbeddingMatrix::EmbeddingMatrix(std::size_t dim, std::string provider, std::vector<double> values,
                                 Rows mode)
    : dim_(dim), provider_(std::move(provider)), values_(std::move(values)) {
  if (dim_ == 0) throw ValidationError("embedding matrix: dim must be positive");
  if (values_.size() % dim_ != 0) throw ValidationError("embedding matrix: ragged rows");
  row_norms_.reserve(rows());
  for (std::size_t r = 0; r < rows(); ++r) {
    auto slice = std::span<double>(values_).subspan(r * dim_, dim_);
    for (double x : slice) {
      if (!std::isfinite(x)) {
        throw ValidationError("embedding matrix: non-finite value in row " + std::to_string(r));
      }
    }
    const double n = l2_norm(slice);
    if (n == 0.0) throw ValidationError("embedding matrix: zero row " + std::to_string(r));
    if (mode == Rows::kKeepUnit) {
      if (std::abs(n - 1.0) > 1e-6) {
        throw ValidationError("embedding matrix: row " + std::to_string(r) + " is not unit length");
      }
    } else {
      for (double& x : slice) x /= n;
    }
    row_norms_.push_back(l2_norm(slice));
  }
}

double EmbeddingMatrix::similarity(std::span<const double> query, DocIndex doc) const {
  if (query.size() != dim_) throw std::invalid_argument("dense: query dimension mismatch");
  if (doc >= rows()) throw std::out_of_range("dense: unknown doc index");
  return similarity_unchecked(query, l2_norm(query), doc);
}

double EmbeddingMatrix::similarity_unchecked(std::span<const double> query, double query_norm,
                                             DocIndex doc) const {
  if (query_norm == 0.0) return 0.0;
  auto r = row(doc);
  double d = 0.0;
  for (std::size_t i = 0; i < dim_; ++i) d += r[i] * query[i];
  return std::clamp(d / (row_norms_[doc] * query_norm), -1.0, 1.0);
}

EmbeddingMatrix align_embeddings(const EmbeddingFile& file, std::span<const FaqDoc> docs) {
  std::unordered_map<std::string_view, const EmbeddingRecord*> by_id;
  for (const auto& record : file.records) by_id.emplace(record.id, &record);
  std::vector<double> values;
  values.reserve(docs.size() * file.dim);
  for (const auto& doc : docs) {
    auto it = by_id.find(doc.id);
    if (it == by_id.end()) {
      throw ValidationError("embeddings missing doc id '" + doc.id + "'");
    }
    if (it->second->values.size() != file.dim) {
      throw ValidationError("embeddings: dim mismatch for '" + doc.id + "'");
    }
    values.insert(values.end(), it->second->values.begin(), it->second->values.end());
  }
  try {
    return EmbeddingMatrix(file.dim, file.provider, std::move(values));
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("embeddings: ") + e.what());
  }
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path, std::span<const FaqDoc> docs) {
  return align_embeddings(read_embedding_file(path), docs);
}

EmbeddingMatrix embed_questions(const EmbeddingProvider& provider, std::span<const FaqDoc> docs) {
  std::vector<double> values;
  values.reserve(docs.size() * provider.dim());
  for (const auto& doc : docs) {
    auto v = provider.embed(doc.question);
    if (v.size() != provider.dim()) {
      throw ValidationError("provider returned wrong dimension for '" + doc.id + "'");
    }
    values.insert(values.end(), v.begin(), v.end());
  }
  return EmbeddingMatrix(provider.dim(), provider.tag(), std::move(values));
}

EmbeddingFile to_embedding_file(const EmbeddingMatrix& matrix, std::span<const FaqDoc> docs) {
  if (docs.size() != matrix.rows()) throw std::invalid_argument("to_embedding_file: row count");
  EmbeddingFile file{matrix.dim(), matrix.provider(), {}};
  file.records.reserve(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) {
    auto r = matrix.row(i);
    file.records.push_back({docs[i].id, std::vector<double>(r.begin(), r.end())});
  }
  return file;
}

RankedList knn_dense(const EmbeddingMatrix& matrix, std::span<const double> query,
                     std::size_t top_n) {
  if (query.size() != matrix.dim()) throw std::invalid_argument("knn_dense: dimension mismatch");
  RankedList out;
  out.ranker = "sbert";
  const double query_norm = l2_norm(query);
  std::vector<ScoredDoc> all;
  all.reserve(matrix.rows());
  for (std::size_t d = 0; d < matrix.rows(); ++d) {
    const auto doc = static_cast<DocIndex>(d);
    all.push_back({doc, matrix.similarity_unchecked(query, query_norm, doc)});
  }
  out.entries = select_top(std::move(all), top_n);
  return out;
}

}  // namespace faqrank
