#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "faqrank/corpus.hpp"
#include "faqrank/ranking.hpp"

namespace faqrank {

/// Turns text into a fixed-size vector. Implementations must be
/// deterministic and safe to call concurrently through a const reference.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dim() const = 0;
  virtual std::string tag() const = 0;
  virtual std::vector<double> embed(std::string_view text) const = 0;
};

inline constexpr std::string_view kHashProviderTag = "hash-v1";

/// Signed feature hashing of tokens and adjacent-token bigrams, summed then
/// unit-normalized. Text without tokens maps to e_1. Not semantic; it lets
/// the engine run without an external model. Throws std::invalid_argument
/// for dim < 8.
std::vector<double> hash_embed(std::string_view text, std::size_t dim);

class HashEmbedder final : public EmbeddingProvider {
 public:
  explicit HashEmbedder(std::size_t dim);
  std::size_t dim() const override { return dim_; }
  std::string tag() const override { return std::string(kHashProviderTag); }
  std::vector<double> embed(std::string_view text) const override { return hash_embed(text, dim_); }

 private:
  std::size_t dim_;
};

/// Serves vectors computed elsewhere (e.g. by an external sentence encoder),
/// looked up by exact text. Unknown text throws std::out_of_range.
class TableEmbedder final : public EmbeddingProvider {
 public:
  TableEmbedder(std::string tag, std::size_t dim) : tag_(std::move(tag)), dim_(dim) {}

  /// Throws std::invalid_argument on a dimension mismatch.
  void add(std::string text, std::vector<double> vec);

  std::size_t dim() const override { return dim_; }
  std::string tag() const override { return tag_; }
  std::vector<double> embed(std::string_view text) const override;

 private:
  std::string tag_;
  std::size_t dim_;
  std::unordered_map<std::string, std::vector<double>> table_;
};

// Embedding interchange file:
//   #faqrank-embeddings dim=<d> provider=<tag>
//   <id> <v1> <v2> ... <vd>
// one record per line, decimal floats separated by whitespace. Blank lines
// are skipped.

struct EmbeddingRecord {
  std::string id;
  std::vector<double> values;
};

struct EmbeddingFile {
  std::size_t dim = 0;
  std::string provider;
  std::vector<EmbeddingRecord> records;
};

/// Throws ValidationError on a bad header, a dimension mismatch, a
/// non-finite value or a duplicate id, naming the line.
EmbeddingFile parse_embedding_file(std::istream& in, std::string_view origin);
EmbeddingFile read_embedding_file(const std::filesystem::path& path);
void write_embedding_file(std::ostream& out, const EmbeddingFile& file);

/// Row-major matrix of unit-length rows, one per document.
class EmbeddingMatrix {
 public:
  enum class Rows { kNormalize, kKeepUnit };

  /// Rows are re-normalized, or with kKeepUnit checked to be unit length
  /// within 1e-6 and kept bit for bit. Throws ValidationError on non-finite
  /// values, zero rows or a size that is not a multiple of dim.
  EmbeddingMatrix(std::size_t dim, std::string provider, std::vector<double> values,
                  Rows rows = Rows::kNormalize);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t rows() const noexcept { return dim_ == 0 ? 0 : values_.size() / dim_; }
  const std::string& provider() const noexcept { return provider_; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values_).subspan(i * dim_, dim_);
  }

  /// Cosine between `query` and row `doc`, clamped to [-1, 1].
  /// Throws std::invalid_argument on a dimension mismatch.
  double similarity(std::span<const double> query, DocIndex doc) const;

 private:
  double similarity_unchecked(std::span<const double> query, double query_norm,
                              DocIndex doc) const;
  friend RankedList knn_dense(const EmbeddingMatrix&, std::span<const double>, std::size_t);

  std::size_t dim_;
  std::string provider_;
  std::vector<double> values_;
  std::vector<double> row_norms_;
};

/// Aligns records to `docs` order. Throws ValidationError naming the first
/// doc id the file does not cover. Records for unknown ids are ignored.
EmbeddingMatrix align_embeddings(const EmbeddingFile& file, std::span<const FaqDoc> docs);
EmbeddingMatrix load_embeddings(const std::filesystem::path& path, std::span<const FaqDoc> docs);

/// Embeds the question of every doc; answers never enter the dense index.
EmbeddingMatrix embed_questions(const EmbeddingProvider& provider, std::span<const FaqDoc> docs);

/// Inverse of align_embeddings for persistence.
EmbeddingFile to_embedding_file(const EmbeddingMatrix& matrix, std::span<const FaqDoc> docs);

/// Exhaustive cosine KNN: best first, ties by ascending doc.
RankedList knn_dense(const EmbeddingMatrix& matrix, std::span<const double> query,
                     std::size_t top_n);

}  // namespace faqrank
