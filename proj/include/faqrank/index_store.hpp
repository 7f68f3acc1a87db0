#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "faqrank/hybrid_index.hpp"

namespace faqrank {

inline constexpr int kIndexFormatVersion = 1;
inline constexpr const char* kEngineVersion = "0.1.0";

// An index directory holds
//   manifest.txt     format/engine version, provider, dim, doc count, checksums
//   corpus.jsonl     the documents, sorted by id
//   tfidf.txt        vocabulary with df, then question and answer vectors
//   bm25.txt         default k1/b and per-field lengths and postings
//   embeddings.txt   question embeddings in the interchange format
// All artifacts are text and contain no timestamps, so rebuilding from the
// same inputs reproduces them byte for byte.

struct IndexManifest {
  int format_version = kIndexFormatVersion;
  std::string engine_version = kEngineVersion;
  std::size_t n_docs = 0;
  std::string provider;
  std::size_t dim = 0;
  std::vector<std::pair<std::string, std::string>> checksums;  // file -> fnv1a64 hex
};

/// Writes every artifact into `dir` (created if needed). A `.lock` file
/// guards against concurrent builds; an existing lock throws IoError.
void save_index(const HybridIndex& index, const std::filesystem::path& dir);

/// Throws ValidationError on a version mismatch, a checksum failure or any
/// malformed artifact, IoError when a file is unreadable.
HybridIndex open_index(const std::filesystem::path& dir);

IndexManifest read_manifest(const std::filesystem::path& dir);

}  // namespace faqrank
