#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace faqrank {

enum class Source { kInternal, kExternal };

std::string_view to_string(Source source);
std::optional<Source> parse_source(std::string_view text);

/// One FAQ-answer pair, the retrieval unit.
struct FaqDoc {
  std::string id;
  std::string question;
  std::string answer;  // may be empty for unanswered forum posts
  std::optional<std::string> category;
  Source source = Source::kExternal;

  bool operator==(const FaqDoc&) const = default;
};

struct CorpusStats {
  std::size_t n_docs = 0;
  double avg_question_len = 0.0;
  double avg_answer_len = 0.0;
  double category_coverage = 0.0;
};

// Corpus files are JSON Lines. Each non-blank line is an object with
// "id" (string, nonempty, no whitespace), "question" (string, not blank),
// "answer" (string, may be empty), and optional "category" (string or null)
// and "source" ("internal" | "external", default "external"). Unknown keys
// are ignored.

/// Parses a corpus stream. `origin` prefixes error messages.
/// Throws ValidationError naming the offending line.
std::vector<FaqDoc> parse_corpus(std::istream& in, std::string_view origin);

/// Throws IoError when the file is unreadable.
std::vector<FaqDoc> load_corpus(const std::filesystem::path& path);

void write_corpus(std::ostream& out, std::span<const FaqDoc> docs);
void write_corpus(const std::filesystem::path& path, std::span<const FaqDoc> docs);

/// Token counts come from `tokenize`. Throws std::invalid_argument on an
/// empty corpus.
CorpusStats compute_stats(std::span<const FaqDoc> docs);

/// Checks the per-document invariants and id uniqueness.
void validate_corpus(std::span<const FaqDoc> docs);

}  // namespace faqrank
