#include "faqrank/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "faqrank/error.hpp"
#include "faqrank/textproc.hpp"
#include "faqrank/util.hpp"
#include "json.hpp"

namespace faqrank {

using nlohmann::json;

std::string_view to_string(Source source) {
  return source == Source::kInternal ? "internal" : "external";
}

std::optional<Source> parse_source(std::string_view text) {
  if (text == "internal") return Source::kInternal;
  if (text == "external") return Source::kExternal;
  return std::nullopt;
}

namespace {

bool has_whitespace(std::string_view s) {
  return s.find_first_of(" \t\r\n\f\v") != std::string_view::npos;
}

std::string doc_problem(const FaqDoc& doc) {
  if (doc.id.empty()) return "empty id";
  if (has_whitespace(doc.id)) return "id '" + doc.id + "' contains whitespace";
  if (trim(doc.question).empty()) return "blank question for id '" + doc.id + "'";
  return {};
}

std::string required_string(const json& record, const char* key) {
  auto it = record.find(key);
  if (it == record.end()) {
    throw std::invalid_argument(std::string("missing required field \"") + key + "\"");
  }
  if (!it->is_string()) {
    throw std::invalid_argument(std::string("field \"") + key + "\" must be a string");
  }
  return it->get<std::string>();
}

FaqDoc parse_record(std::string_view line) {
  json record = json::parse(line);
  if (!record.is_object()) throw std::invalid_argument("record is not a JSON object");
  FaqDoc doc;
  doc.id = required_string(record, "id");
  doc.question = required_string(record, "question");
  doc.answer = required_string(record, "answer");
  if (auto it = record.find("category"); it != record.end() && !it->is_null()) {
    if (!it->is_string()) throw std::invalid_argument("field \"category\" must be a string");
    doc.category = it->get<std::string>();
  }
  if (auto it = record.find("source"); it != record.end() && !it->is_null()) {
    if (!it->is_string()) throw std::invalid_argument("field \"source\" must be a string");
    auto source = parse_source(it->get<std::string>());
    if (!source) {
      throw std::invalid_argument("unknown source \"" + it->get<std::string>() + "\"");
    }
    doc.source = *source;
  }
  if (auto problem = doc_problem(doc); !problem.empty()) {
    throw std::invalid_argument(problem);
  }
  return doc;
}

}  // namespace

std::vector<FaqDoc> parse_corpus(std::istream& in, std::string_view origin) {
  std::vector<FaqDoc> docs;
  std::unordered_map<std::string, std::size_t> first_line;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    FaqDoc doc;
    try {
      doc = parse_record(line);
    } catch (const std::exception& e) {
      std::ostringstream msg;
      msg << origin << ":" << line_no << ": " << e.what();
      throw ValidationError(msg.str());
    }
    auto [it, inserted] = first_line.emplace(doc.id, line_no);
    if (!inserted) {
      std::ostringstream msg;
      msg << origin << ":" << line_no << ": duplicate id '" << doc.id
          << "' (first seen on line " << it->second << ")";
      throw ValidationError(msg.str());
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<FaqDoc> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open corpus " + path.string());
  return parse_corpus(in, path.string());
}

void write_corpus(std::ostream& out, std::span<const FaqDoc> docs) {
  for (const auto& doc : docs) {
    nlohmann::ordered_json record;
    record["id"] = doc.id;
    record["question"] = doc.question;
    record["answer"] = doc.answer;
    if (doc.category) record["category"] = *doc.category;
    record["source"] = to_string(doc.source);
    out << record.dump() << '\n';
  }
}

void write_corpus(const std::filesystem::path& path, std::span<const FaqDoc> docs) {
  std::ostringstream buf;
  write_corpus(buf, docs);
  write_file(path, buf.str());
}

void validate_corpus(std::span<const FaqDoc> docs) {
  std::unordered_map<std::string_view, std::size_t> seen;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (auto problem = doc_problem(docs[i]); !problem.empty()) {
      throw ValidationError("document " + std::to_string(i) + ": " + problem);
    }
    if (!seen.emplace(docs[i].id, i).second) {
      throw ValidationError("duplicate id '" + docs[i].id + "'");
    }
  }
}

CorpusStats compute_stats(std::span<const FaqDoc> docs) {
  if (docs.empty()) throw std::invalid_argument("compute_stats: empty corpus");
  std::size_t question_tokens = 0;
  std::size_t answer_tokens = 0;
  std::size_t with_category = 0;
  for (const auto& doc : docs) {
    question_tokens += tokenize(doc.question).len();
    answer_tokens += tokenize(doc.answer).len();
    if (doc.category) ++with_category;
  }
  const auto n = static_cast<double>(docs.size());
  return CorpusStats{
      .n_docs = docs.size(),
      .avg_question_len = static_cast<double>(question_tokens) / n,
      .avg_answer_len = static_cast<double>(answer_tokens) / n,
      .category_coverage = static_cast<double>(with_category) / n,
  };
}

}  // namespace faqrank
