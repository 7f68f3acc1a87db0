#include "faqrank/index_store.hpp"

#include <cstdio>
#include <sstream>

#include "faqrank/error.hpp"
#include "faqrank/util.hpp"

namespace faqrank {

namespace fs = std::filesystem;

namespace {

constexpr const char* kManifest = "manifest.txt";
constexpr const char* kCorpus = "corpus.jsonl";
constexpr const char* kTfidf = "tfidf.txt";
constexpr const char* kBm25 = "bm25.txt";
constexpr const char* kEmbeddings = "embeddings.txt";

class BuildLock {
 public:
  explicit BuildLock(fs::path path) : path_(std::move(path)) {
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (f == nullptr) {
      throw IoError("cannot take build lock " + path_.string() +
                    " (another build running, or a stale lock to remove)");
    }
    std::fclose(f);
  }
  ~BuildLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  BuildLock(const BuildLock&) = delete;
  BuildLock& operator=(const BuildLock&) = delete;

 private:
  fs::path path_;
};

// Line-oriented reader with positioned error messages.
class ArtifactReader {
 public:
  ArtifactReader(std::string text, std::string name) : text_(std::move(text)), name_(std::move(name)) {}

  std::vector<std::string_view> next() {
    while (pos_ < text_.size()) {
      auto end = text_.find('\n', pos_);
      if (end == std::string::npos) end = text_.size();
      std::string_view line(text_.data() + pos_, end - pos_);
      pos_ = end + 1;
      ++line_no_;
      auto fields = split_whitespace(line);
      if (!fields.empty()) return fields;
    }
    fail("unexpected end of file");
  }

  std::vector<std::string_view> expect(std::string_view keyword, std::size_t min_fields) {
    auto fields = next();
    if (fields[0] != keyword || fields.size() < min_fields) {
      fail("expected '" + std::string(keyword) + "' record");
    }
    return fields;
  }

  std::uint64_t count(std::string_view text) {
    auto v = parse_uint(text);
    if (!v) fail("bad count '" + std::string(text) + "'");
    return *v;
  }

  double real(std::string_view text) {
    auto v = parse_double(text);
    if (!v) fail("bad number '" + std::string(text) + "'");
    return *v;
  }

  std::pair<std::uint64_t, std::string_view> pair(std::string_view text) {
    auto colon = text.find(':');
    if (colon == std::string_view::npos) fail("expected a:b pair");
    return {count(text.substr(0, colon)), text.substr(colon + 1)};
  }

  void finish() {
    while (pos_ < text_.size()) {
      auto end = text_.find('\n', pos_);
      if (end == std::string::npos) end = text_.size();
      std::string_view line(text_.data() + pos_, end - pos_);
      pos_ = end + 1;
      ++line_no_;
      if (!split_whitespace(line).empty()) fail("trailing data");
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ValidationError(name_ + ":" + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::string text_;
  std::string name_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

std::string serialize_tfidf(const TfidfIndex& tfidf) {
  const auto& vocab = tfidf.vocabulary();
  std::ostringstream out;
  out << "faqrank-tfidf " << kIndexFormatVersion << '\n';
  out << "docs " << tfidf.size() << " terms " << vocab.size() << '\n';
  for (TermId t = 0; t < vocab.size(); ++t) out << "t " << vocab.term(t) << ' ' << vocab.df(t) << '\n';
  auto write_vec = [&](char tag, const SparseVec& v) {
    out << tag << ' ' << v.entries.size();
    for (const auto& e : v.entries) out << ' ' << e.term << ':' << format_double(e.weight);
    out << '\n';
  };
  for (DocIndex d = 0; d < tfidf.size(); ++d) write_vec('q', tfidf.question(d));
  for (DocIndex d = 0; d < tfidf.size(); ++d) write_vec('a', tfidf.answer(d));
  return out.str();
}

TfidfIndex parse_tfidf(std::string text, const std::string& name) {
  ArtifactReader in(std::move(text), name);
  auto header = in.expect("faqrank-tfidf", 2);
  if (in.count(header[1]) != kIndexFormatVersion) in.fail("unsupported tfidf format version");
  auto sizes = in.expect("docs", 4);
  const auto n_docs = in.count(sizes[1]);
  const auto n_terms = in.count(sizes[3]);
  std::vector<std::string> terms;
  std::vector<std::uint32_t> df;
  for (std::uint64_t i = 0; i < n_terms; ++i) {
    auto f = in.expect("t", 3);
    terms.emplace_back(f[1]);
    df.push_back(static_cast<std::uint32_t>(in.count(f[2])));
  }
  auto read_vecs = [&](std::string_view tag) {
    std::vector<SparseVec> vecs;
    vecs.reserve(n_docs);
    for (std::uint64_t d = 0; d < n_docs; ++d) {
      auto f = in.expect(tag, 2);
      const auto nnz = in.count(f[1]);
      if (f.size() != nnz + 2) in.fail("entry count mismatch");
      SparseVec v;
      for (std::size_t i = 2; i < f.size(); ++i) {
        auto [term, weight] = in.pair(f[i]);
        v.entries.push_back({static_cast<TermId>(term), in.real(weight)});
      }
      vecs.push_back(std::move(v));
    }
    return vecs;
  };
  auto questions = read_vecs("q");
  auto answers = read_vecs("a");
  in.finish();
  return TfidfIndex(Vocabulary(std::move(terms), std::move(df), n_docs), std::move(questions),
                    std::move(answers));
}

std::string serialize_bm25(const Bm25Index& bm25) {
  std::ostringstream out;
  out << "faqrank-bm25 " << kIndexFormatVersion << '\n';
  out << "docs " << bm25.n_docs() << " k1 " << format_double(bm25.params().k1) << " b "
      << format_double(bm25.params().b) << '\n';
  for (auto [field, name] : {std::pair{Field::kQuestion, "question"}, std::pair{Field::kAnswer, "answer"}}) {
    const auto& stats = bm25.field(field);
    out << "field " << name << " terms " << stats.terms.size() << '\n';
    out << "len";
    for (auto len : stats.doc_lengths) out << ' ' << len;
    out << '\n';
    for (std::size_t t = 0; t < stats.terms.size(); ++t) {
      out << "p " << stats.terms[t];
      for (const auto& p : stats.postings[t]) out << ' ' << p.doc << ':' << p.tf;
      out << '\n';
    }
  }
  return out.str();
}

Bm25Index parse_bm25(std::string text, const std::string& name) {
  ArtifactReader in(std::move(text), name);
  auto header = in.expect("faqrank-bm25", 2);
  if (in.count(header[1]) != kIndexFormatVersion) in.fail("unsupported bm25 format version");
  auto sizes = in.expect("docs", 6);
  const auto n_docs = in.count(sizes[1]);
  Bm25Params params{in.real(sizes[3]), in.real(sizes[5])};
  auto read_field = [&](std::string_view expected) {
    auto f = in.expect("field", 4);
    if (f[1] != expected) in.fail("expected field " + std::string(expected));
    const auto n_terms = in.count(f[3]);
    Bm25Index::FieldStats stats;
    auto lens = in.expect("len", 1);
    if (lens.size() != n_docs + 1) in.fail("length count mismatch");
    for (std::size_t i = 1; i < lens.size(); ++i) {
      stats.doc_lengths.push_back(static_cast<std::uint32_t>(in.count(lens[i])));
    }
    for (std::uint64_t t = 0; t < n_terms; ++t) {
      auto p = in.expect("p", 2);
      stats.terms.emplace_back(p[1]);
      std::vector<Bm25Index::Posting> list;
      for (std::size_t i = 2; i < p.size(); ++i) {
        auto [doc, tf] = in.pair(p[i]);
        list.push_back({static_cast<DocIndex>(doc), static_cast<std::uint32_t>(in.count(tf))});
      }
      stats.postings.push_back(std::move(list));
    }
    return stats;
  };
  auto question = read_field("question");
  auto answer = read_field("answer");
  in.finish();
  try {
    return Bm25Index(std::move(question), std::move(answer), params);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(name + ": " + e.what());
  }
}

std::string serialize_manifest(const IndexManifest& m) {
  std::ostringstream out;
  out << "faqrank-index " << m.format_version << '\n'
      << "engine_version " << m.engine_version << '\n'
      << "n_docs " << m.n_docs << '\n'
      << "provider " << m.provider << '\n'
      << "dim " << m.dim << '\n';
  for (const auto& [file, sum] : m.checksums) out << "checksum " << file << ' ' << sum << '\n';
  return out.str();
}

}  // namespace

void save_index(const HybridIndex& index, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create index directory " + dir.string() + ": " + ec.message());
  BuildLock lock(dir / ".lock");

  std::ostringstream corpus;
  write_corpus(corpus, index.docs());
  std::ostringstream embeddings;
  write_embedding_file(embeddings, to_embedding_file(index.dense(), index.docs()));

  const std::vector<std::pair<std::string, std::string>> artifacts = {
      {kCorpus, corpus.str()},
      {kTfidf, serialize_tfidf(index.tfidf())},
      {kBm25, serialize_bm25(index.bm25())},
      {kEmbeddings, embeddings.str()},
  };
  IndexManifest manifest;
  manifest.n_docs = index.size();
  manifest.provider = index.dense().provider();
  manifest.dim = index.dense().dim();
  for (const auto& [file, contents] : artifacts) {
    write_file(dir / file, contents);
    manifest.checksums.emplace_back(file, to_hex(fnv1a64(contents)));
  }
  write_file(dir / kManifest, serialize_manifest(manifest));
}

IndexManifest read_manifest(const fs::path& dir) {
  ArtifactReader in(read_file(dir / kManifest), (dir / kManifest).string());
  IndexManifest m;
  auto header = in.expect("faqrank-index", 2);
  m.format_version = static_cast<int>(in.count(header[1]));
  if (m.format_version != kIndexFormatVersion) {
    in.fail("index format version " + std::to_string(m.format_version) + " unsupported (engine reads " +
            std::to_string(kIndexFormatVersion) + ")");
  }
  m.engine_version = std::string(in.expect("engine_version", 2)[1]);
  if (m.engine_version != kEngineVersion) {
    in.fail("index built by engine " + m.engine_version + ", this is " + kEngineVersion);
  }
  m.n_docs = in.count(in.expect("n_docs", 2)[1]);
  m.provider = std::string(in.expect("provider", 2)[1]);
  m.dim = in.count(in.expect("dim", 2)[1]);
  for (int i = 0; i < 4; ++i) {
    auto f = in.expect("checksum", 3);
    m.checksums.emplace_back(std::string(f[1]), std::string(f[2]));
  }
  in.finish();
  return m;
}

HybridIndex open_index(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("index directory not found: " + dir.string());
  const auto manifest = read_manifest(dir);
  auto load_checked = [&](const char* file) {
    std::string contents = read_file(dir / file);
    for (const auto& [name, sum] : manifest.checksums) {
      if (name != file) continue;
      if (to_hex(fnv1a64(contents)) != sum) {
        throw ValidationError("checksum mismatch for " + (dir / file).string());
      }
      return contents;
    }
    throw ValidationError(std::string("manifest has no checksum for ") + file);
  };

  std::istringstream corpus_in(load_checked(kCorpus));
  auto docs = parse_corpus(corpus_in, (dir / kCorpus).string());
  auto tfidf = parse_tfidf(load_checked(kTfidf), (dir / kTfidf).string());
  auto bm25 = parse_bm25(load_checked(kBm25), (dir / kBm25).string());
  std::istringstream emb_in(load_checked(kEmbeddings));
  auto file = parse_embedding_file(emb_in, (dir / kEmbeddings).string());
  if (docs.size() != manifest.n_docs || file.dim != manifest.dim || file.provider != manifest.provider) {
    throw ValidationError("index artifacts disagree with manifest in " + dir.string());
  }
  if (file.records.size() != docs.size()) throw ValidationError("embedding row count mismatch");
  std::vector<double> values;
  values.reserve(docs.size() * file.dim);
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (file.records[i].id != docs[i].id) throw ValidationError("embedding rows out of doc order");
    values.insert(values.end(), file.records[i].values.begin(), file.records[i].values.end());
  }
  EmbeddingMatrix dense(file.dim, file.provider, std::move(values), EmbeddingMatrix::Rows::kKeepUnit);
  return HybridIndex(std::move(docs), std::move(tfidf), std::move(bm25), std::move(dense));
}

}  // namespace faqrank
