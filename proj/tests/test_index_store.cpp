#include "faqrank/index_store.hpp"

#include <gtest/gtest.h>

#include <fstream>

#include "faqrank/error.hpp"
#include "faqrank/util.hpp"
#include "support/synthetic.hpp"

using namespace faqrank;
namespace support = faqrank::testing;
namespace fs = std::filesystem;

namespace {

HybridIndex sample_index(std::uint32_t seed = 6) {
  return HybridIndex::build(support::synthetic_corpus(60, seed), HashEmbedder(48), {1.4, 0.6});
}

std::vector<Query> sample_queries(const HybridIndex& index) {
  std::vector<Query> qs;
  for (std::size_t i = 0; i < index.size(); i += 5) {
    qs.push_back({"q" + std::to_string(i), index.doc(i).question + " rate"});
  }
  return qs;
}

}  // namespace

TEST(IndexStore, SaveAndOpenServeIdenticalResults) {
  support::TempDir dir;
  auto index = sample_index();
  save_index(index, dir / "idx");
  auto reopened = open_index(dir / "idx");

  ASSERT_EQ(reopened.size(), index.size());
  EXPECT_TRUE(std::equal(index.docs().begin(), index.docs().end(), reopened.docs().begin()));
  EXPECT_EQ(reopened.bm25().params().k1, 1.4);
  EXPECT_EQ(reopened.bm25().params().b, 0.6);
  EXPECT_EQ(reopened.dense().provider(), "hash-v1");

  FusionParams p;
  p.alpha = 0.35;
  p.w = 0.6;
  HashEmbedder provider(48);
  const auto queries = sample_queries(index);
  for (auto mode : {RankerMode::kTfidf, RankerMode::kBm25, RankerMode::kSbert,
                    RankerMode::kHybrid, RankerMode::kRrf}) {
    EXPECT_EQ(retrieve_batch(reopened, queries, p, mode, provider),
              retrieve_batch(index, queries, p, mode, provider))
        << to_string(mode);
  }
}

TEST(IndexStore, ManifestContents) {
  support::TempDir dir;
  save_index(sample_index(), dir / "idx");
  auto m = read_manifest(dir / "idx");
  EXPECT_EQ(m.format_version, kIndexFormatVersion);
  EXPECT_EQ(m.engine_version, kEngineVersion);
  EXPECT_EQ(m.n_docs, 60u);
  EXPECT_EQ(m.dim, 48u);
  EXPECT_EQ(m.provider, "hash-v1");
  EXPECT_EQ(m.checksums.size(), 4u);
  EXPECT_FALSE(fs::exists(dir / "idx" / ".lock"));
}

TEST(IndexStore, RebuildIsByteIdentical) {
  support::TempDir dir;
  save_index(sample_index(), dir / "a");
  save_index(sample_index(), dir / "b");
  save_index(open_index(dir / "a"), dir / "c");
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    const auto name = entry.path().filename();
    EXPECT_EQ(read_file(entry.path()), read_file(dir / "b" / name)) << name;
    EXPECT_EQ(read_file(entry.path()), read_file(dir / "c" / name)) << name;
  }
}

TEST(IndexStore, CorruptedArtifactIsRejected) {
  support::TempDir dir;
  save_index(sample_index(), dir / "idx");
  auto text = read_file(dir / "idx" / "bm25.txt");
  text[text.size() / 2] = text[text.size() / 2] == '1' ? '2' : '1';
  write_file(dir / "idx" / "bm25.txt", text);
  try {
    open_index(dir / "idx");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("bm25.txt"), std::string::npos) << e.what();
  }
}

TEST(IndexStore, VersionMismatchIsRejected) {
  support::TempDir dir;
  save_index(sample_index(), dir / "idx");
  auto text = read_file(dir / "idx" / "manifest.txt");
  const auto pos = text.find(kEngineVersion);
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, std::string(kEngineVersion).size(), "9.9.9");
  write_file(dir / "idx" / "manifest.txt", text);
  EXPECT_THROW(open_index(dir / "idx"), ValidationError);
}

TEST(IndexStore, MissingDirectoryIsIoError) {
  EXPECT_THROW(open_index("/nonexistent/index"), IoError);
}

TEST(IndexStore, LockFileBlocksConcurrentBuild) {
  support::TempDir dir;
  fs::create_directories(dir / "idx");
  write_file(dir / "idx" / ".lock", "");
  EXPECT_THROW(save_index(sample_index(), dir / "idx"), IoError);
  fs::remove(dir / "idx" / ".lock");
  EXPECT_NO_THROW(save_index(sample_index(), dir / "idx"));
}

TEST(IndexStore, ExternalEmbeddingsSurviveReload) {
  support::TempDir dir;
  auto docs = support::synthetic_corpus(12, 2);
  EmbeddingFile file{5, "encoder-x", {}};
  for (std::size_t i = 0; i < docs.size(); ++i) {
    file.records.push_back({docs[i].id, {1.0 / 3.0, 0.1 * static_cast<double>(i), -0.7, 1e-17, 2.0}});
  }
  auto index = HybridIndex::build(docs, file);
  save_index(index, dir / "idx");
  auto reopened = open_index(dir / "idx");
  EXPECT_EQ(reopened.dense().provider(), "encoder-x");
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto a = index.dense().row(i), b = reopened.dense().row(i);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
}
