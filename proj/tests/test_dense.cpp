#include "faqrank/dense.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "faqrank/error.hpp"
#include "support/brute_force.hpp"
#include "support/synthetic.hpp"

using namespace faqrank;
namespace support = faqrank::testing;

namespace {

std::vector<double> random_vec(std::mt19937& rng, std::size_t dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(dim);
  for (auto& x : v) x = g(rng);
  return v;
}

EmbeddingFile random_file(const std::vector<FaqDoc>& docs, std::size_t dim, std::uint32_t seed) {
  std::mt19937 rng(seed);
  EmbeddingFile f{dim, "test-encoder", {}};
  for (const auto& d : docs) f.records.push_back({d.id, random_vec(rng, dim)});
  return f;
}

std::string error_of(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_embedding_file(in, "emb");
  } catch (const ValidationError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST(EmbeddingFile, LoadsTenBy384) {
  auto docs = support::synthetic_corpus(10, 3);
  support::TempDir dir;
  {
    std::ofstream out(dir / "e.txt");
    write_embedding_file(out, random_file(docs, 384, 1));
  }
  auto m = load_embeddings(dir / "e.txt", docs);
  EXPECT_EQ(m.rows(), 10u);
  EXPECT_EQ(m.dim(), 384u);
  EXPECT_EQ(m.provider(), "test-encoder");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double n = 0.0;
    for (double x : m.row(i)) n += x * x;
    EXPECT_NEAR(n, 1.0, 1e-12);
  }
}

TEST(EmbeddingFile, RoundTripIsExact) {
  auto docs = support::synthetic_corpus(6, 3);
  auto f = random_file(docs, 16, 2);
  std::stringstream buf;
  write_embedding_file(buf, f);
  auto back = parse_embedding_file(buf, "buf");
  ASSERT_EQ(back.records.size(), f.records.size());
  for (std::size_t i = 0; i < f.records.size(); ++i) {
    EXPECT_EQ(back.records[i].id, f.records[i].id);
    EXPECT_EQ(back.records[i].values, f.records[i].values);
  }
}

TEST(EmbeddingFile, MissingDocIdIsNamed) {
  auto docs = support::synthetic_corpus(10, 3);
  auto f = random_file(docs, 8, 1);
  f.records.erase(f.records.begin() + 7);
  try {
    align_embeddings(f, docs);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find(docs[7].id), std::string::npos) << e.what();
  }
}

TEST(EmbeddingFile, ExtraIdsAreIgnored) {
  auto docs = support::synthetic_corpus(4, 3);
  auto f = random_file(docs, 8, 1);
  f.records.insert(f.records.begin(), {"unrelated", std::vector<double>(8, 1.0)});
  EXPECT_EQ(align_embeddings(f, docs).rows(), 4u);
}

TEST(EmbeddingFile, RejectsMalformedInput) {
  const std::string header = "#faqrank-embeddings dim=3 provider=p\n";
  EXPECT_TRUE(error_of(header + "a 1 0 0\nb 0 1 0\n").empty());
  EXPECT_FALSE(error_of("a 1 0 0\n").empty());
  EXPECT_FALSE(error_of("#faqrank-embeddings dim=0 provider=p\n").empty());
  const auto nan_msg = error_of(header + "a 1 0 0\nb nan 1 0\n");
  EXPECT_NE(nan_msg.find(":3"), std::string::npos) << nan_msg;
  EXPECT_NE(nan_msg.find("b"), std::string::npos) << nan_msg;
  EXPECT_FALSE(error_of(header + "a 1 inf 0\n").empty());
  EXPECT_FALSE(error_of(header + "a 1 0\n").empty());
  EXPECT_FALSE(error_of(header + "a 1 0 0 0\n").empty());
  EXPECT_FALSE(error_of(header + "a 1 x 0\n").empty());
  EXPECT_FALSE(error_of(header + "a 1 0 0\na 0 1 0\n").empty());
}

TEST(EmbeddingMatrix, RejectsBadRows) {
  EXPECT_THROW(EmbeddingMatrix(2, "p", {1.0, NAN}), ValidationError);
  EXPECT_THROW(EmbeddingMatrix(2, "p", {0.0, 0.0}), ValidationError);
  EXPECT_THROW(EmbeddingMatrix(2, "p", {1.0, 0.0, 1.0}), ValidationError);
  EXPECT_THROW(EmbeddingMatrix(2, "p", {3.0, 4.0}, EmbeddingMatrix::Rows::kKeepUnit),
               ValidationError);
  EmbeddingMatrix m(2, "p", {3.0, 4.0});
  EXPECT_DOUBLE_EQ(m.row(0)[0], 0.6);
  EXPECT_THROW(m.similarity(std::vector<double>{1.0, 0.0, 0.0}, 0), std::invalid_argument);
}

TEST(HashEmbed, DeterministicAndUnitLength) {
  auto a = hash_embed("FHA loan limits", 64);
  EXPECT_EQ(a, hash_embed("fha   loan, limits!", 64));
  double n = 0.0;
  for (double x : a) n += x * x;
  EXPECT_NEAR(n, 1.0, 1e-12);
  EXPECT_NE(a, hash_embed("limits loan fha", 64));
  EXPECT_THROW(hash_embed("x", 4), std::invalid_argument);
}

TEST(HashEmbed, EmptyTextIsFirstBasisVector) {
  auto e = hash_embed("", 16);
  ASSERT_EQ(e.size(), 16u);
  EXPECT_EQ(e[0], 1.0);
  for (std::size_t i = 1; i < e.size(); ++i) EXPECT_EQ(e[i], 0.0);
  EXPECT_EQ(hash_embed("?!", 16), e);
}

TEST(HashEmbed, DisjointTextsAreNearlyOrthogonal) {
  auto a = hash_embed("escrow shortage payment", 512);
  auto b = hash_embed("veteran funding fee waiver", 512);
  EXPECT_LT(std::abs(oracle::cosine(a, b)), 0.2);
}

TEST(TableEmbedder, LookupByText) {
  TableEmbedder t("enc", 2);
  t.add("hello", {1.0, 0.0});
  EXPECT_EQ(t.embed("hello"), (std::vector<double>{1.0, 0.0}));
  EXPECT_THROW(t.embed("missing"), std::out_of_range);
  EXPECT_THROW(t.add("bad", {1.0}), std::invalid_argument);
}

TEST(KnnDense, SelfQueryRanksFirst) {
  auto docs = support::synthetic_corpus(30, 8);
  auto m = embed_questions(HashEmbedder(128), docs);
  for (DocIndex d = 0; d < docs.size(); ++d) {
    auto v = std::vector<double>(m.row(d).begin(), m.row(d).end());
    auto list = knn_dense(m, v, 5);
    ASSERT_FALSE(list.entries.empty());
    // Duplicate questions tie; the tie goes to the lower doc.
    EXPECT_NEAR(list.entries[0].score, 1.0, 1e-12);
    EXPECT_LE(list.entries[0].doc, d);
    EXPECT_EQ(list.ranker, "sbert");
  }
}

TEST(KnnDense, TopNLargerThanCorpus) {
  auto docs = support::synthetic_corpus(4, 8);
  auto m = embed_questions(HashEmbedder(32), docs);
  EXPECT_EQ(knn_dense(m, hash_embed("loan", 32), 200).entries.size(), 4u);
  EXPECT_TRUE(knn_dense(m, hash_embed("loan", 32), 0).entries.empty());
}

TEST(KnnDenseProperty, MatchesBruteForce) {
  std::mt19937 rng(21);
  for (std::size_t n : {10u, 137u, 1000u}) {
    std::vector<double> values;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < n; ++i) {
      rows.push_back(random_vec(rng, 24));
      values.insert(values.end(), rows.back().begin(), rows.back().end());
    }
    EmbeddingMatrix m(24, "p", values);
    for (int trial = 0; trial < 5; ++trial) {
      auto q = random_vec(rng, 24);
      std::vector<ScoredDoc> want;
      for (std::size_t i = 0; i < n; ++i) {
        want.push_back({static_cast<DocIndex>(i), oracle::cosine(q, rows[i])});
      }
      std::sort(want.begin(), want.end(), ranks_before);
      auto got = knn_dense(m, q, 10).entries;
      ASSERT_EQ(got.size(), 10u);
      for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].doc, want[i].doc) << n << " " << i;
        EXPECT_NEAR(got[i].score, want[i].score, 1e-12);
      }
    }
  }
}
