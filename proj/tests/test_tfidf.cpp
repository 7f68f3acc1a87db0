#include "faqrank/tfidf.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "faqrank/error.hpp"
#include "faqrank/textproc.hpp"
#include "support/brute_force.hpp"
#include "support/synthetic.hpp"

using namespace faqrank;
namespace support = faqrank::testing;

namespace {

FaqDoc doc(std::string id, std::string q, std::string a) {
  return FaqDoc{std::move(id), std::move(q), std::move(a), std::nullopt, Source::kExternal};
}

}  // namespace

TEST(Vocabulary, SmoothedIdf) {
  std::vector<FaqDoc> docs = {doc("a", "fha loan", "rate"), doc("b", "fha", "loan limit")};
  auto v = Vocabulary::fit(docs);
  ASSERT_EQ(v.size(), 4u);
  // fha and loan appear in both docs; rate and limit in one.
  EXPECT_NEAR(v.idf(*v.find("fha")), 1.0, 1e-12);
  EXPECT_NEAR(v.idf(*v.find("loan")), 1.0, 1e-12);
  EXPECT_NEAR(v.idf(*v.find("rate")), std::log(3.0 / 2.0) + 1.0, 1e-12);
  EXPECT_NEAR(v.idf(*v.find("rate")), 1.405465, 1e-6);
  EXPECT_FALSE(v.find("jumbo"));
}

TEST(Vocabulary, FitErrors) {
  EXPECT_THROW(Vocabulary::fit({}), std::invalid_argument);
  std::vector<FaqDoc> blank = {doc("a", "?!", "")};
  EXPECT_THROW(Vocabulary::fit(blank), ValidationError);
}

TEST(Vocabulary, ConstructorValidates) {
  EXPECT_NO_THROW(Vocabulary({"a", "b"}, {1, 2}, 2));
  EXPECT_THROW(Vocabulary({"b", "a"}, {1, 1}, 2), ValidationError);
  EXPECT_THROW(Vocabulary({"a", "a"}, {1, 1}, 2), ValidationError);
  EXPECT_THROW(Vocabulary({"a"}, {3}, 2), ValidationError);
  EXPECT_THROW(Vocabulary({"a"}, {0}, 2), ValidationError);
  EXPECT_THROW(Vocabulary({"a", "b"}, {1}, 2), ValidationError);
}

TEST(Vectorize, UnknownTermsGiveZeroVector) {
  std::vector<FaqDoc> docs = {doc("a", "fha loan", "rate")};
  auto v = Vocabulary::fit(docs);
  auto q = vectorize(v, tokenize("jumbo arm"));
  EXPECT_TRUE(q.is_zero());
  EXPECT_EQ(cosine(q, vectorize(v, tokenize("fha"))), 0.0);
  EXPECT_EQ(cosine(q, q), 0.0);
}

TEST(Vectorize, SingleTermIsOneHot) {
  std::vector<FaqDoc> docs = {doc("a", "fha loan", "rate"), doc("b", "va", "")};
  auto v = Vocabulary::fit(docs);
  auto q = vectorize(v, tokenize("loan loan"));
  ASSERT_EQ(q.entries.size(), 1u);
  EXPECT_EQ(q.entries[0].term, *v.find("loan"));
  EXPECT_DOUBLE_EQ(q.entries[0].weight, 1.0);
}

TEST(TfidfIndex, MatchesOracleOnSmallCorpus) {
  std::vector<FaqDoc> docs = {doc("d0", "What is an FHA loan?", "An FHA loan is insured."),
                              doc("d1", "Conventional loan limits", "Limits vary by county."),
                              doc("d2", "FHA mortgage insurance", "")};
  auto index = TfidfIndex::build(docs);
  auto model = oracle::fit_tfidf(docs);
  const std::string query = "fha loan";
  auto q = index.vectorize(tokenize(query));
  auto oq = oracle::tfidf_vec(model, oracle::ascii_tokens(query));
  for (double w : {0.0, 0.3, 0.5, 0.7, 1.0}) {
    for (DocIndex d = 0; d < 3; ++d) {
      const double cq = oracle::cosine(oq, oracle::tfidf_vec(model, oracle::ascii_tokens(docs[d].question)));
      const double ca = oracle::cosine(oq, oracle::tfidf_vec(model, oracle::ascii_tokens(docs[d].answer)));
      EXPECT_NEAR(index.score(q, d, w), w * cq + (1 - w) * ca, 1e-12) << d << " " << w;
    }
  }
  // d2 has an empty answer, so at w = 0 it scores exactly 0.
  EXPECT_EQ(index.score(q, 2, 0.0), 0.0);
}

TEST(TfidfIndex, WeightEndpoints) {
  auto docs = support::synthetic_corpus(30, 4);
  auto index = TfidfIndex::build(docs);
  auto q = index.vectorize(tokenize(docs[5].question));
  for (DocIndex d = 0; d < docs.size(); ++d) {
    EXPECT_DOUBLE_EQ(index.score(q, d, 1.0), cosine(q, index.question(d)));
    EXPECT_DOUBLE_EQ(index.score(q, d, 0.0), cosine(q, index.answer(d)));
    EXPECT_NEAR(index.score(q, d, 0.7),
                0.7 * cosine(q, index.question(d)) + 0.3 * cosine(q, index.answer(d)), 1e-15);
  }
}

TEST(TfidfIndex, RejectsWeightOutsideUnitInterval) {
  auto docs = support::synthetic_corpus(5, 1);
  auto index = TfidfIndex::build(docs);
  auto q = index.vectorize(tokenize("loan"));
  EXPECT_THROW(index.score(q, 0, 1.5), std::invalid_argument);
  EXPECT_THROW(index.score(q, 0, -0.1), std::invalid_argument);
  EXPECT_THROW(index.rank(q, std::nan(""), 5), std::invalid_argument);
}

TEST(TfidfIndex, ScoreIsLinearInWeight) {
  auto docs = support::synthetic_corpus(25, 9);
  auto index = TfidfIndex::build(docs);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto q = index.vectorize(tokenize(docs[trial % docs.size()].answer + " loan"));
    const double w = u(rng);
    for (DocIndex d = 0; d < docs.size(); ++d) {
      const double s0 = index.score(q, d, 0.0), s1 = index.score(q, d, 1.0);
      EXPECT_NEAR(index.score(q, d, w), s0 + w * (s1 - s0), 1e-12);
    }
  }
}

TEST(TfidfIndexProperty, RankMatchesBruteForceOracle) {
  for (std::uint32_t seed = 1; seed <= 30; ++seed) {
    auto docs = support::synthetic_corpus(1 + seed % 20, seed);
    auto index = TfidfIndex::build(docs);
    auto model = oracle::fit_tfidf(docs);
    const std::string query = docs[seed % docs.size()].question + " escrow";
    const double w = (seed % 11) / 10.0;
    auto q = index.vectorize(tokenize(query));
    auto got = index.rank(q, w, 1000);
    EXPECT_EQ(got.ranker, "tfidf");

    oracle::PipelineSettings s;
    s.w = w;
    auto want = oracle::run_pipeline(docs, std::vector<std::vector<double>>(docs.size(), {1.0}),
                                     query, {1.0}, s)
                    .tfidf;
    ASSERT_EQ(got.entries.size(), want.size()) << seed;
    for (std::size_t i = 0; i < want.size(); ++i) {
      EXPECT_EQ(docs[got.entries[i].doc].id, want[i].id) << seed << " rank " << i;
      EXPECT_NEAR(got.entries[i].score, want[i].score, 1e-9);
      EXPECT_EQ(got.entries[i].score, index.score(q, got.entries[i].doc, w));
    }
  }
}

TEST(TfidfIndex, RankTruncatesAndExcludesZeros) {
  auto docs = support::synthetic_corpus(50, 2);
  auto index = TfidfIndex::build(docs);
  auto q = index.vectorize(tokenize("loan rate"));
  auto all = index.rank(q, 0.5, 1000);
  for (const auto& e : all.entries) EXPECT_GT(e.score, 0.0);
  auto top = index.rank(q, 0.5, 3);
  ASSERT_EQ(top.entries.size(), std::min<std::size_t>(3, all.entries.size()));
  for (std::size_t i = 0; i < top.entries.size(); ++i) EXPECT_EQ(top.entries[i], all.entries[i]);
  EXPECT_TRUE(index.rank(index.vectorize(tokenize("zzzz")), 0.5, 10).entries.empty());
}

TEST(TfidfIndex, ConstructorRejectsBadVectors) {
  std::vector<FaqDoc> docs = {doc("a", "fha loan", "rate")};
  auto built = TfidfIndex::build(docs);
  SparseVec unnormalized{{{0, 2.0}}};
  EXPECT_THROW(TfidfIndex(built.vocabulary(), {unnormalized}, {built.answer(0)}), ValidationError);
  SparseVec out_of_vocab{{{99, 1.0}}};
  EXPECT_THROW(TfidfIndex(built.vocabulary(), {out_of_vocab}, {built.answer(0)}), ValidationError);
  EXPECT_THROW(TfidfIndex(built.vocabulary(), {built.question(0)}, {}), ValidationError);
}
