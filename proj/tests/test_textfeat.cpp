#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <politishift/textfeat.hpp>

using namespace politishift;

TEST(Tokenize, SampleSentence) {
  EXPECT_EQ(tokenize("Bolsonaro made Brasil worse."), (TokenList{"bolsonaro", "made", "brasil", "worse"}));
}

TEST(Tokenize, HashtagFolding) {
  EXPECT_EQ(tokenize("#Eleições2022 já!"), (TokenList{"#eleicoes2022", "ja"}));
}

TEST(Tokenize, Empty) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize("  ,.;!? ").empty());
}

TEST(Tokenize, MentionsAndBarePrefixes) {
  EXPECT_EQ(tokenize("@Lula # @ oi"), (TokenList{"@lula", "oi"}));
  EXPECT_EQ(tokenize("a#b"), (TokenList{"a", "#b"}));
}

TEST(Tokenize, DiacriticsAndDigraphs) {
  EXPECT_EQ(tokenize("eleição"), (TokenList{"eleicao"}));
  EXPECT_EQ(tokenize("ÁÉÍÓÚ ÇÑ Ü"), (TokenList{"aeiou", "cn", "u"}));
  EXPECT_EQ(tokenize("Straße Æther"), (TokenList{"strasse", "aether"}));
  // decomposed: e + combining acute
  EXPECT_EQ(tokenize("e\xCC\x81xito"), (TokenList{"exito"}));
}

TEST(Tokenize, SymbolsSeparate) {
  EXPECT_EQ(tokenize("1x1 2022-10-30 👍top"), (TokenList{"1x1", "2022", "10", "30", "top"}));
}

TEST(Tokenize, InvariantNoEmptyTokens) {
  for (const char* s : {"##", "@@a", "\xff\xfe", "a\xe2\x80\x94" "b", "!!!#"}) {
    for (const auto& t : tokenize(s)) {
      EXPECT_FALSE(t.empty());
      EXPECT_NE(t, "#");
      EXPECT_NE(t, "@");
    }
  }
}

TEST(Tfidf, IdfFormula) {
  const auto m = fit_tfidf({{"a", "b"}, {"a"}}, {1});
  EXPECT_DOUBLE_EQ(m.idf("a"), 1.0);
  EXPECT_DOUBLE_EQ(m.idf("b"), std::log(3.0 / 2.0) + 1.0);
  EXPECT_EQ(m.document_count(), 2u);
}

TEST(Tfidf, SingleToken) {
  const auto m = fit_tfidf({{"a"}, {"a"}});
  ASSERT_EQ(m.dimension(), 1u);
  EXPECT_EQ(m.vocabulary().terms()[0], "a");
}

TEST(Tfidf, MinDfCanEmptyVocabulary) {
  const auto m = fit_tfidf({{"a"}, {"b"}}, {2});
  EXPECT_EQ(m.dimension(), 0u);
  EXPECT_TRUE(m.transform({"a"}).empty());
}

TEST(Tfidf, TransformOneHot) {
  const auto m = fit_tfidf({{"a"}, {"a"}}, {1});
  const auto v = m.transform({"a", "a"});
  ASSERT_EQ(v.nnz(), 1u);
  EXPECT_DOUBLE_EQ(v.values[0], 1.0);
}

TEST(Tfidf, TransformOov) {
  const auto m = fit_tfidf({{"a"}, {"a"}}, {1});
  const auto v = m.transform({"zzz", "yyy"});
  EXPECT_TRUE(v.empty());
  EXPECT_EQ(v.dimension, 1u);
}

TEST(Tfidf, TransformWeightedPair) {
  auto vocab = std::make_shared<Vocabulary>(std::vector<std::string>{"a", "b"});
  TfidfModel m(vocab, {1.0, 2.0}, 4, 1);
  const auto v = m.transform({"a", "b"});
  ASSERT_EQ(v.nnz(), 2u);
  EXPECT_NEAR(v.values[0], 1.0 / std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(v.values[1], 2.0 / std::sqrt(5.0), 1e-15);
}

TEST(Tfidf, UnitNormAndSortedIndices) {
  std::vector<TokenList> docs = {{"x", "y", "z"}, {"x", "x", "w"}, {"y", "w", "q"}, {"z", "q", "q"}};
  const auto m = fit_tfidf(docs, {1});
  for (const auto& d : docs) {
    const auto v = m.transform(d);
    EXPECT_NEAR(v.norm(), 1.0, 1e-12);
    for (std::size_t k = 1; k < v.nnz(); ++k) EXPECT_LT(v.indices[k - 1], v.indices[k]);
    for (auto i : v.indices) EXPECT_LT(i, v.dimension);
  }
  for (double idf : m.idf()) EXPECT_GE(idf, 1.0);
}

TEST(Tfidf, SaveLoadRoundTrip) {
  const auto m = fit_tfidf({{"a", "b"}, {"a", "c"}, {"b"}}, {1});
  std::stringstream ss;
  m.save(ss);
  const auto r = TfidfModel::load(ss);
  EXPECT_EQ(r.vocabulary().terms(), m.vocabulary().terms());
  EXPECT_EQ(r.idf(), m.idf());
  EXPECT_EQ(r.document_count(), m.document_count());
}

TEST(Embeddings, MinimalTable) {
  std::istringstream in("a 1 0\nb 0 1");
  const auto t = load_embeddings(in);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.dimension(), 2u);
}

TEST(Embeddings, RaggedRowsRejected) {
  std::istringstream in("a 1\nb 0 1");
  EXPECT_THROW(load_embeddings(in), DataError);
}

TEST(Embeddings, HeaderConsumed) {
  std::istringstream in("2 2\na 1 0\nb 0 1");
  const auto t = load_embeddings(in);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.dimension(), 2u);
  EXPECT_EQ(t.find("2"), nullptr);
}

TEST(Embeddings, NumericTokenRowIsNotHeader) {
  // only a two-field first row can be a header
  std::istringstream in("7 1 0\na 1 0");
  const auto t = load_embeddings(in);
  EXPECT_EQ(t.size(), 2u);
  EXPECT_NE(t.find("7"), nullptr);
}

TEST(Embeddings, TokensNormalized) {
  std::istringstream in("Eleição 1 2\n");
  const auto t = load_embeddings(in);
  EXPECT_NE(t.find("eleicao"), nullptr);
}

TEST(Embeddings, SaveLoadBitExact) {
  EmbeddingTable t(3);
  t.set("a", {0.1, 1.0 / 3.0, -2e-300});
  t.set("b", {1e17, -0.0, 5.0});
  std::stringstream ss;
  t.save(ss);
  const auto r = load_embeddings(ss);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(*r.find("a"), *t.find("a"));
  EXPECT_EQ(*r.find("b"), *t.find("b"));
}

TEST(EmbedDoc, MeanOfBasis) {
  std::istringstream in("a 1 0\nb 0 1");
  const auto t = load_embeddings(in);
  auto e = embed_doc({"a", "b"}, t);
  EXPECT_EQ(e.vector, (DenseVector{0.5, 0.5}));
  EXPECT_FALSE(e.featureless);
  e = embed_doc({"a", "a"}, t);
  EXPECT_EQ(e.vector, (DenseVector{1.0, 0.0}));
  e = embed_doc({"q", "r"}, t);
  EXPECT_EQ(e.vector, (DenseVector{0.0, 0.0}));
  EXPECT_TRUE(e.featureless);
}
