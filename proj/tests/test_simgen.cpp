#include <gtest/gtest.h>

#include <sstream>

#include <politishift/seed.hpp>
#include <politishift/simgen.hpp>

using namespace politishift;

namespace {

std::string dump(const SimOutput& out) {
  std::ostringstream s;
  write_records(s, out.corpus);
  write_ground_truth_csv(s, out.corpus, out.truth);
  return s.str();
}

}  // namespace

TEST(Simgen, ByteIdenticalForSeed) {
  SimConfig cfg;
  cfg.n_posts = 200;
  EXPECT_EQ(dump(generate(cfg)), dump(generate(cfg)));
  auto other = cfg;
  other.rng_seed = 8;
  EXPECT_NE(dump(generate(cfg)), dump(generate(other)));
}

TEST(Simgen, TruthCoversEveryDocument) {
  SimConfig cfg;
  cfg.n_posts = 150;
  const auto out = generate(cfg);
  EXPECT_EQ(out.truth.truth.size(), out.corpus.size());
  for (const auto& d : out.corpus.documents()) {
    EXPECT_TRUE(out.truth.truth.count(d.id));
    EXPECT_GE(d.timestamp, cfg.start_time);
  }
}

TEST(Simgen, KeywordsOnlyInPoliticalDocsAndCoverageMatches) {
  SimConfig cfg;
  cfg.n_posts = 1500;
  const auto out = generate(cfg);
  const auto kw = make_keyword_set("t", std::vector<std::string>{"#eleicoes2022", "lula", "bolsonaro"});
  std::size_t pol = 0, hit = 0;
  for (std::size_t i = 0; i < out.corpus.size(); ++i) {
    const bool m = match_keywords(out.corpus.tokens(i), kw);
    if (out.truth.political(out.corpus[i].id)) {
      ++pol;
      hit += m;
    } else {
      EXPECT_FALSE(m) << out.corpus[i].id;
    }
  }
  EXPECT_EQ(pol, out.truth.political_docs);
  EXPECT_EQ(hit, out.truth.political_docs_with_keyword);
  EXPECT_NEAR(static_cast<double>(hit) / static_cast<double>(pol), 0.40, 0.02);
}

TEST(Simgen, TieredCoverageIsCumulative) {
  SimConfig cfg;
  cfg.n_posts = 1500;
  cfg.keyword_tiers = election_tiers();
  const auto out = generate(cfg);
  const auto& kws = election_keywords();
  const double pol = static_cast<double>(out.truth.political_docs);
  const std::vector<std::size_t> preset{3, 6, 11};
  const std::vector<double> want{0.40, 0.60, 0.80};
  for (std::size_t p = 0; p < preset.size(); ++p) {
    const auto kw = make_keyword_set("t", std::vector<std::string>{kws.begin(), kws.begin() + static_cast<std::ptrdiff_t>(preset[p])});
    std::size_t hit = 0;
    for (std::size_t i = 0; i < out.corpus.size(); ++i)
      hit += out.truth.political(out.corpus[i].id) && match_keywords(out.corpus.tokens(i), kw);
    EXPECT_NEAR(static_cast<double>(hit) / pol, want[p], 0.025) << preset[p];
  }
}

TEST(Simgen, TopicRatesConverge) {
  SimConfig cfg;
  cfg.n_posts = 4000;
  const auto out = generate(cfg);
  for (const auto& t : cfg.topics) {
    const auto [political, total] = out.truth.topic_comments.at(t.name);
    ASSERT_GT(total, 1000u);
    EXPECT_NEAR(static_cast<double>(political) / static_cast<double>(total), t.political_shift_rate, 0.03) << t.name;
  }
}

TEST(Simgen, EngagementKeepsTopicRate) {
  SimConfig cfg;
  cfg.n_posts = 4000;
  cfg.political_engagement = 0.4;
  const auto out = generate(cfg);
  const auto [political, total] = out.truth.topic_comments.at("economy");
  EXPECT_NEAR(static_cast<double>(political) / static_cast<double>(total), 0.30, 0.04);
}

TEST(Simgen, NoPoliticalPosts) {
  SimConfig cfg;
  cfg.n_posts = 300;
  cfg.political_post_rate = 0.0;
  const auto out = generate(cfg);
  for (const auto& d : out.corpus.documents())
    if (d.is_post()) {
      EXPECT_FALSE(out.truth.political(d.id));
    }
}

TEST(Simgen, CommentsFollowPosts) {
  SimConfig cfg;
  cfg.n_posts = 100;
  const auto out = generate(cfg);
  const auto threads = build_threads(out.corpus);
  EXPECT_TRUE(threads.orphans.empty());
  for (const auto& t : threads.threads)
    for (const auto* c : t.comments) EXPECT_GE(c->timestamp, t.post->timestamp);
}

TEST(Simgen, EmbeddingsCoverVocabulary) {
  SimConfig cfg;
  cfg.n_posts = 50;
  auto out = generate(cfg);
  EXPECT_EQ(out.embeddings.dimension(), cfg.embedding_dim);
  EXPECT_TRUE((out.embeddings.find("lula") != nullptr));
  cfg.embed_keywords = false;
  out = generate(cfg);
  EXPECT_FALSE((out.embeddings.find("lula") != nullptr));
}

TEST(Simgen, ValidatesConfig) {
  SimConfig cfg;
  cfg.political_post_rate = 1.5;
  EXPECT_THROW(generate(cfg), UsageError);
  cfg = SimConfig{};
  cfg.keyword_tiers = {{{"a"}, 0.7}, {{"b"}, 0.5}};
  EXPECT_THROW(generate(cfg), UsageError);
  cfg = SimConfig{};
  cfg.keyword_bias = 1.0;
  EXPECT_THROW(generate(cfg), UsageError);
}
