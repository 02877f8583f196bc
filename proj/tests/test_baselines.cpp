#include <gtest/gtest.h>

#include <random>

#include <politishift/baselines.hpp>
#include <politishift/simgen.hpp>

using namespace politishift;

namespace {

double f1_against_truth(const Corpus& corpus, const GroundTruth& gt, const Classification& cl) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const bool g = gt.political(corpus[i].id), p = cl.political[i];
    tp += g && p;
    fp += !g && p;
    fn += g && !p;
  }
  return 2 * tp / (2 * tp + fp + fn);
}

GbdtConfig small_gbdt() {
  GbdtConfig g;
  g.tree_count = 60;
  g.max_depth = 3;
  g.min_samples_leaf = 30;
  g.rng_seed = 4;
  return g;
}

}  // namespace

TEST(KeywordBaseline, Examples) {
  const auto kw = politics_preset(3);
  EXPECT_EQ(keyword_classify(tokenize("Bolsonaro made Brasil worse."), kw), Label::political);
  EXPECT_EQ(keyword_classify(tokenize("good morning everyone"), kw), Label::non_political);
}

TEST(KeywordBaseline, PrecisionOneOnSynthetic) {
  SimConfig cfg;
  cfg.n_posts = 200;
  const auto sim = generate(cfg);
  const auto out = run_keyword(sim.corpus, politics_preset(3));
  for (std::size_t i = 0; i < sim.corpus.size(); ++i)
    if (out.political[i]) {
      EXPECT_TRUE(sim.truth.political(sim.corpus[i].id));
    }
}

TEST(PriorPredict, Arithmetic) {
  EXPECT_DOUBLE_EQ(prior_calibrated_predict(0.3, 0.5), 0.6);
  EXPECT_DOUBLE_EQ(prior_calibrated_predict(0.37, 1.0), 0.37);
  EXPECT_DOUBLE_EQ(prior_calibrated_predict(0.8, 0.5), 1.0);
  EXPECT_THROW(prior_calibrated_predict(0.5, 0.0), UsageError);
  EXPECT_THROW(prior_calibrated_predict(0.5, 1.5), UsageError);
}

TEST(PriorPredict, MonotoneAndRankPreserving) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int round = 0; round < 200; ++round) {
    const double c = std::max(1e-6, u(rng));
    const double a = u(rng), b = u(rng);
    const double pa = prior_calibrated_predict(a, c), pb = prior_calibrated_predict(b, c);
    if (a <= b) {
      EXPECT_LE(pa, pb);
    }
    // weak ranking kept; strict order only lost to the clamp at 1
    if (a < b && pa == pb) {
      EXPECT_EQ(pa, 1.0);
    }
    const double c2 = std::min(1.0, c + 0.1);
    EXPECT_GE(prior_calibrated_predict(a, c), prior_calibrated_predict(a, c2));
  }
}

TEST(PriorFit, LabelFrequencyEstimate) {
  const std::vector<double> ones(10, 1.0);
  EXPECT_EQ(estimate_label_frequency(ones), 1.0);
  EXPECT_DOUBLE_EQ(estimate_label_frequency(std::vector<double>{0.2, 0.4}), 0.3);
  EXPECT_EQ(estimate_label_frequency(std::vector<double>{0.0}), 1e-6);
  EXPECT_THROW(estimate_label_frequency(std::vector<double>{}), DataError);
}

TEST(PriorFit, NeedsHoldout) {
  const auto p = DenseMatrix::from_rows({{1.0}, {2.0}, {3.0}, {4.0}});
  const auto u = DenseMatrix::from_rows({{0.0}, {0.5}});
  EXPECT_THROW(prior_calibrated_fit(p, u, GbdtConfig{}, {}), DataError);
}

TEST(PriorFit, DeterministicAndRankingOnFixture) {
  SimConfig cfg;
  cfg.n_posts = 200;
  cfg.rng_seed = 3;
  const auto sim = generate(cfg);
  PriorCalibration cal;
  cal.rng_seed = 6;
  const auto a = run_prior(sim.corpus, politics_preset(3), sim.embeddings, small_gbdt(), cal);
  const auto b = run_prior(sim.corpus, politics_preset(3), sim.embeddings, small_gbdt(), cal);
  EXPECT_EQ(a.c, b.c);
  EXPECT_EQ(a.output.probability, b.output.probability);
  const auto emb = embed_corpus(sim.corpus, sim.embeddings);
  for (std::size_t i = 0; i < sim.corpus.size(); ++i) {
    for (std::size_t j = i + 1; j < std::min(sim.corpus.size(), i + 20); ++j) {
      if (a.split.is_positive[i] || a.split.is_positive[j]) continue;
      const double gi = a.model.predict(emb.vectors[i]), gj = a.model.predict(emb.vectors[j]);
      if (gi < gj) {
        EXPECT_LE(a.output.probability[i], a.output.probability[j]);
      }
    }
  }
}

TEST(NaiveBaseline, CleanUnlabeledEqualsSupervised) {
  SimConfig cfg;
  cfg.n_posts = 200;
  cfg.rng_seed = 9;
  cfg.keyword_tiers[0].coverage = 1.0;  // every political document carries a seed keyword
  const auto sim = generate(cfg);
  const auto corpus = filter_short_comments(sim.corpus);
  const auto naive = run_naive(corpus, politics_preset(3), sim.embeddings, small_gbdt());

  const auto emb = embed_corpus(corpus, sim.embeddings);
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < corpus.size(); ++i) (sim.truth.political(corpus[i].id) ? pos : neg).push_back(i);
  auto [x, y] = labeled_matrix(emb, pos, neg);
  const auto supervised = train_gbdt(x, y, small_gbdt());
  const auto sup = classify_with(supervised, emb, naive.split.is_positive);
  EXPECT_NEAR(f1_against_truth(corpus, sim.truth, naive.output), f1_against_truth(corpus, sim.truth, sup), 0.01);
}

TEST(NaiveBaseline, Deterministic) {
  SimConfig cfg;
  cfg.n_posts = 150;
  const auto sim = generate(cfg);
  const auto a = run_naive(sim.corpus, politics_preset(3), sim.embeddings, small_gbdt());
  const auto b = run_naive(sim.corpus, politics_preset(3), sim.embeddings, small_gbdt());
  EXPECT_EQ(a.output.probability, b.output.probability);
}

TEST(NaiveBaseline, BelowTwoStep) {
  SimConfig cfg;
  cfg.rng_seed = 14;
  const auto sim = generate(cfg);
  const auto corpus = filter_short_comments(sim.corpus);
  const auto kw = politics_preset(3);
  TwoStepOptions opts;
  opts.gbdt = small_gbdt();
  opts.spy.rng_seed = 5;
  const auto ts = run_two_step(corpus, kw, sim.embeddings, opts);
  const auto nv = run_naive(corpus, kw, sim.embeddings, small_gbdt());
  EXPECT_GE(f1_against_truth(corpus, sim.truth, ts.output) - f1_against_truth(corpus, sim.truth, nv.output), 0.05);
}
