#pragma once

// Two-step positive-unlabeled learning.
//
// Step 1 hides a fraction of the keyword positives ("spies") among the
// unlabeled documents, trains Naive Bayes on P\S versus U+S, and takes the
// spy posterior order statistic as a threshold t: unlabeled documents scoring
// strictly below t become reliable negatives N.
// Step 2 trains boosted trees on embedding features of P versus N and scores
// every document.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "common.hpp"
#include "corpus.hpp"
#include "gbdt.hpp"
#include "naive_bayes.hpp"
#include "seed.hpp"
#include "textfeat.hpp"

namespace politishift {

struct SpyConfig {
  double spy_fraction = 0.10;
  double noise_level = 0.15;
  std::uint64_t rng_seed = 0;
};

struct SpySample {
  std::vector<std::size_t> rest;   // P \ S, in input order
  std::vector<std::size_t> spies;  // S, in input order
};

// |S| = round-half-up(s * |P|), drawn uniformly without replacement.
inline SpySample sample_spies(const std::vector<std::size_t>& positives, const SpyConfig& cfg) {
  if (!(cfg.spy_fraction > 0.0 && cfg.spy_fraction < 1.0)) throw UsageError("spy fraction must be in (0,1)");
  if (positives.size() < 2) throw DataError("sample_spies: need at least 2 positive documents");
  const auto k = static_cast<std::size_t>(std::floor(cfg.spy_fraction * static_cast<double>(positives.size()) + 0.5));
  if (k < 1) throw DataError("sample_spies: spy fraction selects no spy from " + std::to_string(positives.size()) + " positives");
  if (k >= positives.size()) throw DataError("sample_spies: spies would exhaust the positive set");
  Rng rng(mix_seed(cfg.rng_seed, 0x5b1e5));
  std::vector<char> is_spy(positives.size(), 0);
  for (auto pos : sample_without_replacement(rng, positives.size(), k)) is_spy[pos] = 1;
  SpySample out;
  for (std::size_t i = 0; i < positives.size(); ++i) (is_spy[i] ? out.spies : out.rest).push_back(positives[i]);
  return out;
}

// ceil(l * k) with a small tolerance so products like 0.15 * 20 do not round
// up past an exact integer.
inline std::size_t noise_rank(double noise_level, std::size_t k) {
  const double raw = noise_level * static_cast<double>(k);
  const double r = std::ceil(raw - 1e-9 * std::max(1.0, raw));
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::max(0.0, r)));
}

// t = p(max(1, ceil(l*k))) over the ascending spy posteriors; l = 0 gives the
// minimum.
inline double estimate_spy_threshold(std::vector<double> spy_posteriors, double noise_level) {
  if (spy_posteriors.empty()) throw DataError("estimate_spy_threshold: no spy posteriors");
  if (!(noise_level >= 0.0 && noise_level < 1.0)) throw UsageError("noise level must be in [0,1)");
  std::sort(spy_posteriors.begin(), spy_posteriors.end());
  const auto rank = std::min(noise_rank(noise_level, spy_posteriors.size()), spy_posteriors.size());
  return spy_posteriors[rank - 1];
}

struct ReliableNegatives {
  std::vector<std::size_t> negatives;  // posterior < t
  std::vector<std::size_t> residual;   // the rest of U
};

// `posterior` is indexed by corpus position.
inline ReliableNegatives extract_reliable_negatives(const std::vector<std::size_t>& unlabeled,
                                                    const std::vector<double>& posterior, double threshold) {
  ReliableNegatives out;
  for (auto u : unlabeled) (posterior[u] < threshold ? out.negatives : out.residual).push_back(u);
  if (out.negatives.empty()) warn("extract_reliable_negatives: no unlabeled document falls below the spy threshold");
  return out;
}

enum class NbFeatures { counts, tfidf_weights };

struct SpyResult {
  std::vector<std::size_t> spies;
  double threshold = 0.0;
  std::vector<std::size_t> reliable_negatives;
  std::vector<std::size_t> residual_unlabeled;
  std::vector<double> spy_posteriors;  // in spy order
};

// ---------------------------------------------------------------------------
// document features
// ---------------------------------------------------------------------------

struct CorpusEmbeddings {
  std::vector<DenseVector> vectors;  // per corpus position
  std::size_t featureless = 0;
};

inline CorpusEmbeddings embed_corpus(const Corpus& corpus, const EmbeddingTable& table) {
  CorpusEmbeddings out;
  out.vectors.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    auto e = embed_doc(corpus.tokens(i), table);
    out.featureless += e.featureless ? 1 : 0;
    out.vectors.push_back(std::move(e.vector));
  }
  if (out.featureless) info(std::to_string(out.featureless) + " document(s) have no in-table token");
  return out;
}

inline DenseMatrix gather_rows(const CorpusEmbeddings& emb, const std::vector<std::size_t>& idx) {
  if (idx.empty()) return {};
  DenseMatrix m(idx.size(), emb.vectors[idx[0]].size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto& v = emb.vectors[idx[r]];
    for (std::size_t c = 0; c < v.size(); ++c) m(r, c) = v[c];
  }
  return m;
}

// Stacks positives (label 1) above negatives (label 0).
inline std::pair<DenseMatrix, std::vector<int>> labeled_matrix(const CorpusEmbeddings& emb,
                                                               const std::vector<std::size_t>& pos,
                                                               const std::vector<std::size_t>& neg) {
  std::vector<std::size_t> idx(pos);
  idx.insert(idx.end(), neg.begin(), neg.end());
  std::vector<int> y(pos.size(), 1);
  y.resize(idx.size(), 0);
  return {gather_rows(emb, idx), std::move(y)};
}

// ---------------------------------------------------------------------------
// hyper-parameter search
// ---------------------------------------------------------------------------

struct GbdtSearchSpace {
  std::pair<std::size_t, std::size_t> tree_count{50, 300};
  std::pair<std::size_t, std::size_t> max_depth{2, 8};
  std::pair<double, double> learning_rate{0.03, 0.3};
  std::pair<double, double> row_subsample{0.5, 1.0};
  std::pair<double, double> column_subsample{0.5, 1.0};
  std::pair<std::size_t, std::size_t> min_samples_leaf{1, 30};
};

struct SearchResult {
  GbdtConfig best;
  double best_f1 = 0.0;
  std::vector<GbdtConfig> trials;
  std::vector<double> f1;
};

inline double binary_f1(const std::vector<int>& gold, const std::vector<int>& pred) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    tp += gold[i] && pred[i];
    fp += !gold[i] && pred[i];
    fn += gold[i] && !pred[i];
  }
  return tp == 0 ? 0.0 : 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

// Samples `trials` configs uniformly from `space`, trains each on a random
// (1 - validation_fraction) share of the rows and keeps the best validation
// F1; ties go to the earlier trial. `base` supplies seed and threads.
inline SearchResult random_search(const DenseMatrix& x, const std::vector<int>& y, const GbdtSearchSpace& space,
                                  std::size_t trials, double validation_fraction, std::uint64_t seed,
                                  GbdtConfig base = {}) {
  if (trials < 1) throw UsageError("random_search: trials must be >= 1");
  Rng rng(mix_seed(seed, 0x5ea4c));
  const std::size_t n = x.rows();
  const auto n_val = static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(n)));
  if (n_val == 0 || n_val >= n) throw DataError("random_search: empty validation or training split");
  auto order = sample_without_replacement(rng, n, n);
  std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<long>(n_val));
  std::vector<std::size_t> fit(order.begin() + static_cast<long>(n_val), order.end());
  std::sort(val.begin(), val.end());
  std::sort(fit.begin(), fit.end());
  auto subset = [&](const std::vector<std::size_t>& rows) {
    DenseMatrix m(rows.size(), x.cols());
    std::vector<int> labels(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < x.cols(); ++c) m(r, c) = x(rows[r], c);
      labels[r] = y[rows[r]];
    }
    return std::pair{std::move(m), std::move(labels)};
  };
  auto [x_fit, y_fit] = subset(fit);
  auto [x_val, y_val] = subset(val);

  auto uni_int = [&](std::pair<std::size_t, std::size_t> r) {
    return r.first + uniform_index(rng, r.second - r.first + 1);
  };
  auto uni_real = [&](std::pair<double, double> r) { return r.first + (r.second - r.first) * uniform01(rng); };

  SearchResult out;
  out.best_f1 = -1.0;
  for (std::size_t t = 0; t < trials; ++t) {
    GbdtConfig cfg = base;
    cfg.tree_count = uni_int(space.tree_count);
    cfg.max_depth = uni_int(space.max_depth);
    cfg.learning_rate = uni_real(space.learning_rate);
    cfg.row_subsample = uni_real(space.row_subsample);
    cfg.column_subsample = uni_real(space.column_subsample);
    cfg.min_samples_leaf = uni_int(space.min_samples_leaf);
    const auto model = train_gbdt(x_fit, y_fit, cfg);
    std::vector<int> pred(x_val.rows());
    for (std::size_t r = 0; r < x_val.rows(); ++r) pred[r] = model.predict(x_val.row(r)) >= 0.5 ? 1 : 0;
    const double f1 = binary_f1(y_val, pred);
    out.trials.push_back(cfg);
    out.f1.push_back(f1);
    if (f1 > out.best_f1) {
      out.best_f1 = f1;
      out.best = cfg;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// the two-step pipeline
// ---------------------------------------------------------------------------

struct TwoStepOptions {
  SpyConfig spy;
  double nb_alpha = 1.0;
  NbFeatures nb_features = NbFeatures::counts;
  TfidfOptions tfidf;
  GbdtConfig gbdt;
  double decision_threshold = 0.5;
  std::size_t search_trials = 0;  // 0 keeps `gbdt` as given
  GbdtSearchSpace search_space;
  double search_validation_fraction = 0.2;
  // Drop the seed keywords from the step-1 vocabulary so spies are scored on
  // the same evidence as hidden positives, which carry no keyword.
  bool mask_seed_keywords = true;
};

// Per-document output of any classifier in this library, by corpus position.
struct Classification {
  std::vector<double> probability;
  std::vector<char> political;
};

struct TwoStepResult {
  Classification output;
  PuSplit split;
  SpyResult step1;
  TfidfModel tfidf;
  NaiveBayesModel nb;
  GbdtModel gbdt;
  std::size_t featureless = 0;
  std::size_t search_trials = 0;
};

// Scores every document; keyword positives are fixed at probability 1.
inline Classification classify_with(const GbdtModel& model, const CorpusEmbeddings& emb,
                                    const std::vector<char>& is_positive, double decision_threshold = 0.5) {
  Classification out;
  out.probability.resize(emb.vectors.size());
  out.political.resize(emb.vectors.size());
  for (std::size_t i = 0; i < emb.vectors.size(); ++i) {
    out.probability[i] = is_positive[i] ? 1.0 : model.predict(emb.vectors[i]);
    out.political[i] = out.probability[i] >= decision_threshold ? 1 : 0;
  }
  return out;
}

inline TwoStepResult run_two_step(const Corpus& corpus, const KeywordSet& kw, const EmbeddingTable& table,
                                  const TwoStepOptions& opts) {
  TwoStepResult res;
  res.split = split_pu(corpus, kw);
  if (res.split.unlabeled.empty()) throw DataError("two-step: unlabeled set is empty; nothing to learn");
  const auto spies = sample_spies(res.split.positive, opts.spy);

  std::vector<TokenList> docs;
  docs.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    docs.push_back(corpus.tokens(i));
    if (opts.mask_seed_keywords)
      std::erase_if(docs.back(), [&](const std::string& t) { return kw.contains(t); });
  }
  res.tfidf = fit_tfidf(docs, opts.tfidf);

  auto features = [&](std::size_t i) {
    return opts.nb_features == NbFeatures::counts ? res.tfidf.counts(corpus.tokens(i))
                                                  : res.tfidf.transform(corpus.tokens(i));
  };
  std::vector<SparseVector> pos, mixed;
  for (auto i : spies.rest) pos.push_back(features(i));
  for (auto i : res.split.unlabeled) mixed.push_back(features(i));
  for (auto i : spies.spies) mixed.push_back(features(i));
  res.nb = train_nb(pos, mixed, res.tfidf.dimension(), opts.nb_alpha);

  std::vector<double> posterior(corpus.size(), 0.0);
  for (auto i : res.split.unlabeled) posterior[i] = res.nb.posterior(features(i));
  res.step1.spies = spies.spies;
  for (auto i : spies.spies) {
    posterior[i] = res.nb.posterior(features(i));
    res.step1.spy_posteriors.push_back(posterior[i]);
  }
  res.step1.threshold = estimate_spy_threshold(res.step1.spy_posteriors, opts.spy.noise_level);
  auto rn = extract_reliable_negatives(res.split.unlabeled, posterior, res.step1.threshold);
  res.step1.reliable_negatives = std::move(rn.negatives);
  res.step1.residual_unlabeled = std::move(rn.residual);
  if (res.step1.reliable_negatives.empty()) {
    const auto [lo, hi] = std::minmax_element(res.step1.spy_posteriors.begin(), res.step1.spy_posteriors.end());
    throw PipelineError("step 1 found no reliable negatives: threshold t=" + fmt_real(res.step1.threshold, 9) +
                        ", spies=" + std::to_string(res.step1.spies.size()) + ", spy posterior range [" +
                        fmt_real(*lo, 9) + ", " + fmt_real(*hi, 9) + "]");
  }

  const auto emb = embed_corpus(corpus, table);
  res.featureless = emb.featureless;
  auto [x, y] = labeled_matrix(emb, res.split.positive, res.step1.reliable_negatives);
  GbdtConfig cfg = opts.gbdt;
  if (opts.search_trials > 0) {
    cfg = random_search(x, y, opts.search_space, opts.search_trials, opts.search_validation_fraction,
                        mix_seed(opts.gbdt.rng_seed, 0x5eed), opts.gbdt)
              .best;
    res.search_trials = opts.search_trials;
  }
  res.gbdt = train_gbdt(x, y, cfg);
  res.output = classify_with(res.gbdt, emb, res.split.is_positive, opts.decision_threshold);
  return res;
}

}  // namespace politishift
