#pragma once

// Comparison models: keyword match, unlabeled-as-negative boosting, and
// class-prior calibrated boosting.

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "common.hpp"
#include "gbdt.hpp"
#include "pulearn.hpp"
#include "seed.hpp"

namespace politishift {

enum class Label { non_political = 0, political = 1 };

inline Label keyword_classify(const TokenList& doc, const KeywordSet& kw) {
  return match_keywords(doc, kw) ? Label::political : Label::non_political;
}

inline Classification run_keyword(const Corpus& corpus, const KeywordSet& kw) {
  Classification out;
  out.probability.resize(corpus.size());
  out.political.resize(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    out.political[i] = keyword_classify(corpus.tokens(i), kw) == Label::political ? 1 : 0;
    out.probability[i] = out.political[i] ? 1.0 : 0.0;
  }
  return out;
}

// Boosted trees with every unlabeled row treated as negative.
inline GbdtModel naive_negative_train(const DenseMatrix& positives, const DenseMatrix& unlabeled,
                                      const GbdtConfig& cfg) {
  if (positives.rows() == 0 || unlabeled.rows() == 0) throw DataError("naive baseline: both sets must be nonempty");
  if (positives.cols() != unlabeled.cols()) throw DataError("naive baseline: feature dimension mismatch");
  DenseMatrix x(positives.rows() + unlabeled.rows(), positives.cols());
  std::vector<int> y(x.rows(), 0);
  for (std::size_t r = 0; r < positives.rows(); ++r) {
    for (std::size_t c = 0; c < x.cols(); ++c) x(r, c) = positives(r, c);
    y[r] = 1;
  }
  for (std::size_t r = 0; r < unlabeled.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) x(positives.rows() + r, c) = unlabeled(r, c);
  return train_gbdt(x, y, cfg);
}

struct PriorCalibration {
  double holdout_fraction = 0.2;
  std::uint64_t rng_seed = 0;
};

struct CalibratedModel {
  GbdtModel g;
  double c = 1.0;  // estimated P(labeled | positive)
  std::size_t holdout = 0;
};

// Mean of g over held-out positives, clamped to [1e-6, 1].
inline double estimate_label_frequency(std::span<const double> g_on_holdout) {
  if (g_on_holdout.empty()) throw DataError("prior baseline: holdout is empty");
  double sum = 0.0;
  for (double v : g_on_holdout) sum += v;
  return std::clamp(sum / static_cast<double>(g_on_holdout.size()), 1e-6, 1.0);
}

// Holds out a share of P (and the same share of U, so the labeled/unlabeled
// mix seen in training matches the full data), fits g on the rest, and sets
// c to the mean of g over the held-out positives, clamped to [1e-6, 1].
inline CalibratedModel prior_calibrated_fit(const DenseMatrix& positives, const DenseMatrix& unlabeled,
                                            const GbdtConfig& cfg, const PriorCalibration& cal) {
  if (positives.rows() < 5) throw DataError("prior baseline: need at least 5 positives for a holdout");
  if (!(cal.holdout_fraction > 0.0 && cal.holdout_fraction < 1.0))
    throw UsageError("prior baseline: holdout fraction must be in (0,1)");
  Rng rng(mix_seed(cal.rng_seed, 0xca11b));
  auto split = [&](std::size_t n) {
    const auto k = static_cast<std::size_t>(std::llround(cal.holdout_fraction * static_cast<double>(n)));
    std::vector<char> held(n, 0);
    for (auto i : sample_without_replacement(rng, n, k)) held[i] = 1;
    return held;
  };
  const auto held_p = split(positives.rows());
  const auto held_u = split(unlabeled.rows());
  const auto n_hold = static_cast<std::size_t>(std::count(held_p.begin(), held_p.end(), 1));
  if (n_hold == 0) throw DataError("prior baseline: holdout is empty");
  if (n_hold == positives.rows()) throw DataError("prior baseline: holdout leaves no positives for fitting");

  auto keep = [](const DenseMatrix& m, const std::vector<char>& held, bool want_held) {
    std::size_t rows = 0;
    for (char h : held) rows += (h != 0) == want_held;
    DenseMatrix out(rows, m.cols());
    std::size_t r = 0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if ((held[i] != 0) != want_held) continue;
      for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m(i, c);
      ++r;
    }
    return out;
  };
  CalibratedModel out;
  out.g = naive_negative_train(keep(positives, held_p, false), keep(unlabeled, held_u, false), cfg);
  const auto hold = keep(positives, held_p, true);
  std::vector<double> g_hold(hold.rows());
  for (std::size_t r = 0; r < hold.rows(); ++r) g_hold[r] = out.g.predict(hold.row(r));
  out.c = estimate_label_frequency(g_hold);
  out.holdout = hold.rows();
  return out;
}

inline double prior_calibrated_predict(double g_value, double c) {
  if (!(c > 0.0 && c <= 1.0)) throw UsageError("prior calibration constant must be in (0,1]");
  return std::min(1.0, g_value / c);
}

inline double prior_calibrated_predict(const CalibratedModel& m, std::span<const double> x) {
  return prior_calibrated_predict(m.g.predict(x), m.c);
}

// Corpus-level drivers mirroring run_two_step's output contract.

struct BaselineRun {
  Classification output;
  PuSplit split;
  GbdtModel model;
  double c = 1.0;
};

inline BaselineRun run_naive(const Corpus& corpus, const KeywordSet& kw, const EmbeddingTable& table,
                             const GbdtConfig& cfg, double decision_threshold = 0.5) {
  BaselineRun run;
  run.split = split_pu(corpus, kw);
  if (run.split.unlabeled.empty()) throw DataError("naive baseline: unlabeled set is empty");
  const auto emb = embed_corpus(corpus, table);
  run.model = naive_negative_train(gather_rows(emb, run.split.positive), gather_rows(emb, run.split.unlabeled), cfg);
  run.output = classify_with(run.model, emb, run.split.is_positive, decision_threshold);
  return run;
}

inline BaselineRun run_prior(const Corpus& corpus, const KeywordSet& kw, const EmbeddingTable& table,
                             const GbdtConfig& cfg, const PriorCalibration& cal, double decision_threshold = 0.5) {
  BaselineRun run;
  run.split = split_pu(corpus, kw);
  if (run.split.unlabeled.empty()) throw DataError("prior baseline: unlabeled set is empty");
  const auto emb = embed_corpus(corpus, table);
  auto fitted =
      prior_calibrated_fit(gather_rows(emb, run.split.positive), gather_rows(emb, run.split.unlabeled), cfg, cal);
  run.c = fitted.c;
  run.output.probability.resize(corpus.size());
  run.output.political.resize(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    run.output.probability[i] =
        run.split.is_positive[i] ? 1.0 : prior_calibrated_predict(fitted.g.predict(emb.vectors[i]), fitted.c);
    run.output.political[i] = run.output.probability[i] >= decision_threshold ? 1 : 0;
  }
  run.model = std::move(fitted.g);
  return run;
}

}  // namespace politishift
