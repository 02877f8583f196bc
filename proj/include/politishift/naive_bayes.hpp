#pragma once

// Multinomial Naive Bayes over a shared vocabulary, scored in log space.

#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "common.hpp"
#include "textfeat.hpp"

namespace politishift {

class NaiveBayesModel {
 public:
  static constexpr int kNegative = 0;
  static constexpr int kPositive = 1;

  NaiveBayesModel() = default;
  NaiveBayesModel(std::array<double, 2> log_prior, std::array<std::vector<double>, 2> log_likelihood, double alpha)
      : log_prior_(log_prior), log_likelihood_(std::move(log_likelihood)), alpha_(alpha) {}

  double alpha() const { return alpha_; }
  std::size_t dimension() const { return log_likelihood_[0].size(); }
  double log_prior(int cls) const { return log_prior_[static_cast<std::size_t>(cls)]; }
  double log_likelihood(int cls, std::size_t column) const {
    return log_likelihood_[static_cast<std::size_t>(cls)][column];
  }

  // Log-odds of the positive class for a count (or weight) vector.
  double log_odds(const SparseVector& x) const {
    double lo = log_prior_[1] - log_prior_[0];
    for (std::size_t k = 0; k < x.nnz(); ++k) {
      const auto col = x.indices[k];
      lo += x.values[k] * (log_likelihood_[1][col] - log_likelihood_[0][col]);
    }
    return lo;
  }

  double posterior(const SparseVector& x) const {
    const double lo = log_odds(x);
    // Normalize the two joint log-probabilities without overflow.
    if (lo >= 0) return 1.0 / (1.0 + std::exp(-lo));
    const double e = std::exp(lo);
    return e / (1.0 + e);
  }

 private:
  std::array<double, 2> log_prior_{};
  std::array<std::vector<double>, 2> log_likelihood_;
  double alpha_ = 1.0;
};

// Priors are class document fractions; likelihoods are
// (count + alpha) / (class total + alpha * |V|).
inline NaiveBayesModel train_nb(const std::vector<SparseVector>& pos, const std::vector<SparseVector>& unl,
                                std::size_t vocab_size, double alpha = 1.0) {
  if (pos.empty() || unl.empty()) throw DataError("train_nb: both classes need at least one document");
  if (!(alpha > 0.0)) throw UsageError("train_nb: smoothing alpha must be positive");
  if (vocab_size == 0) throw DataError("train_nb: empty vocabulary");
  std::array<std::vector<double>, 2> counts{std::vector<double>(vocab_size, 0.0), std::vector<double>(vocab_size, 0.0)};
  std::array<double, 2> totals{0.0, 0.0};
  auto accumulate = [&](const std::vector<SparseVector>& docs, int cls) {
    auto& c = counts[static_cast<std::size_t>(cls)];
    for (const auto& d : docs) {
      for (std::size_t k = 0; k < d.nnz(); ++k) {
        if (d.indices[k] >= vocab_size) throw DataError("train_nb: column outside vocabulary");
        c[d.indices[k]] += d.values[k];
        totals[static_cast<std::size_t>(cls)] += d.values[k];
      }
    }
  };
  accumulate(unl, NaiveBayesModel::kNegative);
  accumulate(pos, NaiveBayesModel::kPositive);

  const double n = static_cast<double>(pos.size() + unl.size());
  std::array<double, 2> log_prior{std::log(static_cast<double>(unl.size()) / n),
                                  std::log(static_cast<double>(pos.size()) / n)};
  const double v = static_cast<double>(vocab_size);
  for (int cls = 0; cls < 2; ++cls) {
    auto& c = counts[static_cast<std::size_t>(cls)];
    const double denom = std::log(totals[static_cast<std::size_t>(cls)] + alpha * v);
    for (double& x : c) x = std::log(x + alpha) - denom;
  }
  return NaiveBayesModel(log_prior, std::move(counts), alpha);
}

}  // namespace politishift
