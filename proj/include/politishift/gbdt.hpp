#pragma once

// Gradient-boosted regression trees for binary logistic loss.
//
// Trees are grown level-wise with an exact greedy split search over
// presorted feature columns. Leaves take the regularized Newton step
// -G / (H + lambda); a split is kept only when its gain
//   1/2 [GL^2/(HL+lambda) + GR^2/(HR+lambda) - (GL+GR)^2/(HL+HR+lambda)]
// is positive and both children hold at least min_samples_leaf rows.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "common.hpp"

namespace politishift {

// Row-major dense feature matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static DenseMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    DenseMatrix m(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != m.cols_) throw DataError("feature dimension mismatch in row " + std::to_string(r));
      std::copy(rows[r].begin(), rows[r].end(), m.data_.begin() + static_cast<long>(r * m.cols_));
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct GbdtConfig {
  std::size_t tree_count = 200;
  std::size_t max_depth = 6;
  double learning_rate = 0.1;
  double row_subsample = 0.8;
  double column_subsample = 0.8;
  std::size_t min_samples_leaf = 10;
  double lambda = 1.0;
  std::uint64_t rng_seed = 0;
  std::size_t threads = 1;  // split-search parallelism; results do not depend on it

  void validate() const {
    if (tree_count < 1) throw UsageError("gbdt: tree_count must be >= 1");
    if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw UsageError("gbdt: learning_rate must be in (0,1]");
    if (!(row_subsample > 0.0 && row_subsample <= 1.0)) throw UsageError("gbdt: row_subsample must be in (0,1]");
    if (!(column_subsample > 0.0 && column_subsample <= 1.0))
      throw UsageError("gbdt: column_subsample must be in (0,1]");
    if (min_samples_leaf < 1) throw UsageError("gbdt: min_samples_leaf must be >= 1");
    if (!(lambda >= 0.0)) throw UsageError("gbdt: lambda must be >= 0");
  }
};

inline double sigmoid(double z) {
  const double p = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  return std::clamp(p, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

struct TreeNode {
  std::int32_t feature = -1;  // -1 for leaves
  double threshold = 0.0;     // x[feature] < threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  double value = 0.0;  // leaf output before shrinkage

  bool is_leaf() const { return feature < 0; }
};

class RegressionTree {
 public:
  RegressionTree() = default;
  explicit RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

  double predict(std::span<const double> x) const {
    std::size_t n = 0;
    while (!nodes_[n].is_leaf()) {
      const auto& node = nodes_[n];
      n = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left : node.right);
    }
    return nodes_[n].value;
  }

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::vector<TreeNode>& mutable_nodes() { return nodes_; }

  std::size_t depth() const {
    std::vector<std::size_t> d(nodes_.size(), 0);
    std::size_t best = 0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (nodes_[i].is_leaf()) continue;
      d[static_cast<std::size_t>(nodes_[i].left)] = d[static_cast<std::size_t>(nodes_[i].right)] = d[i] + 1;
      best = std::max(best, d[i] + 1);
    }
    return best;
  }

 private:
  std::vector<TreeNode> nodes_;
};

class GbdtModel {
 public:
  GbdtModel() = default;
  GbdtModel(double base_score, std::size_t n_features, GbdtConfig cfg, std::vector<RegressionTree> trees = {})
      : base_score_(base_score), n_features_(n_features), cfg_(cfg), trees_(std::move(trees)) {}

  double base_score() const { return base_score_; }
  std::size_t feature_count() const { return n_features_; }
  const GbdtConfig& config() const { return cfg_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }
  std::vector<RegressionTree>& mutable_trees() { return trees_; }
  void add_tree(RegressionTree t) { trees_.push_back(std::move(t)); }

  // Per-round mean training log loss (index 0 = before the first tree).
  // Diagnostic only; not serialized.
  const std::vector<double>& training_loss() const { return training_loss_; }
  void set_training_loss(std::vector<double> loss) { training_loss_ = std::move(loss); }

  double margin(std::span<const double> x) const {
    if (x.size() != n_features_)
      throw DataError("gbdt_predict: expected " + std::to_string(n_features_) + " features, got " +
                      std::to_string(x.size()));
    double z = base_score_;
    for (const auto& t : trees_) z += cfg_.learning_rate * t.predict(x);
    return z;
  }

  double predict(std::span<const double> x) const { return sigmoid(margin(x)); }

  void save(std::ostream& os) const {
    os << "politishift-gbdt v1\n";
    os << "config " << cfg_.tree_count << ' ' << cfg_.max_depth << ' ' << hexfloat(cfg_.learning_rate) << ' '
       << hexfloat(cfg_.row_subsample) << ' ' << hexfloat(cfg_.column_subsample) << ' ' << cfg_.min_samples_leaf
       << ' ' << hexfloat(cfg_.lambda) << ' ' << cfg_.rng_seed << '\n';
    os << "base " << hexfloat(base_score_) << '\n';
    os << "features " << n_features_ << '\n';
    os << "trees " << trees_.size() << '\n';
    for (const auto& t : trees_) {
      os << "tree " << t.nodes().size() << '\n';
      for (const auto& n : t.nodes()) {
        os << n.feature << ' ' << hexfloat(n.threshold) << ' ' << n.left << ' ' << n.right << ' ' << hexfloat(n.value)
           << '\n';
      }
    }
  }

  static GbdtModel load(std::istream& is) {
    auto expect = [&](const std::string& key) {
      std::string k;
      if (!(is >> k) || k != key) throw DataError("gbdt model file: expected '" + key + "'");
    };
    auto real = [&]() {
      std::string s;
      if (!(is >> s)) throw DataError("gbdt model file: truncated");
      return parse_hexfloat(s);
    };
    std::string magic;
    std::getline(is, magic);
    if (magic != "politishift-gbdt v1") throw DataError("not a gbdt model file");
    GbdtConfig cfg;
    expect("config");
    is >> cfg.tree_count >> cfg.max_depth;
    cfg.learning_rate = real();
    cfg.row_subsample = real();
    cfg.column_subsample = real();
    is >> cfg.min_samples_leaf;
    cfg.lambda = real();
    is >> cfg.rng_seed;
    expect("base");
    const double base = real();
    expect("features");
    std::size_t nf = 0, nt = 0;
    is >> nf;
    expect("trees");
    is >> nt;
    if (!is) throw DataError("gbdt model file: bad header");
    std::vector<RegressionTree> trees;
    trees.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) {
      expect("tree");
      std::size_t nn = 0;
      is >> nn;
      std::vector<TreeNode> nodes(nn);
      for (auto& n : nodes) {
        is >> n.feature;
        n.threshold = real();
        is >> n.left >> n.right;
        n.value = real();
        if (!is) throw DataError("gbdt model file: bad node");
        if (!n.is_leaf() && (n.left < 0 || n.right < 0 || static_cast<std::size_t>(n.left) >= nn ||
                             static_cast<std::size_t>(n.right) >= nn || static_cast<std::size_t>(n.feature) >= nf))
          throw DataError("gbdt model file: node references out of range");
      }
      trees.emplace_back(std::move(nodes));
    }
    return GbdtModel(base, nf, cfg, std::move(trees));
  }

 private:
  double base_score_ = 0.0;
  std::size_t n_features_ = 0;
  GbdtConfig cfg_;
  std::vector<RegressionTree> trees_;
  std::vector<double> training_loss_;
};

namespace detail {

inline double log_loss(const std::vector<double>& margin, std::span<const int> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < margin.size(); ++i) {
    const double z = margin[i];
    // log(1 + exp(-z)) for y=1, log(1 + exp(z)) for y=0, computed stably
    const double t = y[i] ? -z : z;
    s += t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
  }
  return s / static_cast<double>(margin.size());
}

struct SplitCandidate {
  double gain = 0.0;
  std::int32_t feature = -1;
  double threshold = 0.0;
};

struct NodeStats {
  double grad = 0.0;
  double hess = 0.0;
  std::size_t count = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const DenseMatrix& x, const std::vector<std::vector<std::uint32_t>>& sorted, const GbdtConfig& cfg)
      : x_(x), sorted_(sorted), cfg_(cfg) {}

  // rows_in: sampled row flags; features: sampled columns in ascending order.
  RegressionTree build(const std::vector<double>& grad, const std::vector<double>& hess,
                       const std::vector<char>& rows_in, const std::vector<std::uint32_t>& features) {
    const std::size_t n = x_.rows();
    std::vector<std::int32_t> node_of(n, -1);
    std::vector<TreeNode> nodes(1);
    std::vector<NodeStats> stats(1);
    for (std::size_t r = 0; r < n; ++r) {
      if (!rows_in[r]) continue;
      node_of[r] = 0;
      stats[0].grad += grad[r];
      stats[0].hess += hess[r];
      ++stats[0].count;
    }
    std::vector<std::int32_t> frontier{0};
    for (std::size_t depth = 0; depth < cfg_.max_depth && !frontier.empty(); ++depth) {
      // Slot per frontier node, so per-feature scans can index compactly.
      std::vector<std::int32_t> slot_of(nodes.size(), -1);
      for (std::size_t s = 0; s < frontier.size(); ++s) slot_of[static_cast<std::size_t>(frontier[s])] = static_cast<std::int32_t>(s);

      std::vector<std::vector<SplitCandidate>> per_feature(features.size(),
                                                           std::vector<SplitCandidate>(frontier.size()));
      auto scan_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t fi = lo; fi < hi; ++fi)
          scan_feature(features[fi], grad, hess, node_of, slot_of, frontier, stats, per_feature[fi]);
      };
      const std::size_t workers = std::min<std::size_t>(std::max<std::size_t>(cfg_.threads, 1), features.size());
      if (workers <= 1) {
        scan_range(0, features.size());
      } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (features.size() + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
          const std::size_t lo = w * chunk, hi = std::min(features.size(), lo + chunk);
          if (lo < hi) pool.emplace_back(scan_range, lo, hi);
        }
        for (auto& t : pool) t.join();
      }

      // Deterministic reduce: highest gain, ties to the lower feature index.
      std::vector<std::int32_t> next;
      std::vector<std::int32_t> split_nodes;
      for (std::size_t s = 0; s < frontier.size(); ++s) {
        SplitCandidate best;
        for (std::size_t fi = 0; fi < features.size(); ++fi) {
          const auto& c = per_feature[fi][s];
          if (c.feature >= 0 && c.gain > best.gain) best = c;
        }
        const auto id = static_cast<std::size_t>(frontier[s]);
        if (best.feature < 0) continue;
        nodes[id].feature = best.feature;
        nodes[id].threshold = best.threshold;
        nodes[id].left = static_cast<std::int32_t>(nodes.size());
        nodes[id].right = static_cast<std::int32_t>(nodes.size() + 1);
        nodes.emplace_back();
        nodes.emplace_back();
        stats.emplace_back();
        stats.emplace_back();
        next.push_back(nodes[id].left);
        next.push_back(nodes[id].right);
        split_nodes.push_back(frontier[s]);
      }
      if (split_nodes.empty()) break;
      for (std::size_t r = 0; r < n; ++r) {
        const auto id = node_of[r];
        if (id < 0 || nodes[static_cast<std::size_t>(id)].is_leaf()) continue;
        const auto& node = nodes[static_cast<std::size_t>(id)];
        const auto child = x_(r, static_cast<std::size_t>(node.feature)) < node.threshold ? node.left : node.right;
        node_of[r] = child;
        auto& st = stats[static_cast<std::size_t>(child)];
        st.grad += grad[r];
        st.hess += hess[r];
        ++st.count;
      }
      frontier = std::move(next);
    }
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].is_leaf()) nodes[i].value = -stats[i].grad / (stats[i].hess + cfg_.lambda);
    }
    return RegressionTree(std::move(nodes));
  }

 private:
  double score(double g, double h) const { return g * g / (h + cfg_.lambda); }

  void scan_feature(std::uint32_t f, const std::vector<double>& grad, const std::vector<double>& hess,
                    const std::vector<std::int32_t>& node_of, const std::vector<std::int32_t>& slot_of,
                    const std::vector<std::int32_t>& frontier, const std::vector<NodeStats>& stats,
                    std::vector<SplitCandidate>& best) const {
    const std::size_t m = frontier.size();
    std::vector<NodeStats> left(m);
    std::vector<double> last(m, 0.0);
    std::vector<char> seen(m, 0);
    for (auto r : sorted_[f]) {
      const auto id = node_of[r];
      if (id < 0) continue;
      const auto s = slot_of[static_cast<std::size_t>(id)];
      if (s < 0) continue;
      const auto su = static_cast<std::size_t>(s);
      const double v = x_(r, f);
      if (seen[su] && v != last[su]) {
        const auto& tot = stats[static_cast<std::size_t>(id)];
        const auto& l = left[su];
        const std::size_t rc = tot.count - l.count;
        if (l.count >= cfg_.min_samples_leaf && rc >= cfg_.min_samples_leaf) {
          const double gr = tot.grad - l.grad, hr = tot.hess - l.hess;
          const double gain = 0.5 * (score(l.grad, l.hess) + score(gr, hr) - score(tot.grad, tot.hess));
          if (gain > best[su].gain) {
            double thr = last[su] + (v - last[su]) * 0.5;
            if (!(thr > last[su])) thr = v;
            best[su] = SplitCandidate{gain, static_cast<std::int32_t>(f), thr};
          }
        }
      }
      seen[su] = 1;
      last[su] = v;
      left[su].grad += grad[r];
      left[su].hess += hess[r];
      ++left[su].count;
    }
  }

  const DenseMatrix& x_;
  const std::vector<std::vector<std::uint32_t>>& sorted_;
  const GbdtConfig& cfg_;
};

}  // namespace detail

// Labels are 1 (positive) / 0 (negative).
inline GbdtModel train_gbdt(const DenseMatrix& x, std::span<const int> y, const GbdtConfig& cfg) {
  cfg.validate();
  const std::size_t n = x.rows(), d = x.cols();
  if (n == 0 || d == 0) throw DataError("train_gbdt: empty training matrix");
  if (y.size() != n) throw DataError("train_gbdt: label count does not match rows");
  const auto pos = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
  if (pos == 0 || pos == n) throw DataError("train_gbdt: training data contains a single class");

  std::vector<std::vector<std::uint32_t>> sorted(d, std::vector<std::uint32_t>(n));
  for (std::size_t f = 0; f < d; ++f) {
    std::iota(sorted[f].begin(), sorted[f].end(), 0u);
    std::stable_sort(sorted[f].begin(), sorted[f].end(), [&](auto a, auto b) { return x(a, f) < x(b, f); });
  }

  const double base = std::log(static_cast<double>(pos) / static_cast<double>(n - pos));
  GbdtModel model(base, d, cfg);
  std::vector<double> margin(n, base), grad(n), hess(n);
  std::vector<double> loss{detail::log_loss(margin, y)};
  Rng rng(mix_seed(cfg.rng_seed, 0x6bd7));
  detail::TreeBuilder builder(x, sorted, cfg);

  const auto rows_k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.row_subsample * static_cast<double>(n))));
  const auto cols_k = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.column_subsample * static_cast<double>(d))));
  for (std::size_t t = 0; t < cfg.tree_count; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(margin[i]);
      grad[i] = p - y[i];
      hess[i] = std::max(p * (1.0 - p), 1e-16);
    }
    std::vector<char> rows_in(n, rows_k >= n ? 1 : 0);
    if (rows_k < n)
      for (auto r : sample_without_replacement(rng, n, rows_k)) rows_in[r] = 1;
    std::vector<std::uint32_t> features;
    if (cols_k >= d) {
      features.resize(d);
      std::iota(features.begin(), features.end(), 0u);
    } else {
      for (auto f : sample_without_replacement(rng, d, cols_k)) features.push_back(static_cast<std::uint32_t>(f));
      std::sort(features.begin(), features.end());
    }
    auto tree = builder.build(grad, hess, rows_in, features);
    for (std::size_t i = 0; i < n; ++i) margin[i] += cfg.learning_rate * tree.predict(x.row(i));
    model.add_tree(std::move(tree));
    loss.push_back(detail::log_loss(margin, y));
  }
  model.set_training_loss(std::move(loss));
  return model;
}

// Convenience form taking the two classes as separate row lists.
inline GbdtModel train_gbdt(const std::vector<std::vector<double>>& pos, const std::vector<std::vector<double>>& neg,
                            const GbdtConfig& cfg) {
  if (pos.empty() || neg.empty()) throw DataError("train_gbdt: both classes need at least one example");
  std::vector<std::vector<double>> rows;
  rows.reserve(pos.size() + neg.size());
  rows.insert(rows.end(), pos.begin(), pos.end());
  rows.insert(rows.end(), neg.begin(), neg.end());
  std::vector<int> y(pos.size(), 1);
  y.resize(pos.size() + neg.size(), 0);
  return train_gbdt(DenseMatrix::from_rows(rows), y, cfg);
}

inline double gbdt_predict(const GbdtModel& model, std::span<const double> x) { return model.predict(x); }

}  // namespace politishift
