#pragma once

// Evaluation: confusion counts and scores with political as the positive
// class, support-weighted averaging, majority vote and Fleiss' kappa.

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "common.hpp"

namespace politishift {

using LabelMap = std::map<std::string, bool>;  // id -> political

struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

inline ConfusionMatrix confusion(const LabelMap& predicted, const LabelMap& gold) {
  if (predicted.size() != gold.size()) throw DataError("confusion: prediction and gold id sets differ in size");
  ConfusionMatrix cm;
  for (const auto& [id, g] : gold) {
    auto it = predicted.find(id);
    if (it == predicted.end()) throw DataError("confusion: no prediction for gold id " + id);
    const bool p = it->second;
    if (p && g) ++cm.tp;
    else if (p && !g) ++cm.fp;
    else if (!p && g) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

struct ScoreReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  // Set when the metric's denominator was zero and the value reported as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
};

inline ScoreReport scores(const ConfusionMatrix& cm) {
  ScoreReport r;
  r.support = cm.total();
  if (r.support == 0) throw DataError("scores: empty confusion matrix");
  r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(r.support);
  if (cm.tp + cm.fp == 0) r.precision_undefined = true;
  else r.precision = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fp);
  if (cm.tp + cm.fn == 0) r.recall_undefined = true;
  else r.recall = static_cast<double>(cm.tp) / static_cast<double>(cm.tp + cm.fn);
  r.f1 = r.precision + r.recall > 0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

// Support-weighted mean of each metric. Supports must be positive.
inline ScoreReport weighted_average(const std::vector<std::pair<ScoreReport, std::size_t>>& reports) {
  if (reports.empty()) throw DataError("weighted_average: no reports");
  ScoreReport out;
  double w = 0.0;
  for (const auto& [r, s] : reports) {
    if (s == 0) throw DataError("weighted_average: zero support");
    const double ws = static_cast<double>(s);
    out.accuracy += ws * r.accuracy;
    out.precision += ws * r.precision;
    out.recall += ws * r.recall;
    out.f1 += ws * r.f1;
    out.support += s;
    out.precision_undefined = out.precision_undefined || r.precision_undefined;
    out.recall_undefined = out.recall_undefined || r.recall_undefined;
    w += ws;
  }
  out.accuracy /= w;
  out.precision /= w;
  out.recall /= w;
  out.f1 /= w;
  return out;
}

inline ScoreReport macro_average(const std::vector<ScoreReport>& reports) {
  std::vector<std::pair<ScoreReport, std::size_t>> equal;
  for (const auto& r : reports) equal.emplace_back(r, 1);
  auto out = weighted_average(equal);
  out.support = 0;
  for (const auto& r : reports) out.support += r.support;
  return out;
}

// n items x k annotators, complete.
struct AnnotationMatrix {
  std::vector<std::string> item_ids;
  std::vector<std::vector<std::string>> labels;  // labels[item][annotator]

  std::size_t items() const { return labels.size(); }
  std::size_t annotators() const { return labels.empty() ? 0 : labels[0].size(); }

  void validate() const {
    if (item_ids.size() != labels.size()) throw DataError("annotation matrix: id count does not match rows");
    for (const auto& row : labels) {
      if (row.size() != annotators()) throw DataError("annotation matrix: ragged rows");
      for (const auto& l : row)
        if (l.empty()) throw DataError("annotation matrix: missing label");
    }
  }
};

// Per-item modal label. Throws listing every tied item.
inline std::map<std::string, std::string> majority_vote(const AnnotationMatrix& m) {
  m.validate();
  std::map<std::string, std::string> out;
  std::vector<std::string> tied;
  for (std::size_t i = 0; i < m.items(); ++i) {
    std::map<std::string, std::size_t> counts;
    for (const auto& l : m.labels[i]) ++counts[l];
    std::size_t best = 0;
    std::vector<std::string> winners;
    for (const auto& [l, c] : counts) {
      if (c > best) {
        best = c;
        winners = {l};
      } else if (c == best) {
        winners.push_back(l);
      }
    }
    if (winners.size() > 1) tied.push_back(m.item_ids[i]);
    else out[m.item_ids[i]] = winners[0];
  }
  if (!tied.empty()) {
    std::string msg = "majority_vote: tied items:";
    for (const auto& id : tied) msg += " " + id;
    throw DataError(msg);
  }
  return out;
}

// kappa = (P_bar - Pe) / (1 - Pe), with per-item agreement
// P_i = (sum_j n_ij^2 - k) / (k (k - 1)) and Pe = sum_j p_j^2.
inline double fleiss_kappa(const AnnotationMatrix& m) {
  m.validate();
  const std::size_t n = m.items(), k = m.annotators();
  if (n < 2 || k < 2) throw DataError("fleiss_kappa: need at least 2 items and 2 annotators");
  std::set<std::string> cats;
  for (const auto& row : m.labels) cats.insert(row.begin(), row.end());
  std::map<std::string, double> marginal;
  double p_bar = 0.0;
  const double kd = static_cast<double>(k);
  for (const auto& row : m.labels) {
    std::map<std::string, double> counts;
    for (const auto& l : row) counts[l] += 1.0;
    double sq = 0.0;
    for (const auto& [l, c] : counts) {
      sq += c * c;
      marginal[l] += c;
    }
    p_bar += (sq - kd) / (kd * (kd - 1.0));
  }
  p_bar /= static_cast<double>(n);
  double pe = 0.0;
  for (const auto& [l, c] : marginal) {
    const double p = c / (static_cast<double>(n) * kd);
    pe += p * p;
  }
  if (pe >= 1.0) {
    if (p_bar >= 1.0) return 1.0;
    throw DataError("fleiss_kappa: undefined (chance agreement is 1)");
  }
  return (p_bar - pe) / (1.0 - pe);
}

inline void write_scores_header(std::ostream& out) {
  out << "model,subset,accuracy,f1,recall,precision,support,precision_undefined,recall_undefined\n";
}

inline void write_scores_row(std::ostream& out, const std::string& model, const std::string& subset,
                             const ScoreReport& r) {
  out << csv_field(model) << ',' << csv_field(subset) << ',' << fmt_real(r.accuracy) << ',' << fmt_real(r.f1) << ','
      << fmt_real(r.recall) << ',' << fmt_real(r.precision) << ',' << r.support << ','
      << (r.precision_undefined ? 1 : 0) << ',' << (r.recall_undefined ? 1 : 0) << '\n';
}

}  // namespace politishift
