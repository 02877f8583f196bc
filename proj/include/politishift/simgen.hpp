#pragma once

// Synthetic threaded corpora with known labels.
//
// Every document belongs to one of three classes: political, soccer or
// other. Documents are bags of tokens drawn from class vocabularies, the
// thread topic's vocabulary and a shared pool. Seed keywords are injected
// only into political (or soccer) documents, by replacing one token, so a
// keyword classifier has precision 1 against the ground truth. A matching
// embedding table places each vocabulary around its group centroid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "common.hpp"
#include "corpus.hpp"
#include "seed.hpp"
#include "stats.hpp"
#include "textfeat.hpp"

namespace politishift {

enum class SimClass { political, soccer, other };

inline std::string to_string(SimClass c) {
  switch (c) {
    case SimClass::political: return "political";
    case SimClass::soccer: return "soccer";
    case SimClass::other: return "other";
  }
  return "other";
}

struct SimTopic {
  std::string name;
  double weight = 1.0;
  double political_shift_rate = 0.1;  // expected share of political comments under its posts
  double soccer_shift_rate = 0.0;
};

// Multiplies political shift rates for comments posted in [from, to).
struct SimRegime {
  std::int64_t from = 0;
  std::int64_t to = 0;
  double multiplier = 1.0;
};

// Keywords injected into a band of political documents; bands stack, so
// tiers {A: 0.4, B: 0.2} put an A keyword in 40% and a B keyword in the
// next 20% of political documents.
struct KeywordTier {
  std::vector<std::string> keywords;
  double coverage = 0.0;
};

// The election list split into the first three, next three and last five
// keywords, reaching coverages 0.40, 0.60 and 0.80 cumulatively.
inline std::vector<KeywordTier> election_tiers() {
  const auto& all = election_keywords();
  return {{{all.begin(), all.begin() + 3}, 0.40},
          {{all.begin() + 3, all.begin() + 6}, 0.20},
          {{all.begin() + 6, all.end()}, 0.20}};
}

struct SimConfig {
  std::size_t n_posts = 1000;
  double comments_per_post_mean = 9.0;
  double political_post_rate = 0.3;
  double soccer_post_rate = 0.0;
  double political_stay_rate = 0.7;
  double soccer_stay_rate = 0.6;
  // Share of non-political, non-soccer threads in which shifts can occur;
  // per-comment rates inside them are scaled up so topic-level rates hold.
  double political_engagement = 1.0;
  double soccer_engagement = 1.0;
  std::string political_topic = "elections";
  std::string soccer_topic = "soccer";
  double soccer_post_political_rate = 0.05;
  std::vector<SimTopic> topics = {
      {"economy", 1.0, 0.30, 0.0}, {"crime", 1.0, 0.25, 0.0},        {"entertainment", 1.0, 0.15, 0.0},
      {"technology", 1.0, 0.12, 0.0}, {"health", 1.0, 0.15, 0.0}, {"pets", 1.0, 0.08, 0.0}};
  std::vector<SimRegime> regimes;
  std::int64_t start_time = 1659312000;  // 2022-08-01
  std::int64_t end_time = 1669852800;    // 2022-12-01
  double comment_delay_mean_hours = 24.0;

  std::vector<KeywordTier> keyword_tiers = {{{"#eleicoes2022", "lula", "bolsonaro"}, 0.40}};
  // Correlation between a political document's signal strength and how
  // early it falls in the keyword bands (0 = keywords at random).
  double keyword_bias = 0.0;
  std::vector<std::string> soccer_keywords = {"club01", "club02", "club03", "club04", "club05", "club06",
                                              "club07", "club08", "club09", "club10", "club11", "club12"};
  double soccer_keyword_coverage = 0.4;

  std::size_t political_vocab = 400;
  std::size_t soccer_vocab = 200;
  std::size_t topic_vocab = 150;
  std::size_t shared_vocab = 600;
  double zipf_exponent = 1.0;

  std::size_t post_tokens_min = 8;
  double post_tokens_extra_mean = 6.0;
  std::size_t comment_tokens_min = 6;
  double comment_tokens_extra_mean = 8.0;
  double short_comment_rate = 0.0;  // comments generated with <= 5 tokens

  double class_share_min = 0.25;  // share of class-vocabulary tokens in political/soccer docs
  double class_share_max = 0.65;
  double context_share = 0.25;  // thread-topic tokens inside political/soccer docs
  double topic_share = 0.5;     // topic tokens inside other docs
  double overlap = 0.03;        // political-vocabulary tokens leaking into other docs

  std::size_t embedding_dim = 24;
  double embedding_noise = 1.0;
  // Seed keywords get political-centroid vectors; when off they are left out
  // of the table so pooled features carry no trace of the labeling.
  bool embed_keywords = true;
  double centroid_norm = 1.0;
  Platform platform = Platform::synthetic;
  std::uint64_t rng_seed = 7;

  void validate() const {
    auto rate = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) throw UsageError(std::string("simgen: ") + name + " must be in [0,1]");
    };
    rate(political_post_rate, "political_post_rate");
    rate(soccer_post_rate, "soccer_post_rate");
    if (political_post_rate + soccer_post_rate > 1.0) throw UsageError("simgen: post class rates exceed 1");
    rate(political_stay_rate, "political_stay_rate");
    rate(soccer_stay_rate, "soccer_stay_rate");
    rate(soccer_post_political_rate, "soccer_post_political_rate");
    if (!(political_engagement > 0.0 && political_engagement <= 1.0)) throw UsageError("simgen: political_engagement must be in (0,1]");
    if (!(soccer_engagement > 0.0 && soccer_engagement <= 1.0)) throw UsageError("simgen: soccer_engagement must be in (0,1]");
    rate(soccer_keyword_coverage, "soccer_keyword_coverage");
    rate(short_comment_rate, "short_comment_rate");
    rate(overlap, "overlap");
    rate(topic_share, "topic_share");
    rate(context_share, "context_share");
    rate(class_share_min, "class_share_min");
    rate(class_share_max, "class_share_max");
    if (class_share_min > class_share_max) throw UsageError("simgen: class_share_min > class_share_max");
    if (class_share_max + context_share > 1.0) throw UsageError("simgen: class and context shares exceed 1");
    if (topic_share + overlap > 1.0) throw UsageError("simgen: topic share and overlap exceed 1");
    if (!(keyword_bias >= 0.0 && keyword_bias < 1.0)) throw UsageError("simgen: keyword_bias must be in [0,1)");
    double cov = 0.0;
    for (const auto& t : keyword_tiers) {
      rate(t.coverage, "keyword tier coverage");
      if (t.coverage > 0.0 && t.keywords.empty()) throw UsageError("simgen: keyword tier without keywords");
      cov += t.coverage;
    }
    if (cov > 1.0 + 1e-12) throw UsageError("simgen: keyword tier coverages exceed 1");
    if (political_vocab == 0 || shared_vocab == 0 || topic_vocab == 0)
      throw UsageError("simgen: vocabularies must be nonempty");
    if (soccer_post_rate > 0.0 && soccer_vocab == 0) throw UsageError("simgen: soccer posts need a soccer vocabulary");
    if (topics.empty() && political_post_rate + soccer_post_rate < 1.0)
      throw UsageError("simgen: other-class posts need at least one topic");
    for (const auto& t : topics) {
      rate(t.political_shift_rate, "topic political_shift_rate");
      rate(t.soccer_shift_rate, "topic soccer_shift_rate");
      if (!(t.weight > 0.0)) throw UsageError("simgen: topic weights must be positive");
    }
    if (end_time <= start_time) throw UsageError("simgen: empty time range");
    if (embedding_dim == 0) throw UsageError("simgen: embedding_dim must be positive");
  }
};

struct TruthRecord {
  SimClass cls = SimClass::other;
  std::string topic;  // topic of the thread the document belongs to
};

struct GroundTruth {
  std::map<std::string, TruthRecord> truth;  // covers every generated document

  // Realized rates.
  std::size_t political_docs = 0;
  std::size_t political_docs_with_keyword = 0;
  std::vector<std::size_t> tier_hits;  // political docs per keyword tier
  std::size_t soccer_docs = 0;
  std::size_t soccer_docs_with_keyword = 0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> topic_comments;  // topic -> (political, total)

  bool political(const std::string& id) const { return truth.at(id).cls == SimClass::political; }
  double keyword_coverage() const {
    return political_docs ? static_cast<double>(political_docs_with_keyword) / static_cast<double>(political_docs)
                          : kUndefined;
  }
};

struct SimOutput {
  Corpus corpus;
  GroundTruth truth;
  EmbeddingTable embeddings;
};

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Zipf-weighted sampler over a token list.
class VocabSampler {
 public:
  VocabSampler() = default;
  VocabSampler(std::vector<std::string> words, double exponent) : words_(std::move(words)) {
    cdf_.reserve(words_.size());
    double acc = 0.0;
    for (std::size_t r = 0; r < words_.size(); ++r) {
      acc += 1.0 / std::pow(static_cast<double>(r + 1), exponent);
      cdf_.push_back(acc);
    }
  }
  bool empty() const { return words_.empty(); }
  const std::vector<std::string>& words() const { return words_; }
  const std::string& draw(Rng& rng) const {
    const double u = uniform01(rng) * cdf_.back();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return words_[std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), words_.size() - 1)];
  }

 private:
  std::vector<std::string> words_;
  std::vector<double> cdf_;
};

inline std::vector<std::string> make_words(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  out.reserve(n);
  char buf[32];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "%s%04zu", prefix.c_str(), i);
    out.emplace_back(buf);
  }
  return out;
}

}  // namespace detail

class SimGenerator {
 public:
  explicit SimGenerator(SimConfig cfg) : cfg_(std::move(cfg)), rng_(mix_seed(cfg_.rng_seed, 0x51a6e)) {
    cfg_.validate();
    political_ = detail::VocabSampler(detail::make_words("pol", cfg_.political_vocab), cfg_.zipf_exponent);
    soccer_ = detail::VocabSampler(detail::make_words("soc", cfg_.soccer_vocab), cfg_.zipf_exponent);
    shared_ = detail::VocabSampler(detail::make_words("w", cfg_.shared_vocab), cfg_.zipf_exponent);
    for (std::size_t t = 0; t < cfg_.topics.size(); ++t) {
      char prefix[16];
      std::snprintf(prefix, sizeof prefix, "t%02zuw", t);
      topic_vocab_.emplace_back(detail::make_words(prefix, cfg_.topic_vocab), cfg_.zipf_exponent);
    }
  }

  SimOutput generate() {
    SimOutput out;
    std::vector<Document> docs;
    const double topic_total = [&] {
      double s = 0.0;
      for (const auto& t : cfg_.topics) s += t.weight;
      return s;
    }();
    out.truth.tier_hits.assign(cfg_.keyword_tiers.size(), 0);
    char id[32];
    for (std::size_t p = 0; p < cfg_.n_posts; ++p) {
      const double u = uniform01(rng_);
      SimClass post_cls = SimClass::other;
      if (u < cfg_.political_post_rate) post_cls = SimClass::political;
      else if (u < cfg_.political_post_rate + cfg_.soccer_post_rate) post_cls = SimClass::soccer;
      std::ptrdiff_t topic_idx = -1;
      std::string topic_name = post_cls == SimClass::political ? cfg_.political_topic : cfg_.soccer_topic;
      if (post_cls == SimClass::other) {
        topic_idx = static_cast<std::ptrdiff_t>(pick_topic(topic_total));
        topic_name = cfg_.topics[static_cast<std::size_t>(topic_idx)].name;
      }
      const auto post_ts = cfg_.start_time +
                           static_cast<std::int64_t>(uniform01(rng_) * static_cast<double>(cfg_.end_time - cfg_.start_time));
      std::snprintf(id, sizeof id, "p%06zu", p);
      const std::string post_id = id;
      const auto post_len = cfg_.post_tokens_min + static_cast<std::size_t>(poisson(rng_, cfg_.post_tokens_extra_mean));
      docs.push_back(make_doc(post_id, DocKind::post, std::nullopt, post_cls, topic_idx, post_len, post_ts, out.truth));
      docs.back().topic = topic_name;
      out.truth.truth[post_id] = {post_cls, topic_name};

      const bool pol_engaged = uniform01(rng_) < cfg_.political_engagement;
      const bool soc_engaged = uniform01(rng_) < cfg_.soccer_engagement;
      const int n_comments = poisson(rng_, cfg_.comments_per_post_mean);
      for (int c = 0; c < n_comments; ++c) {
        const double delay = -std::log(1.0 - uniform01(rng_)) * cfg_.comment_delay_mean_hours * 3600.0;
        const auto ts = post_ts + static_cast<std::int64_t>(delay);
        const SimClass cls = comment_class(post_cls, topic_idx, pol_engaged, soc_engaged, ts);
        std::size_t len = cfg_.comment_tokens_min + static_cast<std::size_t>(poisson(rng_, cfg_.comment_tokens_extra_mean));
        if (cfg_.short_comment_rate > 0.0 && uniform01(rng_) < cfg_.short_comment_rate)
          len = 1 + uniform_index(rng_, 5);
        std::snprintf(id, sizeof id, "c%06zu_%03d", p, c);
        const std::string cid = id;
        // Political/soccer comments borrow context from the thread topic;
        // off-topic comments under political/soccer posts pick a random topic.
        std::ptrdiff_t ctx = topic_idx;
        if (ctx < 0 && !cfg_.topics.empty()) ctx = static_cast<std::ptrdiff_t>(pick_topic(topic_total));
        docs.push_back(make_doc(cid, DocKind::comment, post_id, cls, ctx, len, ts, out.truth));
        out.truth.truth[cid] = {cls, topic_name};
        auto& tc = out.truth.topic_comments[topic_name];
        tc.first += cls == SimClass::political ? 1 : 0;
        ++tc.second;
      }
    }
    out.corpus = Corpus(std::move(docs));
    out.embeddings = make_embeddings();
    return out;
  }

 private:
  std::size_t pick_topic(double total) {
    double u = uniform01(rng_) * total;
    for (std::size_t t = 0; t < cfg_.topics.size(); ++t) {
      u -= cfg_.topics[t].weight;
      if (u < 0.0) return t;
    }
    return cfg_.topics.size() - 1;
  }

  double regime_multiplier(std::int64_t ts) const {
    double m = 1.0;
    for (const auto& r : cfg_.regimes)
      if (ts >= r.from && ts < r.to) m *= r.multiplier;
    return m;
  }

  SimClass comment_class(SimClass post_cls, std::ptrdiff_t topic_idx, bool pol_engaged, bool soc_engaged,
                         std::int64_t ts) {
    const double u = uniform01(rng_);
    const double mult = regime_multiplier(ts);
    if (post_cls == SimClass::political) return u < cfg_.political_stay_rate ? SimClass::political : SimClass::other;
    if (post_cls == SimClass::soccer) {
      if (u < cfg_.soccer_stay_rate) return SimClass::soccer;
      if (u < cfg_.soccer_stay_rate + std::min(1.0 - cfg_.soccer_stay_rate, cfg_.soccer_post_political_rate * mult))
        return SimClass::political;
      return SimClass::other;
    }
    const auto& topic = cfg_.topics[static_cast<std::size_t>(topic_idx)];
    const double pol = pol_engaged ? std::min(1.0, topic.political_shift_rate * mult / cfg_.political_engagement) : 0.0;
    const double soc = soc_engaged ? std::min(1.0 - pol, topic.soccer_shift_rate / cfg_.soccer_engagement) : 0.0;
    if (u < pol) return SimClass::political;
    if (u < pol + soc) return SimClass::soccer;
    return SimClass::other;
  }

  Document make_doc(const std::string& id, DocKind kind, std::optional<std::string> parent, SimClass cls,
                    std::ptrdiff_t ctx_topic, std::size_t len, std::int64_t ts, GroundTruth& truth) {
    std::vector<std::string> tokens;
    tokens.reserve(len);
    const detail::VocabSampler* ctx = ctx_topic >= 0 ? &topic_vocab_[static_cast<std::size_t>(ctx_topic)] : nullptr;
    double z_strength = 0.0;
    if (cls == SimClass::other) {
      for (std::size_t i = 0; i < len; ++i) {
        const double u = uniform01(rng_);
        if (ctx && u < cfg_.topic_share) tokens.push_back(ctx->draw(rng_));
        else if (u < cfg_.topic_share + cfg_.overlap) tokens.push_back(political_.draw(rng_));
        else tokens.push_back(shared_.draw(rng_));
      }
    } else {
      z_strength = standard_normal(rng_);
      const double strength = detail::normal_cdf(z_strength);
      const double share = cfg_.class_share_min + (cfg_.class_share_max - cfg_.class_share_min) * strength;
      const auto& own = cls == SimClass::political ? political_ : soccer_;
      for (std::size_t i = 0; i < len; ++i) {
        const double u = uniform01(rng_);
        if (u < share) tokens.push_back(own.draw(rng_));
        else if (ctx && u < share + cfg_.context_share) tokens.push_back(ctx->draw(rng_));
        else tokens.push_back(shared_.draw(rng_));
      }
    }
    if (cls == SimClass::political) {
      ++truth.political_docs;
      // Band position: a uniform variate correlated with signal strength.
      const double rho = cfg_.keyword_bias;
      const double band = detail::normal_cdf(-rho * z_strength + std::sqrt(1.0 - rho * rho) * standard_normal(rng_));
      double acc = 0.0;
      for (std::size_t t = 0; t < cfg_.keyword_tiers.size(); ++t) {
        const auto& tier = cfg_.keyword_tiers[t];
        acc += tier.coverage;
        if (band < acc) {
          inject(tokens, tier.keywords[uniform_index(rng_, tier.keywords.size())]);
          ++truth.political_docs_with_keyword;
          ++truth.tier_hits[t];
          break;
        }
      }
    } else if (cls == SimClass::soccer) {
      ++truth.soccer_docs;
      if (!cfg_.soccer_keywords.empty() && uniform01(rng_) < cfg_.soccer_keyword_coverage) {
        inject(tokens, cfg_.soccer_keywords[uniform_index(rng_, cfg_.soccer_keywords.size())]);
        ++truth.soccer_docs_with_keyword;
      }
    }
    Document d;
    d.id = id;
    d.platform = cfg_.platform;
    d.kind = kind;
    d.parent_id = std::move(parent);
    d.text = join_tokens(tokens);
    d.timestamp = ts;
    char author[32];
    std::snprintf(author, sizeof author, "u%05zu", uniform_index(rng_, 5000));
    d.author_id = author;
    return d;
  }

  void inject(std::vector<std::string>& tokens, const std::string& keyword) {
    if (tokens.empty()) tokens.push_back(keyword);
    else tokens[uniform_index(rng_, tokens.size())] = keyword;
  }

  DenseVector centroid() {
    DenseVector c(cfg_.embedding_dim);
    double n = 0.0;
    for (auto& x : c) {
      x = standard_normal(rng_);
      n += x * x;
    }
    n = std::sqrt(n);
    for (auto& x : c) x *= cfg_.centroid_norm / n;
    return c;
  }

  EmbeddingTable make_embeddings() {
    Rng& r = rng_;
    EmbeddingTable table(cfg_.embedding_dim);
    const double sd = cfg_.embedding_noise / std::sqrt(static_cast<double>(cfg_.embedding_dim));
    auto emit = [&](const std::vector<std::string>& words, const DenseVector& c) {
      for (const auto& w : words) {
        DenseVector v(c);
        for (auto& x : v) x += sd * standard_normal(r);
        table.set(w, std::move(v));
      }
    };
    const auto pol_c = centroid();
    const auto soc_c = centroid();
    emit(political_.words(), pol_c);
    emit(soccer_.words(), soc_c);
    emit(shared_.words(), DenseVector(cfg_.embedding_dim, 0.0));
    for (const auto& tv : topic_vocab_) emit(tv.words(), centroid());
    if (cfg_.embed_keywords) {
      std::vector<std::string> kws;
      for (const auto& t : cfg_.keyword_tiers)
        for (const auto& k : t.keywords) kws.push_back(tokenize(k).at(0));
      emit(kws, pol_c);
    }
    std::vector<std::string> skws;
    for (const auto& k : cfg_.soccer_keywords) skws.push_back(tokenize(k).at(0));
    emit(skws, soc_c);
    return table;
  }

  SimConfig cfg_;
  Rng rng_;
  detail::VocabSampler political_, soccer_, shared_;
  std::vector<detail::VocabSampler> topic_vocab_;
};

inline SimOutput generate(const SimConfig& cfg) { return SimGenerator(cfg).generate(); }

// id,true_label,topic with true_label in {political, non_political}.
inline void write_ground_truth_csv(std::ostream& out, const Corpus& corpus, const GroundTruth& gt) {
  out << "id,true_label,topic\n";
  for (const auto& d : corpus.documents()) {
    const auto& t = gt.truth.at(d.id);
    out << csv_field(d.id) << ',' << (t.cls == SimClass::political ? "political" : "non_political") << ','
        << csv_field(t.topic) << '\n';
  }
}

}  // namespace politishift
