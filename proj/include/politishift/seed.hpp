#pragma once

// Keyword seeding: the positive set P, the unlabeled remainder U, and the
// keyword-level prevalence tables.

#include <algorithm>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "common.hpp"
#include "corpus.hpp"
#include "textfeat.hpp"

namespace politishift {

struct KeywordSet {
  std::string name;
  std::set<std::string> keywords;  // folded single tokens

  bool contains(const std::string& tok) const { return keywords.count(tok) != 0; }
};

// Normalizes each raw keyword with the tokenizer; every entry must reduce to
// exactly one token.
inline KeywordSet make_keyword_set(std::string name, const std::vector<std::string>& raw) {
  KeywordSet kw{std::move(name), {}};
  for (const auto& r : raw) {
    const auto toks = tokenize(r);
    if (toks.empty()) continue;
    if (toks.size() != 1) throw UsageError("keyword '" + r + "' is not a single token");
    kw.keywords.insert(toks[0]);
  }
  if (kw.keywords.empty()) throw UsageError("keyword set '" + kw.name + "' is empty");
  return kw;
}

// Ordered election keyword list; the "politicsN" presets take its first N.
inline const std::vector<std::string>& election_keywords() {
  static const std::vector<std::string> list = {
      "#eleicoes2022", "lula", "bolsonaro", "partido", "presidencia", "candidatura",
      "eleicoes", "eleitoral", "presidente", "debate", "eleicao"};
  return list;
}

inline KeywordSet politics_preset(std::size_t n) {
  const auto& all = election_keywords();
  if (n == 0 || n > all.size()) throw UsageError("politics preset size must be in 1.." + std::to_string(all.size()));
  return make_keyword_set("politics-" + std::to_string(n),
                          std::vector<std::string>(all.begin(), all.begin() + static_cast<long>(n)));
}

// One keyword per line; blank lines and lines starting with "//" are skipped.
inline KeywordSet load_keyword_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read keyword file: " + path);
  std::vector<std::string> raw;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("//", 0) == 0) continue;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    raw.push_back(line);
  }
  auto slash = path.find_last_of('/');
  return make_keyword_set(slash == std::string::npos ? path : path.substr(slash + 1), raw);
}

// "preset:politics3" / "preset:politics6" / "preset:politics11" or a file path.
inline KeywordSet resolve_keywords(const std::string& spec) {
  const std::string prefix = "preset:politics";
  if (spec.rfind(prefix, 0) == 0) {
    const auto n = spec.substr(prefix.size());
    if (n == "3" || n == "6" || n == "11") return politics_preset(std::stoul(n));
    throw UsageError("unknown keyword preset: " + spec);
  }
  if (spec.rfind("preset:", 0) == 0) throw UsageError("unknown keyword preset: " + spec);
  return load_keyword_file(spec);
}

inline bool match_keywords(const TokenList& doc, const KeywordSet& kw) {
  return std::any_of(doc.begin(), doc.end(), [&](const std::string& t) { return kw.contains(t); });
}

// Partition of a corpus into keyword positives and the unlabeled rest, by
// document position in the corpus.
struct PuSplit {
  KeywordSet keywords;
  std::vector<std::size_t> positive;
  std::vector<std::size_t> unlabeled;
  std::vector<char> is_positive;  // per corpus position
};

inline PuSplit split_pu(const Corpus& corpus, const KeywordSet& kw) {
  PuSplit split{kw, {}, {}, std::vector<char>(corpus.size(), 0)};
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (match_keywords(corpus.tokens(i), kw)) {
      split.positive.push_back(i);
      split.is_positive[i] = 1;
    } else {
      split.unlabeled.push_back(i);
    }
  }
  if (split.positive.empty())
    throw DataError("unusable seed: no document matches keyword set '" + kw.name + "'");
  if (split.unlabeled.empty()) warn("split_pu: every document matches the seed; unlabeled set is empty");
  return split;
}

// ---------------------------------------------------------------------------
// prevalence tables
// ---------------------------------------------------------------------------

// Comment statistics for one post class (positive posts or the others).
struct PostClassStats {
  std::size_t posts = 0;
  std::size_t comments = 0;
  std::size_t positive_comments = 0;
  std::size_t threads_with_comments = 0;
  std::size_t threads_with_positive = 0;

  double positive_comment_fraction() const {
    return comments ? static_cast<double>(positive_comments) / static_cast<double>(comments) : kUndefined;
  }
  double other_comment_fraction() const {
    return comments ? 1.0 - positive_comment_fraction() : kUndefined;
  }
  // Share of threads (including comment-less ones) with at least one
  // positive comment.
  double at_least_one_fraction() const {
    return posts ? static_cast<double>(threads_with_positive) / static_cast<double>(posts) : kUndefined;
  }
};

struct PrevalenceRow {
  std::string platform;
  PostClassStats positive_posts;
  PostClassStats other_posts;

  std::size_t posts() const { return positive_posts.posts + other_posts.posts; }
  double positive_post_fraction() const {
    return posts() ? static_cast<double>(positive_posts.posts) / static_cast<double>(posts()) : kUndefined;
  }
};

// Per-platform rows plus a trailing "all" row. `is_positive` is indexed by
// corpus position (a keyword split or predicted labels).
inline std::vector<PrevalenceRow> prevalence_report(const Corpus& corpus, const std::vector<char>& is_positive,
                                                    const ThreadSet& threads) {
  std::map<std::string, PrevalenceRow> rows;
  PrevalenceRow all{"all", {}, {}};
  auto positive = [&](const Document* d) { return is_positive[*corpus.find(d->id)] != 0; };
  for (const auto& t : threads.threads) {
    const bool pos_post = positive(t.post);
    std::size_t pos_comments = 0;
    for (const auto* c : t.comments) pos_comments += positive(c) ? 1 : 0;
    auto accumulate = [&](PrevalenceRow& row) {
      PostClassStats& s = pos_post ? row.positive_posts : row.other_posts;
      ++s.posts;
      s.comments += t.comments.size();
      s.positive_comments += pos_comments;
      if (!t.comments.empty()) ++s.threads_with_comments;
      if (pos_comments > 0) ++s.threads_with_positive;
    };
    const auto name = to_string(t.post->platform);
    auto [it, inserted] = rows.try_emplace(name, PrevalenceRow{name, {}, {}});
    (void)inserted;
    accumulate(it->second);
    accumulate(all);
  }
  std::vector<PrevalenceRow> out;
  for (auto& [name, row] : rows) out.push_back(row);
  out.push_back(all);
  return out;
}

inline void write_prevalence_csv(std::ostream& out, const std::vector<PrevalenceRow>& rows) {
  out << "platform,posts,positive_posts,positive_post_comments_positive,positive_post_comments_other,"
         "positive_post_threads_any_positive,other_posts,other_post_comments_positive,"
         "other_post_comments_other,other_post_threads_any_positive\n";
  for (const auto& r : rows) {
    const double other_posts = r.posts() ? 1.0 - r.positive_post_fraction() : kUndefined;
    out << csv_field(r.platform) << ',' << r.posts() << ',' << fmt_real(r.positive_post_fraction()) << ','
        << fmt_real(r.positive_posts.positive_comment_fraction()) << ','
        << fmt_real(r.positive_posts.other_comment_fraction()) << ','
        << fmt_real(r.positive_posts.at_least_one_fraction()) << ',' << fmt_real(other_posts) << ','
        << fmt_real(r.other_posts.positive_comment_fraction()) << ','
        << fmt_real(r.other_posts.other_comment_fraction()) << ','
        << fmt_real(r.other_posts.at_least_one_fraction()) << '\n';
  }
}

}  // namespace politishift
