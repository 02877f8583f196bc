#pragma once

// Topic-shift analytics. A comment is a shift toward `target` when its post
// is not labeled `target` and the comment is. Everything here is a fold over
// threads with per-document labels.

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "common.hpp"
#include "corpus.hpp"
#include "stats.hpp"

namespace politishift {

using DocLabels = std::unordered_map<std::string, std::string>;  // id -> label

inline const std::string& label_of(const DocLabels& labels, const std::string& id) {
  auto it = labels.find(id);
  if (it == labels.end()) throw DataError("no label for document " + id);
  return it->second;
}

struct ShiftRecord {
  std::string thread_id;
  std::string comment_id;
  std::size_t position = 0;  // 1-based within the thread
  bool is_shift = false;
};

inline std::vector<ShiftRecord> detect_shifts(const Thread& thread, const DocLabels& labels,
                                              const std::string& target) {
  const bool post_on_target = label_of(labels, thread.post->id) == target;
  std::vector<ShiftRecord> out;
  out.reserve(thread.comments.size());
  for (std::size_t i = 0; i < thread.comments.size(); ++i) {
    const auto* c = thread.comments[i];
    const bool comment_on_target = label_of(labels, c->id) == target;
    out.push_back({thread.post->id, c->id, i + 1, !post_on_target && comment_on_target});
  }
  return out;
}

// Keeps threads whose post falls in the range, and only their in-range comments.
inline ThreadSet restrict_to_range(const ThreadSet& threads, const DateRange& range) {
  ThreadSet out;
  out.orphans = threads.orphans;
  for (const auto& t : threads.threads) {
    if (!range.contains(t.post->timestamp)) continue;
    Thread kept{t.post, {}};
    for (const auto* c : t.comments)
      if (range.contains(c->timestamp)) kept.comments.push_back(c);
    out.threads.push_back(std::move(kept));
  }
  return out;
}

// Per-thread share of comments whose label differs from the post's: shifts
// toward the target under non-target posts, departures from it under target
// posts. Threads without comments are skipped.
struct ThreadShift {
  std::string thread_id;
  bool post_on_target = false;
  std::size_t comments = 0;
  std::size_t on_target = 0;  // comments labeled target

  double shift_fraction() const {
    const auto moved = post_on_target ? comments - on_target : on_target;
    return static_cast<double>(moved) / static_cast<double>(comments);
  }
};

inline std::vector<ThreadShift> thread_shifts(const ThreadSet& threads, const DocLabels& labels,
                                              const std::string& target) {
  std::vector<ThreadShift> out;
  for (const auto& t : threads.threads) {
    ThreadShift s{t.post->id, label_of(labels, t.post->id) == target, t.comments.size(), 0};
    for (const auto* c : t.comments) s.on_target += label_of(labels, c->id) == target ? 1 : 0;
    if (s.comments > 0) out.push_back(s);
  }
  return out;
}

struct Histogram {
  std::vector<std::size_t> counts;
  std::size_t total = 0;

  explicit Histogram(std::size_t bins = 20) : counts(bins, 0) {}

  // Equal-width bins on [0,1]; 1.0 lands in the last bin.
  void add(double x) {
    const auto bins = counts.size();
    auto b = static_cast<std::size_t>(std::floor(x * static_cast<double>(bins)));
    ++counts[std::min(b, bins - 1)];
    ++total;
  }
  double mass(std::size_t b) const {
    return total ? static_cast<double>(counts[b]) / static_cast<double>(total) : kUndefined;
  }
};

struct ShiftDistributions {
  Histogram stay;   // target posts: share of comments staying on target
  Histogram shift;  // other posts: share of comments shifting to target
  std::size_t shift_threads = 0;
  std::size_t shift_threads_with_any = 0;  // other-post threads with >= 1 shift

  double at_least_one_fraction() const {
    return shift_threads ? static_cast<double>(shift_threads_with_any) / static_cast<double>(shift_threads)
                         : kUndefined;
  }
};

inline ShiftDistributions stay_and_shift_distributions(const ThreadSet& threads, const DocLabels& labels,
                                                       const std::string& target, std::size_t bins = 20) {
  ShiftDistributions d{Histogram(bins), Histogram(bins), 0, 0};
  for (const auto& s : thread_shifts(threads, labels, target)) {
    const double on = static_cast<double>(s.on_target) / static_cast<double>(s.comments);
    if (s.post_on_target) {
      d.stay.add(on);
    } else {
      d.shift.add(on);
      ++d.shift_threads;
      d.shift_threads_with_any += s.on_target > 0 ? 1 : 0;
    }
  }
  return d;
}

enum class PostClass { target, non_target };

// CDF over per-thread shift percentages (0..100) for one post class.
inline EmpiricalCdf shift_cdf(const ThreadSet& threads, const DocLabels& labels, const std::string& target,
                              PostClass post_class) {
  std::vector<double> pct;
  for (const auto& s : thread_shifts(threads, labels, target)) {
    if (s.post_on_target != (post_class == PostClass::target)) continue;
    pct.push_back(100.0 * s.shift_fraction());
  }
  if (pct.empty()) throw DataError("shift_cdf: no thread with comments in the requested post class");
  return EmpiricalCdf(std::move(pct));
}

struct WeekBucket {
  std::int64_t week_start = 0;  // Monday 00:00 UTC
  std::size_t n = 0;
  std::size_t shifts = 0;
  double ratio = kUndefined;
  Interval ci;
};

// Weekly share of shifting comments among comments under non-target posts,
// bucketed by comment time. Weeks with no comments are emitted with n = 0.
inline std::vector<WeekBucket> weekly_shift_ratio(const ThreadSet& threads, const DocLabels& labels,
                                                  const std::string& target, const DateRange& range = {}) {
  std::map<std::int64_t, WeekBucket> weeks;
  for (const auto& t : threads.threads) {
    if (label_of(labels, t.post->id) == target) continue;
    for (const auto* c : t.comments) {
      if (!range.contains(c->timestamp)) continue;
      auto& b = weeks[iso_week_start(c->timestamp)];
      ++b.n;
      b.shifts += label_of(labels, c->id) == target ? 1 : 0;
    }
  }
  std::int64_t first = 0, last = -1;
  if (range.bounded() && range.to_exclusive != std::numeric_limits<std::int64_t>::max()) {
    first = iso_week_start(range.from);
    last = iso_week_start(range.to_exclusive - 1);
  } else if (!weeks.empty()) {
    first = weeks.begin()->first;
    last = weeks.rbegin()->first;
  }
  std::vector<WeekBucket> out;
  if (last < first) return out;
  constexpr std::int64_t kWeek = 7 * kSecondsPerDay;
  for (std::int64_t w = first; w <= last; w += kWeek) {
    WeekBucket b;
    if (auto it = weeks.find(w); it != weeks.end()) b = it->second;
    b.week_start = w;
    if (b.n > 0) {
      b.ratio = static_cast<double>(b.shifts) / static_cast<double>(b.n);
      b.ci = wilson_interval(b.shifts, b.n);
    }
    out.push_back(b);
  }
  return out;
}

struct GapSamples {
  std::vector<std::size_t> first_gaps;  // position of the first shift
  std::vector<std::size_t> inter_gaps;  // distance between consecutive shifts
  std::size_t censored = 0;             // non-target threads with comments but no shift
  std::size_t target_threads = 0;       // threads skipped because the post is on target
};

inline GapSamples comment_gaps(const ThreadSet& threads, const DocLabels& labels, const std::string& target) {
  GapSamples g;
  for (const auto& t : threads.threads) {
    if (label_of(labels, t.post->id) == target) {
      ++g.target_threads;
      continue;
    }
    std::size_t prev = 0;
    for (const auto& r : detect_shifts(t, labels, target)) {
      if (!r.is_shift) continue;
      if (prev == 0) g.first_gaps.push_back(r.position);
      else g.inter_gaps.push_back(r.position - prev);
      prev = r.position;
    }
    if (prev == 0 && !t.comments.empty()) ++g.censored;
  }
  return g;
}

inline MannWhitneyResult compare_gap_distributions(const std::vector<std::size_t>& first,
                                                   const std::vector<std::size_t>& inter) {
  return mann_whitney(std::vector<double>(first.begin(), first.end()), std::vector<double>(inter.begin(), inter.end()));
}

struct TopicRow {
  std::string topic;
  std::size_t n_posts = 0;
  std::size_t comments = 0;
  std::size_t target_comments = 0;

  double pct_target() const {
    return comments ? 100.0 * static_cast<double>(target_comments) / static_cast<double>(comments) : kUndefined;
  }
};

struct TopicOptions {
  std::size_t min_posts = 100;
  std::set<std::string> excluded;
  bool non_target_posts_only = true;
};

// Topics with at least min_posts posts, ranked by share of target comments
// (descending, ties by name). Excluded topics are removed without touching
// other rows.
inline std::vector<TopicRow> topic_politicization(const ThreadSet& threads, const DocLabels& labels,
                                                  const std::string& target, const TopicOptions& opts = {}) {
  std::map<std::string, TopicRow> rows;
  bool any_topic = false;
  for (const auto& t : threads.threads) {
    if (!t.post->topic) continue;
    any_topic = true;
    if (opts.non_target_posts_only && label_of(labels, t.post->id) == target) continue;
    auto& row = rows[*t.post->topic];
    row.topic = *t.post->topic;
    ++row.n_posts;
    row.comments += t.comments.size();
    for (const auto* c : t.comments) row.target_comments += label_of(labels, c->id) == target ? 1 : 0;
  }
  if (!any_topic) throw DataError("topic analysis needs post topic metadata: no post carries a 'topic' value");
  std::vector<TopicRow> out;
  for (auto& [name, row] : rows) {
    if (row.n_posts < opts.min_posts || opts.excluded.count(name)) continue;
    out.push_back(row);
  }
  std::sort(out.begin(), out.end(), [](const TopicRow& a, const TopicRow& b) {
    const double pa = a.pct_target(), pb = b.pct_target();
    const bool na = std::isnan(pa), nb = std::isnan(pb);
    if (na != nb) return nb;
    if (!na && pa != pb) return pa > pb;
    return a.topic < b.topic;
  });
  return out;
}

// ---------------------------------------------------------------------------
// CSV writers
// ---------------------------------------------------------------------------

inline void write_shifts_csv(std::ostream& out, const std::vector<ShiftRecord>& records) {
  out << "thread_id,comment_id,position,is_shift\n";
  for (const auto& r : records)
    out << csv_field(r.thread_id) << ',' << csv_field(r.comment_id) << ',' << r.position << ','
        << (r.is_shift ? 1 : 0) << '\n';
}

inline void write_weekly_csv(std::ostream& out, const std::vector<WeekBucket>& series) {
  out << "week_start,ratio,ci_lo,ci_hi,n\n";
  for (const auto& b : series)
    out << format_date(b.week_start) << ',' << fmt_real(b.ratio) << ',' << fmt_real(b.ci.lo) << ','
        << fmt_real(b.ci.hi) << ',' << b.n << '\n';
}

inline void write_topics_csv(std::ostream& out, const std::vector<TopicRow>& rows) {
  out << "topic,n_posts,pct_target_comments\n";
  for (const auto& r : rows) out << csv_field(r.topic) << ',' << r.n_posts << ',' << fmt_real(r.pct_target(), 4) << '\n';
}

}  // namespace politishift
