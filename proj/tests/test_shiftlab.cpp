#include <gtest/gtest.h>

#include <random>

#include <politishift/shiftlab.hpp>

using namespace politishift;

namespace {

constexpr std::int64_t kDay = 86400;
const std::int64_t kStart = parse_date("2022-09-05");  // Monday

// Threads given as label strings, post first: "PNNP" is a political post with
// comments N, N, P in time order. One comment per day after the post.
struct Fixture {
  Corpus corpus;
  DocLabels labels;

  explicit Fixture(const std::vector<std::string>& threads, const std::vector<std::string>& topics = {}) {
    std::vector<Document> docs;
    for (std::size_t t = 0; t < threads.size(); ++t) {
      Document post;
      post.id = "p" + std::to_string(t);
      post.text = "post";
      post.author_id = "a";
      post.timestamp = kStart + static_cast<std::int64_t>(t) * kDay;
      if (t < topics.size()) post.topic = topics[t];
      labels[post.id] = threads[t][0] == 'P' ? "political" : "non_political";
      docs.push_back(post);
      for (std::size_t c = 1; c < threads[t].size(); ++c) {
        Document d;
        d.id = post.id + "c" + std::to_string(c);
        d.kind = DocKind::comment;
        d.parent_id = post.id;
        d.text = "comment";
        d.author_id = "b";
        d.timestamp = post.timestamp + static_cast<std::int64_t>(c) * kDay;
        labels[d.id] = threads[t][c] == 'P' ? "political" : "non_political";
        docs.push_back(d);
      }
    }
    corpus = Corpus(std::move(docs));
  }
};

}  // namespace

TEST(Shifts, DetectExamples) {
  Fixture f({"NNPN", "PNPN"});
  const auto threads = build_threads(f.corpus);
  const auto a = detect_shifts(threads.threads[0], f.labels, "political");
  ASSERT_EQ(a.size(), 3u);
  EXPECT_FALSE(a[0].is_shift);
  EXPECT_TRUE(a[1].is_shift);
  EXPECT_EQ(a[1].position, 2u);
  EXPECT_FALSE(a[2].is_shift);
  for (const auto& r : detect_shifts(threads.threads[1], f.labels, "political")) EXPECT_FALSE(r.is_shift);
}

TEST(Shifts, MissingLabelThrows) {
  Fixture f({"NP"});
  f.labels.erase("p0c1");
  EXPECT_THROW(detect_shifts(build_threads(f.corpus).threads[0], f.labels, "political"), DataError);
}

TEST(Shifts, FractionsAndHistogram) {
  Fixture f({"NPPNN", "PPPN", "N", "NNNN"});
  const auto threads = build_threads(f.corpus);
  const auto s = thread_shifts(threads, f.labels, "political");
  ASSERT_EQ(s.size(), 3u);  // comment-less thread skipped
  EXPECT_DOUBLE_EQ(s[0].shift_fraction(), 0.5);
  EXPECT_DOUBLE_EQ(s[1].shift_fraction(), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(s[2].shift_fraction(), 0.0);
  const auto d = stay_and_shift_distributions(threads, f.labels, "political", 20);
  EXPECT_EQ(d.stay.total, 1u);
  EXPECT_EQ(d.stay.counts[13], 1u);  // 2/3
  EXPECT_EQ(d.shift.counts[10], 1u);
  EXPECT_EQ(d.shift.counts[0], 1u);
  EXPECT_DOUBLE_EQ(d.at_least_one_fraction(), 0.5);
  Histogram h(20);
  h.add(1.0);
  EXPECT_EQ(h.counts[19], 1u);
}

TEST(Shifts, WeeklySeriesCoversRange) {
  Fixture f({"NPN", "NNN"});
  const auto range = parse_date_range("2022-09-01..2022-10-01");
  const auto w = weekly_shift_ratio(build_threads(f.corpus), f.labels, "political", range);
  ASSERT_EQ(w.size(), 5u);  // weeks of Aug 29, Sep 5, 12, 19, 26
  EXPECT_EQ(format_date(w.front().week_start), "2022-08-29");
  EXPECT_EQ(w[0].n, 0u);
  EXPECT_TRUE(std::isnan(w[0].ratio));
  EXPECT_EQ(w[1].n, 4u);
  EXPECT_EQ(w[1].shifts, 1u);
  EXPECT_DOUBLE_EQ(w[1].ratio, 0.25);
  EXPECT_LE(w[1].ci.lo, 0.25);
  EXPECT_GE(w[1].ci.hi, 0.25);
}

TEST(Shifts, GapsExample) {
  Fixture f({"NNPNPP", "NNN", "PNP"});
  const auto g = comment_gaps(build_threads(f.corpus), f.labels, "political");
  EXPECT_EQ(g.first_gaps, std::vector<std::size_t>({2}));
  EXPECT_EQ(g.inter_gaps, std::vector<std::size_t>({2, 1}));
  EXPECT_EQ(g.censored, 1u);
  EXPECT_EQ(g.target_threads, 1u);
}

TEST(Shifts, CdfClasses) {
  Fixture f({"NPN", "NNN", "PPN"});
  const auto threads = build_threads(f.corpus);
  const auto cdf = shift_cdf(threads, f.labels, "political", PostClass::non_target);
  EXPECT_EQ(cdf.size(), 2u);
  EXPECT_DOUBLE_EQ(cdf(0.0), 0.5);
  EXPECT_DOUBLE_EQ(cdf(50.0), 1.0);
  EXPECT_DOUBLE_EQ(shift_cdf(threads, f.labels, "political", PostClass::target)(49.0), 0.0);
  Fixture g({"NNN"});
  EXPECT_THROW(shift_cdf(build_threads(g.corpus), g.labels, "political", PostClass::target), DataError);
}

TEST(Topics, RankAndExclude) {
  Fixture f({"NPP", "NPN", "NNN", "NPP", "PPP"}, {"economy", "crime", "crime", "pets", "economy"});
  TopicOptions opts;
  opts.min_posts = 1;
  auto rows = topic_politicization(build_threads(f.corpus), f.labels, "political", opts);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].topic, "economy");  // 100, ties broken by name
  EXPECT_EQ(rows[1].topic, "pets");
  EXPECT_EQ(rows[2].topic, "crime");
  EXPECT_DOUBLE_EQ(rows[2].pct_target(), 25.0);
  opts.excluded = {"pets"};
  auto kept = topic_politicization(build_threads(f.corpus), f.labels, "political", opts);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[1].pct_target(), rows[2].pct_target());
  opts.min_posts = 2;
  EXPECT_EQ(topic_politicization(build_threads(f.corpus), f.labels, "political", opts).size(), 1u);
  Fixture none({"NPP"});
  EXPECT_THROW(topic_politicization(build_threads(none.corpus), none.labels, "political"), DataError);
}

// Independent recount over random threads.
TEST(Shifts, RandomOracle) {
  std::mt19937_64 rng(21);
  std::vector<std::string> spec;
  std::vector<std::string> topics;
  const std::vector<std::string> names{"a", "b", "c"};
  for (int t = 0; t < 200; ++t) {
    std::string s;
    const auto len = 1 + rng() % 12;
    for (std::size_t i = 0; i < len; ++i) s += rng() % 3 == 0 ? 'P' : 'N';
    spec.push_back(s);
    topics.push_back(names[rng() % 3]);
  }
  Fixture f(spec, topics);
  const auto threads = build_threads(f.corpus);

  std::size_t shifts = 0, detected = 0;
  std::vector<std::size_t> first, inter;
  std::vector<double> pct_non;
  std::map<std::string, std::pair<std::size_t, std::size_t>> topic_counts;
  for (std::size_t t = 0; t < spec.size(); ++t) {
    const auto& s = spec[t];
    for (const auto& r : detect_shifts(threads.threads[t], f.labels, "political")) detected += r.is_shift;
    if (s[0] == 'P') continue;
    std::size_t prev = 0, moved = 0;
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (s[i] != 'P') continue;
      ++shifts;
      ++moved;
      if (prev == 0) first.push_back(i);
      else inter.push_back(i - prev);
      prev = i;
    }
    if (s.size() > 1) pct_non.push_back(100.0 * static_cast<double>(moved) / static_cast<double>(s.size() - 1));
    topic_counts[topics[t]].first += s.size() - 1;
    topic_counts[topics[t]].second += moved;
  }
  EXPECT_EQ(detected, shifts);
  const auto g = comment_gaps(threads, f.labels, "political");
  EXPECT_EQ(g.first_gaps, first);
  EXPECT_EQ(g.inter_gaps, inter);
  const auto cdf = shift_cdf(threads, f.labels, "political", PostClass::non_target);
  EXPECT_EQ(cdf.size(), pct_non.size());
  for (double x : {0.0, 10.0, 33.4, 50.0, 99.0, 100.0}) {
    const auto n = std::count_if(pct_non.begin(), pct_non.end(), [&](double v) { return v <= x; });
    EXPECT_DOUBLE_EQ(cdf(x), static_cast<double>(n) / static_cast<double>(pct_non.size()));
  }
  TopicOptions opts;
  opts.min_posts = 1;
  for (const auto& row : topic_politicization(threads, f.labels, "political", opts)) {
    EXPECT_EQ(row.comments, topic_counts[row.topic].first);
    EXPECT_EQ(row.target_comments, topic_counts[row.topic].second);
  }
  std::size_t weekly = 0;
  for (const auto& b : weekly_shift_ratio(threads, f.labels, "political")) weekly += b.shifts;
  EXPECT_EQ(weekly, shifts);
}
