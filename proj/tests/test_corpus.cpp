#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include <politishift/corpus.hpp>

using namespace politishift;

namespace {

std::string rec(const std::string& id, const std::string& kind, const std::string& parent, const std::string& text,
                const std::string& ts = "100", const std::string& topic = "null") {
  return R"({"id":")" + id + R"(","platform":"youtube","kind":")" + kind + R"(","parent_id":)" +
         (parent.empty() ? "null" : "\"" + parent + "\"") + R"(,"text":")" + text + R"(","timestamp":)" + ts +
         R"(,"author_id":"u1","topic":)" + topic + "}";
}

ParseResult parse(const std::string& s) {
  std::istringstream in(s);
  return parse_records(in);
}

Document doc(std::string id, DocKind kind, std::optional<std::string> parent, std::string text, std::int64_t ts) {
  Document d;
  d.id = std::move(id);
  d.kind = kind;
  d.parent_id = std::move(parent);
  d.text = std::move(text);
  d.timestamp = ts;
  d.author_id = "a";
  return d;
}

}  // namespace

TEST(ParseRecords, EmptyStream) {
  const auto r = parse("");
  EXPECT_EQ(r.corpus.size(), 0u);
  EXPECT_TRUE(r.rejections.empty());
}

TEST(ParseRecords, PostAndTwoComments) {
  const auto r = parse(rec("p1", "post", "", "hello") + "\n" + rec("c1", "comment", "p1", "a") + "\n" +
                       rec("c2", "comment", "p1", "b") + "\n");
  EXPECT_EQ(r.corpus.size(), 3u);
  EXPECT_TRUE(r.rejections.empty());
  EXPECT_EQ(r.corpus[1].parent_id.value(), "p1");
}

TEST(ParseRecords, BadTimestampRejected) {
  const auto r = parse(rec("p1", "post", "", "x", "\"abc\""));
  EXPECT_EQ(r.corpus.size(), 0u);
  ASSERT_EQ(r.rejections.size(), 1u);
  EXPECT_EQ(r.rejections[0].line_no, 1u);
}

TEST(ParseRecords, RejectionReasons) {
  const auto r = parse("not json\n" + rec("c", "comment", "", "x") + "\n" + rec("p", "post", "q", "x") + "\n" +
                       rec("k", "reply", "", "x") + "\n" + R"({"id":"z"})" + "\n" + rec("ok", "post", "", "fine") +
                       "\n");
  EXPECT_EQ(r.corpus.size(), 1u);
  ASSERT_EQ(r.rejections.size(), 5u);
  EXPECT_EQ(r.rejections[0].reason, "malformed json");
  EXPECT_EQ(r.rejections[1].reason, "comment without parent_id");
  EXPECT_EQ(r.rejections[2].reason, "post with parent_id");
  EXPECT_EQ(r.rejections[3].line_no, 4u);
  EXPECT_EQ(r.rejections[4].line_no, 5u);
}

TEST(ParseRecords, DuplicateIdIsError) {
  EXPECT_THROW(parse(rec("p", "post", "", "x") + "\n" + rec("p", "post", "", "y") + "\n"), DataError);
}

TEST(ParseRecords, RoundTrip) {
  const std::string input = rec("p1", "post", "", "Eleição \\\"2022\\\" ✓", "1667000000", "\"economy\"") + "\n" +
                            rec("c1", "comment", "p1", "tab\\there", "-5") + "\n";
  const auto a = parse(input);
  ASSERT_TRUE(a.rejections.empty());
  std::ostringstream out;
  write_records(out, a.corpus);
  const auto b = parse(out.str());
  EXPECT_TRUE(b.rejections.empty());
  EXPECT_EQ(a.corpus, b.corpus);
  EXPECT_EQ(b.corpus[0].topic.value(), "economy");
}

TEST(ParseReport, Csv) {
  std::ostringstream out;
  write_parse_report(out, {{3, "bad kind: x,y"}});
  EXPECT_EQ(out.str(), "line_no,reason\n3,\"bad kind: x,y\"\n");
}

TEST(FilterShortComments, FiveRemovedSixKept) {
  Corpus c({doc("p", DocKind::post, {}, "a", 0), doc("c5", DocKind::comment, "p", "one two three four five", 1),
            doc("c6", DocKind::comment, "p", "one two three four five six", 2)});
  const auto f = filter_short_comments(c);
  ASSERT_EQ(f.size(), 2u);
  EXPECT_FALSE(f.contains("c5"));
  EXPECT_TRUE(f.contains("c6"));
}

TEST(FilterShortComments, PostsOnlyUnchanged) {
  Corpus c({doc("p", DocKind::post, {}, "a", 0), doc("q", DocKind::post, {}, "", 0)});
  EXPECT_EQ(filter_short_comments(c), c);
}

TEST(BuildThreads, TimestampOrder) {
  Corpus c({doc("P1", DocKind::post, {}, "x", 0), doc("C1", DocKind::comment, "P1", "x", 10),
            doc("C2", DocKind::comment, "P1", "x", 5)});
  const auto t = build_threads(c);
  ASSERT_EQ(t.threads.size(), 1u);
  ASSERT_EQ(t.threads[0].comments.size(), 2u);
  EXPECT_EQ(t.threads[0].comments[0]->id, "C2");
  EXPECT_EQ(t.threads[0].comments[1]->id, "C1");
}

TEST(BuildThreads, OrphanReported) {
  Corpus c({doc("P1", DocKind::post, {}, "x", 0), doc("C1", DocKind::comment, "missing", "x", 1)});
  const auto t = build_threads(c);
  EXPECT_TRUE(t.threads[0].comments.empty());
  EXPECT_EQ(t.orphans, std::vector<std::string>{"C1"});
}

TEST(BuildThreads, IdTieBreak) {
  Corpus c({doc("P", DocKind::post, {}, "x", 0), doc("b", DocKind::comment, "P", "x", 7),
            doc("a", DocKind::comment, "P", "x", 7)});
  const auto t = build_threads(c);
  EXPECT_EQ(t.threads[0].comments[0]->id, "a");
  EXPECT_EQ(t.threads[0].comments[1]->id, "b");
}

TEST(BuildThreads, RandomInvariants) {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 50; ++round) {
    std::vector<Document> docs;
    const int posts = 1 + static_cast<int>(rng() % 4);
    for (int p = 0; p < posts; ++p) docs.push_back(doc("p" + std::to_string(p), DocKind::post, {}, "x", 0));
    const int comments = static_cast<int>(rng() % 15);
    for (int k = 0; k < comments; ++k)
      docs.push_back(doc("c" + std::to_string(k), DocKind::comment, "p" + std::to_string(rng() % (posts + 1)), "x",
                         static_cast<std::int64_t>(rng() % 4)));
    Corpus c(docs);
    const auto t = build_threads(c);
    std::size_t placed = 0;
    for (const auto& th : t.threads) {
      for (std::size_t i = 0; i < th.comments.size(); ++i) {
        EXPECT_EQ(*th.comments[i]->parent_id, th.post->id);
        if (i) {
          const auto* a = th.comments[i - 1];
          const auto* b = th.comments[i];
          EXPECT_TRUE(a->timestamp < b->timestamp || (a->timestamp == b->timestamp && a->id < b->id));
        }
      }
      placed += th.comments.size();
    }
    EXPECT_EQ(placed + t.orphans.size(), static_cast<std::size_t>(comments));
  }
}
