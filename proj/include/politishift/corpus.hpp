#pragma once

// Post/comment records: line-delimited JSON ingestion, the comment length
// filter and thread assembly.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "textfeat.hpp"

namespace politishift {

enum class Platform { youtube, twitter, tiktok, synthetic, other };
enum class DocKind { post, comment };

inline std::string to_string(Platform p) {
  switch (p) {
    case Platform::youtube: return "youtube";
    case Platform::twitter: return "twitter";
    case Platform::tiktok: return "tiktok";
    case Platform::synthetic: return "synthetic";
    case Platform::other: return "other";
  }
  return "other";
}

inline Platform platform_from_string(const std::string& s) {
  if (s == "youtube") return Platform::youtube;
  if (s == "twitter") return Platform::twitter;
  if (s == "tiktok") return Platform::tiktok;
  if (s == "synthetic") return Platform::synthetic;
  return Platform::other;
}

inline std::string to_string(DocKind k) { return k == DocKind::post ? "post" : "comment"; }

struct Document {
  std::string id;
  Platform platform = Platform::other;
  DocKind kind = DocKind::post;
  std::optional<std::string> parent_id;  // set iff kind == comment
  std::string text;
  std::int64_t timestamp = 0;  // UTC seconds
  std::string author_id;
  std::optional<std::string> topic;

  bool is_post() const { return kind == DocKind::post; }
  bool operator==(const Document&) const = default;
};

// Immutable document collection with an id index and cached token lists.
class Corpus {
 public:
  Corpus() = default;

  // Throws DataError on duplicate ids.
  explicit Corpus(std::vector<Document> docs) : docs_(std::move(docs)) {
    index_.reserve(docs_.size());
    tokens_.reserve(docs_.size());
    for (std::size_t i = 0; i < docs_.size(); ++i) {
      if (!index_.emplace(docs_[i].id, i).second) throw DataError("duplicate document id: " + docs_[i].id);
      tokens_.push_back(tokenize(docs_[i].text));
    }
  }

  std::size_t size() const { return docs_.size(); }
  bool empty() const { return docs_.empty(); }
  const std::vector<Document>& documents() const { return docs_; }
  const Document& operator[](std::size_t i) const { return docs_[i]; }
  const TokenList& tokens(std::size_t i) const { return tokens_[i]; }

  std::optional<std::size_t> find(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(const std::string& id) const { return index_.count(id) != 0; }

  bool operator==(const Corpus& other) const { return docs_ == other.docs_; }

 private:
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<TokenList> tokens_;
};

struct Rejection {
  std::size_t line_no = 0;  // 1-based
  std::string reason;
};

struct ParseResult {
  Corpus corpus;
  std::vector<Rejection> rejections;
};

namespace detail {

inline std::optional<std::string> optional_string_field(const nlohmann::json& rec, const char* name,
                                                        std::string& error) {
  if (!rec.contains(name)) {
    error = std::string("missing field: ") + name;
    return std::nullopt;
  }
  const auto& v = rec.at(name);
  if (v.is_null()) return std::nullopt;
  if (!v.is_string()) {
    error = std::string("bad field type: ") + name;
    return std::nullopt;
  }
  return v.get<std::string>();
}

// Parses one record or explains why it was rejected.
inline std::optional<Document> parse_record(const std::string& line, std::string& error) {
  nlohmann::json rec;
  try {
    rec = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    error = "malformed json";
    return std::nullopt;
  }
  if (!rec.is_object()) {
    error = "record is not an object";
    return std::nullopt;
  }
  for (const char* name : {"id", "platform", "kind", "text", "author_id"}) {
    if (!rec.contains(name)) {
      error = std::string("missing field: ") + name;
      return std::nullopt;
    }
    if (!rec.at(name).is_string()) {
      error = std::string("bad field type: ") + name;
      return std::nullopt;
    }
  }
  for (const char* name : {"parent_id", "timestamp", "topic"}) {
    if (!rec.contains(name)) {
      error = std::string("missing field: ") + name;
      return std::nullopt;
    }
  }
  Document doc;
  doc.id = rec["id"].get<std::string>();
  if (doc.id.empty()) {
    error = "empty id";
    return std::nullopt;
  }
  doc.platform = platform_from_string(rec["platform"].get<std::string>());
  const auto kind = rec["kind"].get<std::string>();
  if (kind == "post") {
    doc.kind = DocKind::post;
  } else if (kind == "comment") {
    doc.kind = DocKind::comment;
  } else {
    error = "bad kind: " + kind;
    return std::nullopt;
  }
  doc.text = rec["text"].get<std::string>();
  doc.author_id = rec["author_id"].get<std::string>();
  const auto& ts = rec["timestamp"];
  if (!ts.is_number_integer()) {
    error = "bad timestamp";
    return std::nullopt;
  }
  doc.timestamp = ts.get<std::int64_t>();
  error.clear();
  doc.parent_id = optional_string_field(rec, "parent_id", error);
  if (!error.empty()) return std::nullopt;
  doc.topic = optional_string_field(rec, "topic", error);
  if (!error.empty()) return std::nullopt;
  if (doc.kind == DocKind::comment && !doc.parent_id) {
    error = "comment without parent_id";
    return std::nullopt;
  }
  if (doc.kind == DocKind::post && doc.parent_id) {
    error = "post with parent_id";
    return std::nullopt;
  }
  return doc;
}

}  // namespace detail

// One JSON object per line. Malformed lines are skipped and reported;
// a duplicate id aborts the whole parse with DataError.
inline ParseResult parse_records(std::istream& in) {
  ParseResult result;
  std::vector<Document> docs;
  std::unordered_map<std::string, std::size_t> first_seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::string error;
    auto doc = detail::parse_record(line, error);
    if (!doc) {
      result.rejections.push_back({line_no, error});
      continue;
    }
    auto [it, inserted] = first_seen.emplace(doc->id, line_no);
    if (!inserted)
      throw DataError("duplicate id '" + doc->id + "' on lines " + std::to_string(it->second) + " and " +
                      std::to_string(line_no));
    docs.push_back(std::move(*doc));
  }
  result.corpus = Corpus(std::move(docs));
  return result;
}

inline void write_record(std::ostream& out, const Document& d) {
  nlohmann::ordered_json rec;
  rec["id"] = d.id;
  rec["platform"] = to_string(d.platform);
  rec["kind"] = to_string(d.kind);
  rec["parent_id"] = d.parent_id ? nlohmann::ordered_json(*d.parent_id) : nlohmann::ordered_json(nullptr);
  rec["text"] = d.text;
  rec["timestamp"] = d.timestamp;
  rec["author_id"] = d.author_id;
  rec["topic"] = d.topic ? nlohmann::ordered_json(*d.topic) : nlohmann::ordered_json(nullptr);
  out << rec.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
}

inline void write_records(std::ostream& out, const Corpus& corpus) {
  for (const auto& d : corpus.documents()) write_record(out, d);
}

inline void write_parse_report(std::ostream& out, const std::vector<Rejection>& rejections) {
  out << "line_no,reason\n";
  for (const auto& r : rejections) out << r.line_no << ',' << csv_field(r.reason) << '\n';
}

// Drops comments with token count <= min_tokens. Posts are always kept.
inline Corpus filter_short_comments(const Corpus& corpus, std::size_t min_tokens = 5) {
  std::vector<Document> kept;
  kept.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (corpus[i].is_post() || corpus.tokens(i).size() > min_tokens) kept.push_back(corpus[i]);
  }
  return Corpus(std::move(kept));
}

// A post and its comments ordered by (timestamp, id). Points into the Corpus
// it was built from, which must outlive it.
struct Thread {
  const Document* post = nullptr;
  std::vector<const Document*> comments;
};

struct ThreadSet {
  std::vector<Thread> threads;       // in post input order
  std::vector<std::string> orphans;  // comment ids whose parent is not a post in the corpus
};

inline ThreadSet build_threads(const Corpus& corpus) {
  ThreadSet out;
  std::unordered_map<std::string, std::size_t> thread_of;
  for (const auto& d : corpus.documents()) {
    if (!d.is_post()) continue;
    thread_of.emplace(d.id, out.threads.size());
    out.threads.push_back(Thread{&d, {}});
  }
  for (const auto& d : corpus.documents()) {
    if (d.is_post()) continue;
    auto it = thread_of.find(*d.parent_id);
    if (it == thread_of.end()) {
      out.orphans.push_back(d.id);
      continue;
    }
    out.threads[it->second].comments.push_back(&d);
  }
  for (auto& t : out.threads) {
    std::sort(t.comments.begin(), t.comments.end(), [](const Document* a, const Document* b) {
      if (a->timestamp != b->timestamp) return a->timestamp < b->timestamp;
      return a->id < b->id;
    });
  }
  if (!out.orphans.empty()) warn("build_threads: " + std::to_string(out.orphans.size()) + " orphan comment(s) excluded");
  return out;
}

}  // namespace politishift
