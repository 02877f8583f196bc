#pragma once

// Text features: tokenization with diacritic folding, TF-IDF vectors for the
// first learning step, and mean-pooled word embeddings for the second.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "common.hpp"

namespace politishift {

using TokenList = std::vector<std::string>;

namespace detail {

// Decodes one UTF-8 sequence starting at s[i]; advances i. Invalid bytes
// decode to U+FFFD and consume a single byte.
inline char32_t next_code_point(std::string_view s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  int len = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
  } else {
    ++i;
    return 0xFFFD;
  }
  for (int k = 1; k < len; ++k) {
    const int c = cont(static_cast<std::size_t>(k));
    if (c < 0) {
      ++i;
      return 0xFFFD;
    }
    cp = (cp << 6) | static_cast<char32_t>(c);
  }
  i += static_cast<std::size_t>(len);
  return cp;
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

// Base letters for U+00C0..U+00FF; '\0' marks a non-letter, '*' a digraph.
inline constexpr char kLatin1FoldData[] =
    "aaaaaa*ceeeeiiii"    // C0-CF
    "dnooooo\0ouuuuy**"   // D0-DF (D7 multiplication sign, DE thorn, DF sharp s)
    "aaaaaa*ceeeeiiii"    // E0-EF
    "dnooooo\0ouuuuy*y";  // F0-FF
inline constexpr std::string_view kLatin1Fold{kLatin1FoldData, 64};

// Base letters for U+0100..U+017F; '*' marks a digraph.
inline constexpr std::string_view kLatinExtAFold =
    "aaaaaaccccccccdd"   // 0100
    "ddeeeeeeeeeegggg"   // 0110
    "gggghhhhiiiiiiii"   // 0120
    "ii**jjkkklllllll"   // 0130
    "lllnnnnnnnnnoooo"   // 0140
    "oo**rrrrrrssssss"   // 0150
    "ssttttttuuuuuuuu"   // 0160
    "uuuuwwyyyzzzzzzs";  // 0170

inline std::string_view digraph(char32_t cp) {
  switch (cp) {
    case 0xC6: case 0xE6: return "ae";
    case 0xDE: case 0xFE: return "th";
    case 0xDF: return "ss";
    case 0x132: case 0x133: return "ij";
    case 0x152: case 0x153: return "oe";
    default: return "";
  }
}

enum class CharClass { separator, letter, combining, hash, at };

inline bool is_symbol_block(char32_t cp) {
  return (cp >= 0x80 && cp <= 0xBF) || (cp >= 0x2000 && cp <= 0x2BFF) ||
         (cp >= 0x3000 && cp <= 0x303F) || (cp >= 0xD800 && cp <= 0xF8FF) ||
         (cp >= 0xFE00 && cp <= 0xFE0F) || (cp >= 0xFE30 && cp <= 0xFE4F) ||
         (cp >= 0xFF00 && cp <= 0xFF0F) || (cp >= 0x1F000 && cp <= 0x1FAFF) ||
         cp == 0xFFFD || cp == 0xFEFF || cp == 0xD7 || cp == 0xF7;
}

inline CharClass classify(char32_t cp) {
  if (cp < 0x80) {
    if (cp == '#') return CharClass::hash;
    if (cp == '@') return CharClass::at;
    return std::isalnum(static_cast<int>(cp)) ? CharClass::letter : CharClass::separator;
  }
  if (cp >= 0x300 && cp <= 0x36F) return CharClass::combining;
  if (is_symbol_block(cp)) return CharClass::separator;
  return CharClass::letter;
}

// Appends the lowercased, diacritic-folded form of a letter code point.
inline void append_folded(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(std::tolower(static_cast<int>(cp)));
    return;
  }
  if (cp >= 0xC0 && cp <= 0x17F) {
    const char base = cp <= 0xFF ? kLatin1Fold[cp - 0xC0] : kLatinExtAFold[cp - 0x100];
    if (base == '*') {
      out += digraph(cp);
    } else if (base != '\0') {
      out += base;
    }
    return;
  }
  // Greek and Cyrillic capitals.
  if (cp >= 0x391 && cp <= 0x3A9) cp += 0x20;
  else if (cp >= 0x410 && cp <= 0x42F) cp += 0x20;
  else if (cp >= 0x400 && cp <= 0x40F) cp += 0x50;
  append_utf8(out, cp);
}

}  // namespace detail

// Lowercased, diacritic-folded tokens. Letters and digits form words; a '#'
// or '@' directly before a word is kept as its prefix; everything else
// separates.
inline TokenList tokenize(std::string_view text) {
  TokenList tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && current != "#" && current != "@") tokens.push_back(current);
    current.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const char32_t cp = detail::next_code_point(text, i);
    switch (detail::classify(cp)) {
      case detail::CharClass::letter:
        detail::append_folded(current, cp);
        break;
      case detail::CharClass::combining:
        break;
      case detail::CharClass::hash:
      case detail::CharClass::at:
        flush();
        current = static_cast<char>(cp);
        break;
      case detail::CharClass::separator:
        flush();
        break;
    }
  }
  flush();
  return tokens;
}

inline std::string join_tokens(const TokenList& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

// ---------------------------------------------------------------------------
// sparse vectors and TF-IDF
// ---------------------------------------------------------------------------

struct SparseVector {
  std::vector<std::uint32_t> indices;  // strictly increasing
  std::vector<double> values;          // nonzero
  std::size_t dimension = 0;

  std::size_t nnz() const { return indices.size(); }
  bool empty() const { return indices.empty(); }
  double norm() const {
    double s = 0.0;
    for (double v : values) s += v * v;
    return std::sqrt(s);
  }
};

// Sorted term list plus reverse index; column index = position in `terms`.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> sorted_terms) : terms_(std::move(sorted_terms)) {
    index_.reserve(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) index_.emplace(terms_[i], static_cast<std::uint32_t>(i));
  }

  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  const std::vector<std::string>& terms() const { return terms_; }

  // Column index or -1 when out of vocabulary.
  std::int64_t find(const std::string& term) const {
    auto it = index_.find(term);
    return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
  }

 private:
  std::vector<std::string> terms_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

struct TfidfOptions {
  std::size_t min_df = 2;
};

class TfidfModel {
 public:
  TfidfModel() = default;
  TfidfModel(std::shared_ptr<const Vocabulary> vocab, std::vector<double> idf, std::size_t document_count,
             std::size_t min_df)
      : vocab_(std::move(vocab)), idf_(std::move(idf)), document_count_(document_count), min_df_(min_df) {}

  const Vocabulary& vocabulary() const { return *vocab_; }
  std::shared_ptr<const Vocabulary> shared_vocabulary() const { return vocab_; }
  const std::vector<double>& idf() const { return idf_; }
  std::size_t document_count() const { return document_count_; }
  std::size_t min_df() const { return min_df_; }
  std::size_t dimension() const { return vocab_ ? vocab_->size() : 0; }

  double idf(const std::string& term) const {
    const auto col = vocab_->find(term);
    return col < 0 ? 0.0 : idf_[static_cast<std::size_t>(col)];
  }

  // Raw in-vocabulary term counts (no weighting, no normalization).
  SparseVector counts(const TokenList& doc) const {
    std::map<std::uint32_t, double> acc;
    for (const auto& tok : doc) {
      const auto col = vocab_->find(tok);
      if (col >= 0) acc[static_cast<std::uint32_t>(col)] += 1.0;
    }
    SparseVector out;
    out.dimension = dimension();
    for (const auto& [col, c] : acc) {
      out.indices.push_back(col);
      out.values.push_back(c);
    }
    return out;
  }

  // count x idf, L2-normalized; all-OOV documents give the zero vector.
  SparseVector transform(const TokenList& doc) const {
    SparseVector out = counts(doc);
    for (std::size_t k = 0; k < out.nnz(); ++k) out.values[k] *= idf_[out.indices[k]];
    const double n = out.norm();
    if (n > 0.0)
      for (double& v : out.values) v /= n;
    return out;
  }

  void save(std::ostream& os) const {
    os << "politishift-tfidf v1\n";
    os << document_count_ << ' ' << min_df_ << ' ' << dimension() << '\n';
    for (std::size_t i = 0; i < dimension(); ++i) os << vocab_->terms()[i] << '\t' << hexfloat(idf_[i]) << '\n';
  }

  static TfidfModel load(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "politishift-tfidf v1") throw DataError("not a tfidf model file");
    std::size_t docs = 0, min_df = 0, dim = 0;
    if (!std::getline(is, line)) throw DataError("truncated tfidf model file");
    std::istringstream hdr(line);
    if (!(hdr >> docs >> min_df >> dim)) throw DataError("bad tfidf model header");
    std::vector<std::string> terms;
    std::vector<double> idf;
    for (std::size_t i = 0; i < dim; ++i) {
      if (!std::getline(is, line)) throw DataError("truncated tfidf model file");
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw DataError("bad tfidf model row");
      terms.push_back(line.substr(0, tab));
      idf.push_back(parse_hexfloat(line.substr(tab + 1)));
    }
    return TfidfModel(std::make_shared<Vocabulary>(std::move(terms)), std::move(idf), docs, min_df);
  }

 private:
  std::shared_ptr<const Vocabulary> vocab_ = std::make_shared<Vocabulary>();
  std::vector<double> idf_;
  std::size_t document_count_ = 0;
  std::size_t min_df_ = 0;
};

// Smoothed idf: ln((1 + N) / (1 + df)) + 1.
inline TfidfModel fit_tfidf(const std::vector<TokenList>& docs, TfidfOptions opts = {}) {
  if (docs.empty()) throw DataError("fit_tfidf: no training documents");
  std::map<std::string, std::size_t> df;
  for (const auto& doc : docs) {
    std::vector<std::string> uniq(doc.begin(), doc.end());
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (auto& t : uniq) ++df[t];
  }
  std::vector<std::string> terms;
  std::vector<double> idf;
  const double n = static_cast<double>(docs.size());
  for (const auto& [term, count] : df) {
    if (count < opts.min_df) continue;
    terms.push_back(term);
    idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  if (terms.empty()) warn("fit_tfidf: vocabulary is empty (no term reaches min_df)");
  return TfidfModel(std::make_shared<Vocabulary>(std::move(terms)), std::move(idf), docs.size(), opts.min_df);
}

// ---------------------------------------------------------------------------
// embeddings
// ---------------------------------------------------------------------------

using DenseVector = std::vector<double>;

class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dimension) : dim_(dimension) {}

  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return rows_.size(); }
  std::size_t duplicates() const { return duplicates_; }

  void set(const std::string& token, DenseVector v) {
    if (v.size() != dim_) throw DataError("embedding dimension mismatch for token '" + token + "'");
    auto [it, inserted] = rows_.insert_or_assign(token, std::move(v));
    (void)it;
    if (!inserted) ++duplicates_;
  }

  const DenseVector* find(const std::string& token) const {
    auto it = rows_.find(token);
    return it == rows_.end() ? nullptr : &it->second;
  }

  // Writes "token v1 ... vd" rows in token order, with a "count d" header.
  void save(std::ostream& os) const {
    std::vector<const std::string*> keys;
    keys.reserve(rows_.size());
    for (const auto& kv : rows_) keys.push_back(&kv.first);
    std::sort(keys.begin(), keys.end(), [](auto* a, auto* b) { return *a < *b; });
    os << rows_.size() << ' ' << dim_ << '\n';
    char buf[32];
    for (const auto* k : keys) {
      os << *k;
      for (double v : rows_.at(*k)) {
        std::snprintf(buf, sizeof buf, " %.17g", v);
        os << buf;
      }
      os << '\n';
    }
  }

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, DenseVector> rows_;
  std::size_t duplicates_ = 0;
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string f;
  while (ss >> f) out.push_back(f);
  return out;
}

inline bool is_unsigned_integer(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

}  // namespace detail

// Reads "token v1 ... vd" rows. A first line of exactly two integers "count d"
// is treated as a header when the following row has d values. Table tokens
// are normalized with the tokenizer so lookups match folded document tokens.
inline EmbeddingTable load_embeddings(std::istream& is) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(is, line)) {
    auto fields = detail::split_ws(line);
    if (!fields.empty()) rows.push_back(std::move(fields));
  }
  std::size_t start = 0;
  if (!rows.empty() && rows[0].size() == 2 && detail::is_unsigned_integer(rows[0][0]) &&
      detail::is_unsigned_integer(rows[0][1])) {
    const std::size_t d = std::stoul(rows[0][1]);
    if (rows.size() == 1 || rows[1].size() == d + 1) start = 1;
  }
  if (start >= rows.size()) throw DataError("embedding file has no vectors");
  const std::size_t dim = rows[start].size() - 1;
  if (dim == 0) throw DataError("embedding rows carry no components");
  EmbeddingTable table(dim);
  for (std::size_t r = start; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() != dim + 1)
      throw DataError("inconsistent embedding dimension at row " + std::to_string(r + 1) + ": expected " +
                      std::to_string(dim) + ", got " + std::to_string(f.size() - 1));
    DenseVector v(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      char* end = nullptr;
      v[k] = std::strtod(f[k + 1].c_str(), &end);
      if (*end != '\0' || !std::isfinite(v[k]))
        throw DataError("non-numeric embedding component at row " + std::to_string(r + 1));
    }
    const auto norm = tokenize(f[0]);
    table.set(norm.size() == 1 ? norm[0] : f[0], std::move(v));
  }
  if (table.duplicates() > 0)
    warn("load_embeddings: " + std::to_string(table.duplicates()) + " duplicate token(s); last occurrence kept");
  return table;
}

inline EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read embedding file: " + path);
  return load_embeddings(in);
}

struct DocEmbedding {
  DenseVector vector;
  bool featureless = false;  // no token found in the table
};

// Component-wise mean over in-table tokens.
inline DocEmbedding embed_doc(const TokenList& doc, const EmbeddingTable& table) {
  DocEmbedding out{DenseVector(table.dimension(), 0.0), false};
  std::size_t hits = 0;
  for (const auto& tok : doc) {
    if (const auto* v = table.find(tok)) {
      for (std::size_t k = 0; k < v->size(); ++k) out.vector[k] += (*v)[k];
      ++hits;
    }
  }
  if (hits == 0) {
    out.featureless = true;
    return out;
  }
  for (double& x : out.vector) x /= static_cast<double>(hits);
  return out;
}

}  // namespace politishift
