#pragma once

// The politishift command line: simulate, ingest, train, classify, eval,
// analyze and replay. `run` is the whole program minus process plumbing, so
// tests can drive it in-process.
//
// Exit codes: 0 ok, 1 usage, 2 data, 3 pipeline.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "baselines.hpp"
#include "common.hpp"
#include "corpus.hpp"
#include "metrics.hpp"
#include "pulearn.hpp"
#include "seed.hpp"
#include "shiftlab.hpp"
#include "simgen.hpp"
#include "stats.hpp"
#include "textfeat.hpp"

namespace politishift::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

// Sub-seed streams fanned out from --seed.
enum SeedStream : std::uint64_t { kSpySeed = 1, kGbdtSeed = 2, kHoldoutSeed = 3, kSimSeed = 4, kSearchSeed = 5 };

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string file_digest(const std::string& path) { return digest_hex(read_file(path)); }

// Minimal RFC 4180 reader: quoted fields may hold commas, quotes and newlines.
inline std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw DataError("csv: unterminated quoted field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

struct LabelRow {
  std::string label;
  double probability = kUndefined;
};

// id,label,probability
inline std::map<std::string, LabelRow> read_labels(const std::string& path) {
  const auto rows = parse_csv(read_file(path));
  if (rows.empty() || rows[0].size() < 2 || rows[0][0] != "id" || rows[0][1] != "label")
    throw DataError(path + ": expected a header starting with id,label");
  std::map<std::string, LabelRow> out;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& f = rows[r];
    if (f.size() < 2) throw DataError(path + ": short row " + std::to_string(r + 1));
    LabelRow row{f[1], kUndefined};
    if (f.size() > 2 && !f[2].empty()) row.probability = std::stod(f[2]);
    if (!out.emplace(f[0], row).second) throw DataError(path + ": duplicate id " + f[0]);
  }
  return out;
}

// One {"id": ..., "label": "political" | "non_political"} object per line.
inline LabelMap read_gold(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("gold file not found: " + path);
  std::istringstream in(read_file(path));
  LabelMap gold;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw DataError(path + ":" + std::to_string(n) + ": malformed json");
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("label") || !j["id"].is_string() || !j["label"].is_string())
      throw DataError(path + ":" + std::to_string(n) + ": want string fields id and label");
    const auto label = j["label"].get<std::string>();
    if (label != "political" && label != "non_political")
      throw DataError(path + ":" + std::to_string(n) + ": label must be political or non_political");
    if (!gold.emplace(j["id"].get<std::string>(), label == "political").second)
      throw DataError(path + ": duplicate id " + j["id"].get<std::string>());
  }
  return gold;
}

inline void write_gold(std::ostream& out, const Corpus& corpus, const GroundTruth& gt) {
  for (const auto& d : corpus.documents()) {
    ordered_json j;
    j["id"] = d.id;
    j["label"] = gt.political(d.id) ? "political" : "non_political";
    out << j.dump() << '\n';
  }
}

inline void write_labels(std::ostream& out, const Corpus& corpus, const Classification& cl) {
  out << "id,label,probability\n";
  for (std::size_t i = 0; i < corpus.size(); ++i)
    out << csv_field(corpus[i].id) << ',' << (cl.political[i] ? "political" : "non_political") << ','
        << fmt_real(cl.probability[i], 17) << '\n';
}

inline Corpus load_corpus(const std::string& path, std::size_t min_comment_tokens) {
  if (!fs::exists(path)) throw UsageError("corpus not found: " + path);
  std::istringstream in(read_file(path));
  auto parsed = parse_records(in);
  if (!parsed.rejections.empty())
    warn(path + ": " + std::to_string(parsed.rejections.size()) + " record(s) rejected; run ingest for a report");
  if (parsed.corpus.empty()) throw DataError(path + ": no valid records");
  return min_comment_tokens > 0 ? filter_short_comments(parsed.corpus, min_comment_tokens) : std::move(parsed.corpus);
}

inline EmbeddingTable load_table(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("embeddings not found: " + path);
  return load_embeddings(path);
}

// Collects everything needed to account for a run and writes manifest.json.
class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& argv) : start_(std::chrono::steady_clock::now()) {
    j_["command"] = std::move(command);
    j_["argv"] = argv;
    j_["config"] = ordered_json::object();
    j_["seeds"] = ordered_json::object();
    j_["inputs"] = ordered_json::object();
    j_["sizes"] = ordered_json::object();
    j_["outputs"] = ordered_json::object();
  }

  ordered_json& config() { return j_["config"]; }
  ordered_json& seeds() { return j_["seeds"]; }
  ordered_json& sizes() { return j_["sizes"]; }
  ordered_json& extra() { return j_; }

  void input(const std::string& role, const std::string& path) {
    j_["inputs"][role] = {{"path", path}, {"digest", file_digest(path)}};
  }

  void mark(const std::string& phase) {
    const auto now = std::chrono::steady_clock::now();
    timings_[phase] = std::chrono::duration<double, std::milli>(now - last_).count();
    last_ = now;
  }

  // Writes `body` to out_dir/name and records its digest.
  template <class F>
  void output(const fs::path& out_dir, const std::string& name, F&& body) {
    std::ostringstream ss;
    body(ss);
    const auto bytes = ss.str();
    std::ofstream out(out_dir / name, std::ios::binary);
    if (!out) throw UsageError("cannot write " + (out_dir / name).string());
    out << bytes;
    j_["outputs"][name] = digest_hex(bytes);
  }

  void write(const fs::path& out_dir) {
    ordered_json t = timings_;
    t["total_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    j_["timings_ms"] = t;
    std::ofstream out(out_dir / "manifest.json");
    if (!out) throw UsageError("cannot write manifest in " + out_dir.string());
    out << j_.dump(2) << '\n';
  }

 private:
  ordered_json j_;
  std::map<std::string, double> timings_;
  std::chrono::steady_clock::time_point start_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

inline fs::path prepare_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create output directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

inline ordered_json to_json(const GbdtConfig& g) {
  return {{"tree_count", g.tree_count},         {"max_depth", g.max_depth},
          {"learning_rate", g.learning_rate},   {"row_subsample", g.row_subsample},
          {"column_subsample", g.column_subsample}, {"min_samples_leaf", g.min_samples_leaf},
          {"lambda", g.lambda},                 {"rng_seed", g.rng_seed},
          {"threads", g.threads}};
}

// ---------------------------------------------------------------------------
// options shared by several commands
// ---------------------------------------------------------------------------

struct Common {
  std::uint64_t seed = 42;
  std::size_t threads = 1;
  std::string out_dir = "out";
  std::size_t min_comment_tokens = 5;
};

struct TrainOptions {
  std::string corpus, keywords = "preset:politics3", embeddings, model = "two-step";
  GbdtConfig gbdt;
  double spy_fraction = 0.10, noise_level = 0.15, nb_alpha = 1.0, holdout_fraction = 0.2, decision_threshold = 0.5;
  std::size_t search_trials = 0;
  bool keep_seed_keywords = false;
};

inline void add_gbdt_flags(CLI::App* sc, TrainOptions& o) {
  sc->add_option("--trees", o.gbdt.tree_count, "boosting rounds")->capture_default_str();
  sc->add_option("--depth", o.gbdt.max_depth, "maximum tree depth")->capture_default_str();
  sc->add_option("--learning-rate", o.gbdt.learning_rate)->capture_default_str();
  sc->add_option("--row-subsample", o.gbdt.row_subsample)->capture_default_str();
  sc->add_option("--col-subsample", o.gbdt.column_subsample)->capture_default_str();
  sc->add_option("--min-leaf", o.gbdt.min_samples_leaf, "minimum rows per leaf")->capture_default_str();
  sc->add_option("--lambda", o.gbdt.lambda, "L2 penalty on leaf values")->capture_default_str();
}

inline void add_common(CLI::App* sc, Common& c, bool with_corpus_filter = true) {
  sc->add_option("--seed", c.seed, "master seed")->capture_default_str();
  sc->add_option("--threads", c.threads, "worker threads")->capture_default_str();
  sc->add_option("--out-dir", c.out_dir)->capture_default_str();
  if (with_corpus_filter)
    sc->add_option("--min-comment-tokens", c.min_comment_tokens, "drop comments with at most this many tokens")
        ->capture_default_str();
}

struct ModelOutcome {
  Classification output;
  std::optional<GbdtModel> gbdt;
  std::optional<TfidfModel> tfidf;
  double c = 1.0;
};

inline ModelOutcome fit_model(const Corpus& corpus, const KeywordSet& kw, const EmbeddingTable* table,
                              const TrainOptions& o, const Common& common, Manifest& m) {
  GbdtConfig g = o.gbdt;
  g.rng_seed = mix_seed(common.seed, kGbdtSeed);
  g.threads = common.threads;
  g.validate();
  m.seeds()["master"] = common.seed;
  m.config()["model"] = o.model;
  m.config()["keywords"] = kw.name;
  m.config()["decision_threshold"] = o.decision_threshold;
  ModelOutcome out;
  const auto split_sizes = [&](const PuSplit& s) {
    m.sizes()["P"] = s.positive.size();
    m.sizes()["U"] = s.unlabeled.size();
  };
  if (o.model == "keyword") {
    const auto s = split_pu(corpus, kw);
    split_sizes(s);
    out.output = run_keyword(corpus, kw);
    return out;
  }
  if (!table) throw UsageError("--model " + o.model + " needs --embeddings");
  m.config()["gbdt"] = to_json(g);
  m.seeds()["gbdt"] = g.rng_seed;
  if (o.model == "naive") {
    auto run = run_naive(corpus, kw, *table, g, o.decision_threshold);
    split_sizes(run.split);
    out.output = std::move(run.output);
    out.gbdt = std::move(run.model);
  } else if (o.model == "prior") {
    PriorCalibration cal;
    cal.holdout_fraction = o.holdout_fraction;
    cal.rng_seed = mix_seed(common.seed, kHoldoutSeed);
    m.seeds()["holdout"] = cal.rng_seed;
    m.config()["holdout_fraction"] = cal.holdout_fraction;
    auto run = run_prior(corpus, kw, *table, g, cal, o.decision_threshold);
    split_sizes(run.split);
    m.extra()["c"] = run.c;
    out.c = run.c;
    out.output = std::move(run.output);
    out.gbdt = std::move(run.model);
  } else if (o.model == "two-step") {
    TwoStepOptions ts;
    ts.spy.spy_fraction = o.spy_fraction;
    ts.spy.noise_level = o.noise_level;
    ts.spy.rng_seed = mix_seed(common.seed, kSpySeed);
    ts.nb_alpha = o.nb_alpha;
    ts.gbdt = g;
    ts.decision_threshold = o.decision_threshold;
    ts.search_trials = o.search_trials;
    ts.mask_seed_keywords = !o.keep_seed_keywords;
    m.seeds()["spy"] = ts.spy.rng_seed;
    m.config()["spy_fraction"] = ts.spy.spy_fraction;
    m.config()["noise_level"] = ts.spy.noise_level;
    m.config()["nb_alpha"] = ts.nb_alpha;
    m.config()["search_trials"] = ts.search_trials;
    m.config()["mask_seed_keywords"] = ts.mask_seed_keywords;
    auto res = run_two_step(corpus, kw, *table, ts);
    split_sizes(res.split);
    m.sizes()["S"] = res.step1.spies.size();
    m.sizes()["N"] = res.step1.reliable_negatives.size();
    m.sizes()["U_rest"] = res.step1.residual_unlabeled.size();
    m.sizes()["featureless"] = res.featureless;
    m.extra()["threshold"] = res.step1.threshold;
    m.extra()["threshold_hex"] = hexfloat(res.step1.threshold);
    out.output = std::move(res.output);
    out.gbdt = std::move(res.gbdt);
    out.tfidf = std::move(res.tfidf);
  } else {
    throw UsageError("unknown --model " + o.model + " (keyword, naive, prior, two-step)");
  }
  return out;
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

struct SimulateOptions {
  std::size_t posts = 1000;
  std::size_t tiers = 1;
  double keyword_bias = 0.0;
  double political_post_rate = 0.3;
  double overlap = 0.03;
};

inline int cmd_simulate(const SimulateOptions& o, const Common& c, const std::vector<std::string>& argv) {
  SimConfig cfg;
  cfg.n_posts = o.posts;
  cfg.keyword_bias = o.keyword_bias;
  cfg.political_post_rate = o.political_post_rate;
  cfg.overlap = o.overlap;
  cfg.rng_seed = mix_seed(c.seed, kSimSeed);
  if (o.tiers != 1 && o.tiers != 3) throw UsageError("--tiers must be 1 or 3");
  if (o.tiers == 3) cfg.keyword_tiers = election_tiers();
  cfg.validate();
  Manifest m("simulate", argv);
  m.seeds()["master"] = c.seed;
  m.seeds()["simgen"] = cfg.rng_seed;
  m.config() = {{"posts", o.posts},
                {"tiers", o.tiers},
                {"keyword_bias", o.keyword_bias},
                {"political_post_rate", o.political_post_rate},
                {"overlap", o.overlap}};
  const auto sim = generate(cfg);
  m.mark("generate");
  const auto dir = prepare_out_dir(c.out_dir);
  m.output(dir, "corpus.jsonl", [&](std::ostream& os) { write_records(os, sim.corpus); });
  m.output(dir, "ground_truth.csv", [&](std::ostream& os) { write_ground_truth_csv(os, sim.corpus, sim.truth); });
  m.output(dir, "gold.jsonl", [&](std::ostream& os) { write_gold(os, sim.corpus, sim.truth); });
  m.output(dir, "embeddings.txt", [&](std::ostream& os) { sim.embeddings.save(os); });
  m.sizes()["documents"] = sim.corpus.size();
  m.sizes()["political_docs"] = sim.truth.political_docs;
  m.extra()["keyword_coverage"] = sim.truth.keyword_coverage();
  m.write(dir);
  return 0;
}

inline int cmd_ingest(const std::string& corpus_path, const Common& c, const std::vector<std::string>& argv) {
  Manifest m("ingest", argv);
  if (!fs::exists(corpus_path)) throw UsageError("corpus not found: " + corpus_path);
  m.input("corpus", corpus_path);
  std::istringstream in(read_file(corpus_path));
  const auto parsed = parse_records(in);
  const auto kept = filter_short_comments(parsed.corpus, c.min_comment_tokens);
  const auto threads = build_threads(kept);
  const auto dir = prepare_out_dir(c.out_dir);
  m.output(dir, "corpus.jsonl", [&](std::ostream& os) { write_records(os, kept); });
  m.output(dir, "parse_report.csv", [&](std::ostream& os) { write_parse_report(os, parsed.rejections); });
  m.config()["min_comment_tokens"] = c.min_comment_tokens;
  m.sizes() = {{"parsed", parsed.corpus.size()},
               {"rejected", parsed.rejections.size()},
               {"short_comments_dropped", parsed.corpus.size() - kept.size()},
               {"kept", kept.size()},
               {"threads", threads.threads.size()},
               {"orphans", threads.orphans.size()}};
  m.write(dir);
  if (kept.empty()) throw DataError("ingest: no usable records in " + corpus_path);
  return 0;
}

inline int cmd_train(const TrainOptions& o, const Common& c, const std::vector<std::string>& argv) {
  Manifest m("train", argv);
  const auto corpus = load_corpus(o.corpus, c.min_comment_tokens);
  m.input("corpus", o.corpus);
  const auto kw = resolve_keywords(o.keywords);
  if (o.keywords.rfind("preset:", 0) != 0) m.input("keywords", o.keywords);
  std::optional<EmbeddingTable> table;
  if (!o.embeddings.empty()) {
    table = load_table(o.embeddings);
    m.input("embeddings", o.embeddings);
  }
  m.config()["min_comment_tokens"] = c.min_comment_tokens;
  m.mark("load");
  auto fitted = fit_model(corpus, kw, table ? &*table : nullptr, o, c, m);
  m.mark("fit");
  const auto dir = prepare_out_dir(c.out_dir);
  m.output(dir, "labels.csv", [&](std::ostream& os) { write_labels(os, corpus, fitted.output); });
  if (fitted.gbdt) m.output(dir, "gbdt.model", [&](std::ostream& os) { fitted.gbdt->save(os); });
  if (fitted.tfidf) m.output(dir, "tfidf.model", [&](std::ostream& os) { fitted.tfidf->save(os); });
  if (o.model == "prior")
    m.output(dir, "calibration.txt", [&](std::ostream& os) { os << "c " << hexfloat(fitted.c) << '\n'; });
  std::size_t political = 0;
  for (char p : fitted.output.political) political += p ? 1 : 0;
  m.sizes()["documents"] = corpus.size();
  m.sizes()["predicted_political"] = political;
  m.write(dir);
  return 0;
}

// Scores a corpus with a model directory written by `train`.
inline int cmd_classify(const std::string& model_dir, const TrainOptions& o, const Common& c,
                        const std::vector<std::string>& argv) {
  Manifest m("classify", argv);
  const auto corpus = load_corpus(o.corpus, c.min_comment_tokens);
  m.input("corpus", o.corpus);
  const auto kw = resolve_keywords(o.keywords);
  const auto split = split_pu(corpus, kw);
  Classification out;
  const fs::path md(model_dir);
  if (o.model == "keyword") {
    out = run_keyword(corpus, kw);
  } else {
    if (o.embeddings.empty()) throw UsageError("classify needs --embeddings for --model " + o.model);
    const auto table = load_table(o.embeddings);
    m.input("embeddings", o.embeddings);
    const auto model_path = (md / "gbdt.model").string();
    if (!fs::exists(model_path)) throw UsageError("no gbdt.model in " + model_dir);
    m.input("gbdt.model", model_path);
    std::istringstream in(read_file(model_path));
    const auto g = GbdtModel::load(in);
    const auto emb = embed_corpus(corpus, table);
    double cal = 1.0;
    if (o.model == "prior") {
      const auto cal_path = (md / "calibration.txt").string();
      m.input("calibration", cal_path);
      std::istringstream cin(read_file(cal_path));
      std::string key, hex;
      if (!(cin >> key >> hex) || key != "c") throw DataError(cal_path + ": expected 'c <hexfloat>'");
      cal = parse_hexfloat(hex);
    }
    out.probability.resize(corpus.size());
    out.political.resize(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const double p = g.predict(emb.vectors[i]);
      out.probability[i] = split.is_positive[i] ? 1.0 : (o.model == "prior" ? prior_calibrated_predict(p, cal) : p);
      out.political[i] = out.probability[i] >= o.decision_threshold ? 1 : 0;
    }
  }
  const auto dir = prepare_out_dir(c.out_dir);
  m.output(dir, "labels.csv", [&](std::ostream& os) { write_labels(os, corpus, out); });
  m.sizes()["documents"] = corpus.size();
  m.sizes()["P"] = split.positive.size();
  m.write(dir);
  return 0;
}

struct EvalOptions {
  std::vector<std::string> labels;  // [name=]path
  std::string gold;
  bool sweep = false;
  std::vector<std::string> sweep_keywords = {"preset:politics3", "preset:politics6", "preset:politics11"};
  std::vector<std::string> sweep_models = {"keyword", "two-step"};
};

inline LabelMap political_map(const std::map<std::string, LabelRow>& rows, const std::string& path) {
  LabelMap out;
  for (const auto& [id, r] : rows) {
    if (r.label != "political" && r.label != "non_political")
      throw DataError(path + ": label for " + id + " must be political or non_political");
    out[id] = r.label == "political";
  }
  return out;
}

inline void check_same_ids(const LabelMap& pred, const LabelMap& gold, const std::string& what) {
  std::size_t missing = 0, extra = 0;
  for (const auto& [id, g] : gold) missing += pred.count(id) ? 0 : 1;
  for (const auto& [id, p] : pred) extra += gold.count(id) ? 0 : 1;
  if (missing || extra)
    throw DataError(what + ": id mismatch with gold (" + std::to_string(missing) + " missing, " +
                    std::to_string(extra) + " extra)");
}

inline int cmd_eval(const EvalOptions& e, TrainOptions o, const Common& c, const std::vector<std::string>& argv) {
  Manifest m("eval", argv);
  if (e.gold.empty()) throw UsageError("eval needs --gold");
  const auto gold = read_gold(e.gold);
  m.input("gold", e.gold);
  const auto dir = prepare_out_dir(c.out_dir);
  if (!e.sweep) {
    if (e.labels.empty()) throw UsageError("eval needs --labels (or --sweep)");
    std::vector<std::pair<std::string, ScoreReport>> reports;
    for (const auto& spec : e.labels) {
      std::string name, path = spec;
      if (auto eq = spec.find('='); eq != std::string::npos) {
        name = spec.substr(0, eq);
        path = spec.substr(eq + 1);
      } else {
        name = fs::path(path).parent_path().filename().string();
        if (name.empty()) name = fs::path(path).stem().string();
      }
      if (!fs::exists(path)) throw UsageError("labels file not found: " + path);
      m.input("labels:" + name, path);
      const auto pred = political_map(read_labels(path), path);
      check_same_ids(pred, gold, path);
      reports.emplace_back(name, scores(confusion(pred, gold)));
    }
    m.output(dir, "scores.csv", [&](std::ostream& os) {
      write_scores_header(os);
      for (const auto& [name, r] : reports) write_scores_row(os, name, "all", r);
    });
    m.write(dir);
    return 0;
  }

  if (o.corpus.empty()) throw UsageError("eval --sweep needs --corpus");
  const auto corpus = load_corpus(o.corpus, c.min_comment_tokens);
  m.input("corpus", o.corpus);
  std::optional<EmbeddingTable> table;
  if (!o.embeddings.empty()) {
    table = load_table(o.embeddings);
    m.input("embeddings", o.embeddings);
  }
  std::ostringstream rows;
  write_scores_header(rows);
  ordered_json runs = ordered_json::array();
  for (const auto& model : e.sweep_models) {
    for (const auto& spec : e.sweep_keywords) {
      o.model = model;
      const auto kw = resolve_keywords(spec);
      Manifest sub("sweep", {});
      auto fitted = fit_model(corpus, kw, table ? &*table : nullptr, o, c, sub);
      LabelMap pred;
      for (std::size_t i = 0; i < corpus.size(); ++i) pred[corpus[i].id] = fitted.output.political[i] != 0;
      check_same_ids(pred, gold, "sweep corpus");
      write_scores_row(rows, model, kw.name, scores(confusion(pred, gold)));
      runs.push_back({{"model", model}, {"keywords", kw.name}, {"sizes", sub.sizes()}});
    }
  }
  m.extra()["runs"] = runs;
  m.output(dir, "keyword_sweep.csv", [&](std::ostream& os) { os << rows.str(); });
  m.write(dir);
  return 0;
}

struct AnalyzeOptions {
  std::string corpus, labels, target = "political", target_keywords, date_range;
  std::size_t bins = 20;
  std::size_t min_posts = 100;
  std::vector<std::string> exclude;
  bool all_posts = false;
};

inline void write_tsv_histograms(std::ostream& os, const ShiftDistributions& d) {
  os << "bin_lo\tbin_hi\tstay_mass\tshift_mass\n";
  const auto bins = d.stay.counts.size();
  for (std::size_t b = 0; b < bins; ++b)
    os << fmt_real(static_cast<double>(b) / static_cast<double>(bins)) << '\t'
       << fmt_real(static_cast<double>(b + 1) / static_cast<double>(bins)) << '\t' << fmt_real(d.stay.mass(b)) << '\t'
       << fmt_real(d.shift.mass(b)) << '\n';
}

inline int cmd_analyze(const std::string& what, const AnalyzeOptions& a, const Common& c,
                       const std::vector<std::string>& argv) {
  Manifest m("analyze " + what, argv);
  const auto corpus = load_corpus(a.corpus, c.min_comment_tokens);
  m.input("corpus", a.corpus);
  std::string target = a.target;
  DocLabels labels;
  if (!a.target_keywords.empty()) {
    const auto kw = resolve_keywords(a.target_keywords);
    target = kw.name;
    for (std::size_t i = 0; i < corpus.size(); ++i)
      labels[corpus[i].id] = match_keywords(corpus.tokens(i), kw) ? target : "other";
    m.config()["target_keywords"] = a.target_keywords;
  } else {
    if (a.labels.empty()) throw UsageError("analyze needs --labels or --target-keywords");
    if (!fs::exists(a.labels)) throw UsageError("labels file not found: " + a.labels);
    m.input("labels", a.labels);
    for (auto& [id, r] : read_labels(a.labels)) labels[id] = r.label;
  }
  m.config()["target"] = target;
  m.config()["min_comment_tokens"] = c.min_comment_tokens;
  DateRange range;
  if (!a.date_range.empty()) {
    range = parse_date_range(a.date_range);
    m.config()["date_range"] = a.date_range;
  }
  const auto all_threads = build_threads(corpus);
  const auto threads = a.date_range.empty() ? all_threads : restrict_to_range(all_threads, range);
  m.sizes()["threads"] = threads.threads.size();
  const auto dir = prepare_out_dir(c.out_dir);

  if (what == "shifts") {
    std::vector<ShiftRecord> records;
    for (const auto& t : threads.threads) {
      auto r = detect_shifts(t, labels, target);
      records.insert(records.end(), r.begin(), r.end());
    }
    const auto d = stay_and_shift_distributions(threads, labels, target, a.bins);
    m.output(dir, "shifts.csv", [&](std::ostream& os) { write_shifts_csv(os, records); });
    m.output(dir, "shift_histograms.tsv", [&](std::ostream& os) { write_tsv_histograms(os, d); });
    m.sizes()["comments"] = records.size();
    m.extra()["at_least_one_fraction"] = d.at_least_one_fraction();
  } else if (what == "cdf") {
    auto emit = [&](std::ostream& os, bool tsv) {
      const char sep = tsv ? '\t' : ',';
      os << "post_class" << sep << "shift_pct" << sep << "cdf\n";
      for (auto [cls, name] : {std::pair{PostClass::target, "target"}, std::pair{PostClass::non_target, "non_target"}}) {
        EmpiricalCdf f;
        try {
          f = shift_cdf(threads, labels, target, cls);
        } catch (const DataError&) {
          continue;  // class absent from this corpus
        }
        for (const auto& [x, y] : f.steps()) os << name << sep << fmt_real(x) << sep << fmt_real(y) << '\n';
      }
    };
    m.output(dir, "cdf.csv", [&](std::ostream& os) { emit(os, false); });
    m.output(dir, "cdf.tsv", [&](std::ostream& os) { emit(os, true); });
  } else if (what == "weekly") {
    const auto series = weekly_shift_ratio(threads, labels, target, range);
    m.output(dir, "weekly.csv", [&](std::ostream& os) { write_weekly_csv(os, series); });
    m.output(dir, "weekly.tsv", [&](std::ostream& os) {
      os << "week_start\tratio\tci_lo\tci_hi\tn\n";
      for (const auto& b : series)
        os << format_date(b.week_start) << '\t' << fmt_real(b.ratio) << '\t' << fmt_real(b.ci.lo) << '\t'
           << fmt_real(b.ci.hi) << '\t' << b.n << '\n';
    });
    m.sizes()["weeks"] = series.size();
  } else if (what == "gaps") {
    const auto g = comment_gaps(threads, labels, target);
    m.output(dir, "gaps.csv", [&](std::ostream& os) {
      os << "kind,gap\n";
      for (auto v : g.first_gaps) os << "first," << v << '\n';
      for (auto v : g.inter_gaps) os << "inter," << v << '\n';
    });
    m.output(dir, "gaps.tsv", [&](std::ostream& os) {
      os << "kind\tgap\tcdf\n";
      for (auto [name, v] : {std::pair{"first", &g.first_gaps}, std::pair{"inter", &g.inter_gaps}}) {
        if (v->empty()) continue;
        EmpiricalCdf f(std::vector<double>(v->begin(), v->end()));
        for (const auto& [x, y] : f.steps()) os << name << '\t' << fmt_real(x) << '\t' << fmt_real(y) << '\n';
      }
    });
    m.output(dir, "gaps_test.csv", [&](std::ostream& os) {
      os << "n_first,n_inter,censored,u,z,p_value\n";
      os << g.first_gaps.size() << ',' << g.inter_gaps.size() << ',' << g.censored << ',';
      if (g.first_gaps.size() >= 2 && g.inter_gaps.size() >= 2) {
        const auto t = compare_gap_distributions(g.first_gaps, g.inter_gaps);
        os << fmt_real(t.u) << ',' << fmt_real(t.z) << ',' << fmt_real(t.p_value, 9) << '\n';
      } else {
        os << ",,\n";
      }
    });
  } else if (what == "topics") {
    TopicOptions to;
    to.min_posts = a.min_posts;
    to.excluded.insert(a.exclude.begin(), a.exclude.end());
    to.non_target_posts_only = !a.all_posts;
    const auto rows = topic_politicization(threads, labels, target, to);
    m.output(dir, "topics.csv", [&](std::ostream& os) { write_topics_csv(os, rows); });
    m.output(dir, "topics.tsv", [&](std::ostream& os) {
      os << "rank\ttopic\tpct_target_comments\n";
      for (std::size_t i = 0; i < rows.size(); ++i)
        os << i + 1 << '\t' << rows[i].topic << '\t' << fmt_real(rows[i].pct_target(), 4) << '\n';
    });
    m.sizes()["topics"] = rows.size();
  } else if (what == "prevalence") {
    std::vector<char> positive(corpus.size(), 0);
    for (std::size_t i = 0; i < corpus.size(); ++i) positive[i] = label_of(labels, corpus[i].id) == target ? 1 : 0;
    const auto rows = prevalence_report(corpus, positive, threads);
    m.output(dir, "prevalence.csv", [&](std::ostream& os) { write_prevalence_csv(os, rows); });
    m.output(dir, "prevalence.tsv", [&](std::ostream& os) {
      std::ostringstream csv;
      write_prevalence_csv(csv, rows);
      auto s = csv.str();
      std::replace(s.begin(), s.end(), ',', '\t');
      os << s;
    });
  } else {
    throw UsageError("unknown analysis " + what);
  }
  m.write(dir);
  return 0;
}

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr);

// Reruns the argv recorded in a manifest into out_dir and compares every
// recorded output digest.
inline int cmd_replay(const std::string& manifest_path, const std::string& out_dir, std::ostream& out,
                      std::ostream& err) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::exception&) {
    throw DataError(manifest_path + ": not a manifest");
  }
  if (!j.contains("argv") || !j.contains("outputs")) throw DataError(manifest_path + ": not a manifest");
  auto argv = j["argv"].get<std::vector<std::string>>();
  bool replaced = false;
  for (std::size_t i = 0; i + 1 < argv.size(); ++i) {
    if (argv[i] == "--out-dir") {
      argv[i + 1] = out_dir;
      replaced = true;
    }
  }
  if (!replaced) {
    argv.push_back("--out-dir");
    argv.push_back(out_dir);
  }
  if (const int rc = run(argv, out, err); rc != 0) return rc;
  nlohmann::json fresh = nlohmann::json::parse(read_file((fs::path(out_dir) / "manifest.json").string()));
  std::size_t mismatches = 0;
  for (auto& [name, digest] : j["outputs"].items()) {
    const auto got = fresh["outputs"].value(name, std::string());
    if (got != digest.get<std::string>()) {
      err << "replay: " << name << " digest " << got << " != recorded " << digest.get<std::string>() << '\n';
      ++mismatches;
    }
  }
  if (mismatches) throw PipelineError("replay: " + std::to_string(mismatches) + " output(s) differ");
  out << "replay: " << j["outputs"].size() << " output digest(s) reproduced\n";
  return 0;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Political topic-shift toolkit: PU-learning classifiers and thread analytics"};
  app.name("politishift");
  app.require_subcommand(1);
  app.set_version_flag("--version", "politishift 0.1.0");

  Common common;
  TrainOptions train;
  SimulateOptions sim;
  EvalOptions ev;
  AnalyzeOptions an;
  std::string model_dir, manifest_path, replay_dir = "replay";

  auto* s_sim = app.add_subcommand("simulate", "write a synthetic corpus with ground truth");
  add_common(s_sim, common, false);
  s_sim->add_option("--posts", sim.posts)->capture_default_str();
  s_sim->add_option("--tiers", sim.tiers, "1: three seed keywords at 40%; 3: all eleven at 40/60/80%")
      ->capture_default_str();
  s_sim->add_option("--keyword-bias", sim.keyword_bias)->capture_default_str();
  s_sim->add_option("--political-post-rate", sim.political_post_rate)->capture_default_str();
  s_sim->add_option("--overlap", sim.overlap)->capture_default_str();

  auto* s_ing = app.add_subcommand("ingest", "validate records and drop short comments");
  add_common(s_ing, common);
  s_ing->add_option("--corpus", train.corpus)->required();

  auto add_model_inputs = [&](CLI::App* sc) {
    sc->add_option("--corpus", train.corpus)->required();
    sc->add_option("--keywords", train.keywords, "keyword file or preset:politics3|6|11")->capture_default_str();
    sc->add_option("--embeddings", train.embeddings, "word vectors, one 'token v1 .. vd' per line");
    sc->add_option("--model", train.model, "keyword, naive, prior or two-step")
        ->check(CLI::IsMember({"keyword", "naive", "prior", "two-step"}))
        ->capture_default_str();
    sc->add_option("--decision-threshold", train.decision_threshold)->capture_default_str();
  };

  auto* s_train = app.add_subcommand("train", "fit a model and label every document");
  add_common(s_train, common);
  add_model_inputs(s_train);
  add_gbdt_flags(s_train, train);
  s_train->add_option("--spy-fraction", train.spy_fraction)->capture_default_str();
  s_train->add_option("--noise-level", train.noise_level)->capture_default_str();
  s_train->add_option("--nb-alpha", train.nb_alpha)->capture_default_str();
  s_train->add_option("--holdout-fraction", train.holdout_fraction)->capture_default_str();
  s_train->add_option("--search-trials", train.search_trials, "random hyperparameter search trials")
      ->capture_default_str();
  s_train->add_flag("--keep-seed-keywords", train.keep_seed_keywords,
                    "leave seed keywords in the Naive Bayes vocabulary");

  auto* s_cls = app.add_subcommand("classify", "label documents with a trained model directory");
  add_common(s_cls, common);
  add_model_inputs(s_cls);
  s_cls->add_option("--model-dir", model_dir)->required();

  auto* s_eval = app.add_subcommand("eval", "score labels against gold, or sweep keyword sets");
  add_common(s_eval, common);
  s_eval->add_option("--labels", ev.labels, "[name=]labels.csv, repeatable");
  s_eval->add_option("--gold", ev.gold, "jsonl of {id, label}");
  s_eval->add_flag("--sweep", ev.sweep, "train per keyword set and score each");
  s_eval->add_option("--sweep-keywords", ev.sweep_keywords)->capture_default_str();
  s_eval->add_option("--sweep-models", ev.sweep_models)->capture_default_str();
  s_eval->add_option("--corpus", train.corpus);
  s_eval->add_option("--embeddings", train.embeddings);
  s_eval->add_option("--decision-threshold", train.decision_threshold)->capture_default_str();
  add_gbdt_flags(s_eval, train);

  auto* s_an = app.add_subcommand("analyze", "thread analytics over labeled documents");
  s_an->require_subcommand(1);
  std::vector<std::pair<std::string, CLI::App*>> analyses;
  for (const char* name : {"shifts", "cdf", "weekly", "gaps", "topics", "prevalence"}) {
    auto* sc = s_an->add_subcommand(name);
    add_common(sc, common);
    sc->add_option("--corpus", an.corpus)->required();
    sc->add_option("--labels", an.labels, "labels.csv from train or classify");
    sc->add_option("--target", an.target, "label value treated as the target")->capture_default_str();
    sc->add_option("--target-keywords", an.target_keywords, "label documents by keyword match instead");
    sc->add_option("--date-range", an.date_range, "YYYY-MM-DD..YYYY-MM-DD");
    analyses.emplace_back(name, sc);
  }
  analyses[0].second->add_option("--bins", an.bins)->capture_default_str();
  analyses[4].second->add_option("--min-posts", an.min_posts)->capture_default_str();
  analyses[4].second->add_option("--exclude", an.exclude, "topic to drop, repeatable");
  analyses[4].second->add_flag("--all-posts", an.all_posts, "include threads whose post is on target");

  auto* s_rep = app.add_subcommand("replay", "rerun a manifest and verify its output digests");
  s_rep->add_option("--manifest", manifest_path)->required();
  s_rep->add_option("--out-dir", replay_dir)->capture_default_str();

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (s_sim->parsed()) return cmd_simulate(sim, common, args);
    if (s_ing->parsed()) return cmd_ingest(train.corpus, common, args);
    if (s_train->parsed()) return cmd_train(train, common, args);
    if (s_cls->parsed()) return cmd_classify(model_dir, train, common, args);
    if (s_eval->parsed()) return cmd_eval(ev, train, common, args);
    if (s_rep->parsed()) return cmd_replay(manifest_path, replay_dir, out, err);
    for (auto& [name, sc] : analyses)
      if (sc->parsed()) return cmd_analyze(name, an, common, args);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return 2;
  } catch (const PipelineError& e) {
    err << "pipeline error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}

}  // namespace politishift::cli
