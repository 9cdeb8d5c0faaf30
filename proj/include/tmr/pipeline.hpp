#pragma once

// End-to-end orchestration: ingest → (rephrase per scheme) → preprocess →
// fit → keywords → evaluate, with one shared co-occurrence index per run and
// identical modeling parameters across variants.  A variant failure marks
// its row and the run continues.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "tmr/cooccur.hpp"
#include "tmr/corpus.hpp"
#include "tmr/lda.hpp"
#include "tmr/metrics.hpp"
#include "tmr/preprocess.hpp"
#include "tmr/rephrase.hpp"
#include "tmr/topics.hpp"
#include "tmr/util.hpp"

namespace tmr {

// Bad configuration / usage (CLI exit 1) as opposed to stage failure (exit 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  std::string input;
  CorpusFormat format = CorpusFormat::jsonl;
  std::vector<std::string> variants = {"none"};  // none | general | colloquial_to_formal
  std::string output;

  std::string provider = "mock";  // mock | http
  ProviderConfig provider_cfg;
  bool include_failed_originals = false;

  std::string stopwords_path;  // empty = bundled defaults
  std::string lemmas_path;
  bool keep_hashtags = true;
  bool keep_mentions = true;

  std::size_t k = 8;
  std::size_t n = 15;
  double alpha = -1.0;  // <= 0 means 50/K
  double beta = 0.01;
  std::size_t iterations = 1000;
  std::uint64_t seed = 42;
  std::size_t min_doc_freq = 2;
  std::size_t threads = 1;
  bool reseed_per_variant = false;

  std::string reference_index;   // prebuilt index file
  std::string reference_corpus;  // text file (one doc per line) or directory
  std::size_t window_size = 110;
  double epsilon = 1e-12;

  std::size_t samples = 3;
};

namespace detail {

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config: key '" + key + "' expects a boolean, got '" + v + "'");
}

inline std::uint64_t parse_count(const std::string& key, const std::string& v) {
  // stoull silently wraps negatives, so require plain digits up front
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError("config: key '" + key + "' expects a non-negative integer, got '" + v + "'");
  try {
    return std::stoull(v);
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects a non-negative integer, got '" + v + "'");
  }
}

inline double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
  }
}

inline void collect_config(const std::string& path,
                           std::vector<std::pair<std::string, std::string>>& out, int depth) {
  if (depth > 8) throw ConfigError("config: include nesting too deep at " + path);
  if (!std::filesystem::exists(path)) throw ConfigError("config: file not found: " + path);
  const auto dir = std::filesystem::path(path).parent_path();
  std::size_t line_no = 0;
  for (const auto& raw : read_lines(path)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: expected key = value at " + path + ":" + std::to_string(line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config: empty key at " + path + ":" + std::to_string(line_no));
    if (key == "include") {
      const auto inc = std::filesystem::path(value).is_absolute()
                           ? std::filesystem::path(value)
                           : dir / value;
      collect_config(inc.string(), out, depth + 1);
    } else {
      out.emplace_back(key, value);
    }
  }
}

inline std::string variant_slug(const std::string& v) {
  if (v == "none") return "original";
  if (v == "general") return "general";
  return "c_to_f";
}

inline std::string variant_label(const std::string& v) {
  if (v == "none") return "w/o rephr.";
  if (v == "general") return "w/ general rephr.";
  return "w/ c-to-f rephr.";
}

}  // namespace detail

inline RunConfig run_config_from_pairs(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  RunConfig c;
  for (const auto& [key, v] : pairs) {
    if (key == "input") c.input = v;
    else if (key == "format") c.format = parse_corpus_format(v);
    else if (key == "variants") {
      c.variants.clear();
      std::string cur;
      for (std::size_t i = 0; i <= v.size(); ++i) {
        if (i == v.size() || v[i] == ',') {
          const std::string item = trim(cur);
          cur.clear();
          if (item.empty()) continue;
          std::string canon = item == "none" ? "none" : scheme_name(parse_scheme(item));
          if (std::find(c.variants.begin(), c.variants.end(), canon) == c.variants.end())
            c.variants.push_back(canon);
        } else {
          cur += v[i];
        }
      }
      if (c.variants.empty()) throw ConfigError("config: 'variants' lists no variant");
    }
    else if (key == "output") c.output = v;
    else if (key == "provider") {
      if (v != "mock" && v != "http") throw ConfigError("config: provider must be mock or http");
      c.provider = v;
    }
    else if (key == "endpoint") c.provider_cfg.endpoint = v;
    else if (key == "model") c.provider_cfg.model = v;
    else if (key == "auth_env") c.provider_cfg.auth_env = v;
    else if (key == "temperature") c.provider_cfg.temperature = detail::parse_real(key, v);
    else if (key == "max_retries") c.provider_cfg.max_retries = detail::parse_count(key, v);
    else if (key == "requests_per_minute")
      c.provider_cfg.requests_per_minute = detail::parse_count(key, v);
    else if (key == "max_in_flight") c.provider_cfg.max_in_flight = detail::parse_count(key, v);
    else if (key == "timeout_seconds") c.provider_cfg.timeout_seconds = detail::parse_count(key, v);
    else if (key == "include_failed_originals") c.include_failed_originals = detail::parse_bool(key, v);
    else if (key == "stopwords") c.stopwords_path = v;
    else if (key == "lemmas") c.lemmas_path = v;
    else if (key == "keep_hashtags") c.keep_hashtags = detail::parse_bool(key, v);
    else if (key == "keep_mentions") c.keep_mentions = detail::parse_bool(key, v);
    else if (key == "k") c.k = detail::parse_count(key, v);
    else if (key == "n") c.n = detail::parse_count(key, v);
    else if (key == "alpha") c.alpha = detail::parse_real(key, v);
    else if (key == "beta") c.beta = detail::parse_real(key, v);
    else if (key == "iterations") c.iterations = detail::parse_count(key, v);
    else if (key == "seed") c.seed = detail::parse_count(key, v);
    else if (key == "min_doc_freq") c.min_doc_freq = detail::parse_count(key, v);
    else if (key == "threads") c.threads = detail::parse_count(key, v);
    else if (key == "reseed_per_variant") c.reseed_per_variant = detail::parse_bool(key, v);
    else if (key == "reference_index") c.reference_index = v;
    else if (key == "reference_corpus") c.reference_corpus = v;
    else if (key == "window_size") c.window_size = detail::parse_count(key, v);
    else if (key == "epsilon") c.epsilon = detail::parse_real(key, v);
    else if (key == "samples") c.samples = detail::parse_count(key, v);
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  return c;
}

inline void validate_run_config(const RunConfig& c) {
  if (c.input.empty()) throw ConfigError("config: 'input' is required");
  if (c.output.empty()) throw ConfigError("config: 'output' is required");
  if (c.k < 2) throw ConfigError("config: k must be >= 2");
  if (c.n < 1) throw ConfigError("config: n must be >= 1");
  if (c.iterations < 1) throw ConfigError("config: iterations must be >= 1");
  if (c.window_size < 1) throw ConfigError("config: window_size must be >= 1");
  if (c.epsilon <= 0.0) throw ConfigError("config: epsilon must be > 0");
  if (c.provider == "http" && c.provider_cfg.endpoint.empty())
    throw ConfigError("config: http provider requires 'endpoint'");
  const auto must_exist = [](const std::string& what, const std::string& path) {
    if (!path.empty() && !std::filesystem::exists(path))
      throw ConfigError("config: " + what + " not found: " + path);
  };
  must_exist("input", c.input);
  must_exist("stopwords file", c.stopwords_path);
  must_exist("lemmas file", c.lemmas_path);
  must_exist("reference_index", c.reference_index);
  must_exist("reference_corpus", c.reference_corpus);
}

inline RunConfig load_run_config(const std::string& path) {
  std::vector<std::pair<std::string, std::string>> pairs;
  detail::collect_config(path, pairs, 0);
  RunConfig c = run_config_from_pairs(pairs);
  validate_run_config(c);
  return c;
}

struct SampleAssignment {
  std::string variant;
  std::string text;  // the text this variant modeled (original or rephrased)
  std::size_t dominant_topic = 0;
  std::vector<std::string> keywords;
};

struct Sample {
  std::string doc_id;
  std::string original;
  std::vector<SampleAssignment> per_variant;
};

struct VariantRow {
  std::string variant;  // "none" | "general" | "colloquial_to_formal"
  std::string label;    // Table-style row label
  std::string model_id = "lda-gibbs";
  bool ok = false;
  std::string error;
  MetricReport metrics;
  TopicSet topics;
  std::vector<std::string> failed_doc_ids;  // rephrase failures
  std::size_t docs_used = 0;
  std::size_t docs_excluded_empty = 0;
};

struct ComparisonReport {
  std::vector<VariantRow> rows;
  std::vector<Sample> samples;
  nlohmann::json params;
};

inline nlohmann::json comparison_to_json(const ComparisonReport& rep) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : rep.rows) {
    nlohmann::json row{{"variant", r.variant}, {"label", r.label},
                       {"model_id", r.model_id}, {"ok", r.ok},
                       {"docs_used", r.docs_used},
                       {"docs_excluded_empty", r.docs_excluded_empty},
                       {"failed_doc_ids", r.failed_doc_ids}};
    if (r.ok) {
      row["metrics"] = report_to_json(r.metrics);
      row["topics"] = topics_to_json(r.topics);
    } else {
      row["error"] = r.error;
    }
    rows.push_back(std::move(row));
  }
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : rep.samples) {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& a : s.per_variant)
      per.push_back({{"variant", a.variant}, {"text", a.text},
                     {"dominant_topic", a.dominant_topic}, {"keywords", a.keywords}});
    samples.push_back({{"doc_id", s.doc_id}, {"original", s.original}, {"assignments", per}});
  }
  return nlohmann::json{{"params", rep.params}, {"rows", std::move(rows)},
                        {"samples", std::move(samples)}};
}

// Plain-text table in the shape of the quantitative-results table: one row
// per variant, best value per metric column starred (TR: lower is better).
inline std::string render_comparison_text(const ComparisonReport& rep) {
  struct Col { const char* name; bool higher_better; };
  static constexpr Col cols[] = {
      {"C_v", true}, {"TU", true}, {"TR", false}, {"TD", true}};

  std::vector<double> best(4, 0.0);
  bool any_ok = false;
  for (const auto& r : rep.rows) {
    if (!r.ok) continue;
    const double vals[4] = {r.metrics.cv, r.metrics.tu, r.metrics.tr, r.metrics.td};
    for (int i = 0; i < 4; ++i) {
      if (!any_ok || (cols[i].higher_better ? vals[i] > best[i] : vals[i] < best[i]))
        best[i] = vals[i];
    }
    any_ok = true;
  }

  std::size_t label_w = std::string("Model").size();
  for (const auto& r : rep.rows) label_w = std::max(label_w, r.model_id.size() + 1 + r.label.size());

  std::string out;
  auto pad = [&](const std::string& s, std::size_t w) {
    out += s;
    for (std::size_t i = s.size(); i < w; ++i) out += ' ';
  };
  pad("Model", label_w + 2);
  for (const auto& c : cols) {
    std::string h = c.name;
    h += c.higher_better ? " (0-1) ^" : " (0-1) v";
    pad(h, 12);
  }
  out += '\n';
  for (std::size_t i = 0; i < label_w + 2 + 4 * 12; ++i) out += '-';
  out += '\n';
  for (const auto& r : rep.rows) {
    pad(r.model_id + " " + r.label, label_w + 2);
    if (!r.ok) {
      out += "FAILED: " + r.error;
      out += '\n';
      continue;
    }
    const double vals[4] = {r.metrics.cv, r.metrics.tu, r.metrics.tr, r.metrics.td};
    for (int c = 0; c < 4; ++c) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f%s", vals[c], vals[c] == best[c] && any_ok ? "*" : "");
      pad(buf, 12);
    }
    out += '\n';
  }
  if (any_ok) out += "* best value in column (TR: lower is better)\n";
  return out;
}

inline std::unique_ptr<Provider> make_provider(const RunConfig& c) {
  if (c.provider == "mock")
    return std::make_unique<MockProvider>(c.provider_cfg.model.empty() ? "mock"
                                                                        : c.provider_cfg.model);
  // The HTTP adapter lives in its own header; construct it there and pass it
  // to run_pipeline so this core header stays transport-free.
  throw ConfigError("provider '" + c.provider + "': construct it and pass to run_pipeline");
}

// One doc per line for a file; for a directory, each regular file (sorted by
// name) is one document.
inline std::vector<std::string> load_reference_texts(const std::string& path) {
  std::vector<std::string> texts;
  if (std::filesystem::is_directory(path)) {
    std::vector<std::string> files;
    for (const auto& e : std::filesystem::directory_iterator(path))
      if (e.is_regular_file()) files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) texts.push_back(read_file(f));
  } else {
    texts = read_lines(path);
  }
  std::vector<std::string> kept;
  for (auto& t : texts)
    if (!trim(t).empty()) kept.push_back(std::move(t));
  if (kept.empty()) throw Error("reference corpus is empty: " + path);
  return kept;
}

inline ComparisonReport run_pipeline(const RunConfig& cfg, Provider* provider = nullptr) {
  validate_run_config(cfg);
  namespace fs = std::filesystem;
  const fs::path out(cfg.output);
  for (const char* d : {"cache", "processed", "models", "topics", "reports"})
    fs::create_directories(out / d);

  IngestResult ingest_result = ingest(cfg.input, cfg.format);
  if (ingest_result.documents.empty()) throw Error("input corpus has no valid documents");

  PreprocessConfig pp = PreprocessConfig::defaults();
  if (!cfg.stopwords_path.empty()) pp.load_stopwords(cfg.stopwords_path);
  if (!cfg.lemmas_path.empty()) pp.load_lemmas(cfg.lemmas_path);
  pp.keep_hashtags = cfg.keep_hashtags;
  pp.keep_mentions = cfg.keep_mentions;

  // Original-text preprocessing doubles as the "none" variant and as the
  // fallback reference corpus for the shared index.
  std::vector<ProcessedDocument> processed_original =
      preprocess_corpus(ingest_result.documents, pp);

  CooccurrenceIndex index({cfg.window_size, cfg.epsilon});
  if (!cfg.reference_index.empty()) {
    index = CooccurrenceIndex::load(cfg.reference_index);
  } else if (!cfg.reference_corpus.empty()) {
    CooccurrenceIndex built({cfg.window_size, cfg.epsilon});
    for (const auto& text : load_reference_texts(cfg.reference_corpus))
      built.add_document(preprocess(text, pp));
    built.save((out / "cache" / "reference.idx").string());
    index = std::move(built);
  } else {
    for (const auto& d : processed_original) index.add_document(d.tokens);
    index.save((out / "cache" / "reference.idx").string());
  }

  std::unique_ptr<Provider> owned;
  const bool needs_provider = std::any_of(cfg.variants.begin(), cfg.variants.end(),
                                          [](const std::string& v) { return v != "none"; });
  if (needs_provider && provider == nullptr) {
    owned = make_provider(cfg);
    provider = owned.get();
  }

  ComparisonReport rep;
  rep.params = nlohmann::json{
      {"input", cfg.input},
      {"variants", cfg.variants},
      {"k", cfg.k},
      {"n", cfg.n},
      {"alpha", cfg.alpha > 0 ? cfg.alpha : 50.0 / static_cast<double>(cfg.k)},
      {"beta", cfg.beta},
      {"iterations", cfg.iterations},
      {"seed", cfg.seed},
      {"reseed_per_variant", cfg.reseed_per_variant},
      {"min_doc_freq", cfg.min_doc_freq},
      {"window_size", cfg.window_size},
      {"epsilon", cfg.epsilon},
      {"index_config_id", index.config_id()},
      {"index_windows", index.total_windows()},
      {"documents", ingest_result.documents.size()},
      {"rejected_lines", ingest_result.rejected.size()},
  };

  struct VariantArtifacts {
    std::vector<RawDocument> raw;  // text actually modeled, by input order
    LdaModel model;
  };
  std::unordered_map<std::string, VariantArtifacts> artifacts;

  for (const auto& variant : cfg.variants) {
    VariantRow row;
    row.variant = variant;
    row.label = detail::variant_label(variant);
    const std::string slug = detail::variant_slug(variant);
    try {
      VariantArtifacts art;
      if (variant == "none") {
        art.raw = ingest_result.documents;
      } else {
        const Scheme scheme = parse_scheme(variant);
        RephraseCache cache((out / "cache" / (slug + ".jsonl")).string());
        RephraseResult rr = rephrase_corpus(ingest_result.documents, scheme, *provider, &cache,
                                            cfg.provider_cfg.max_in_flight,
                                            cfg.provider_cfg.requests_per_minute);
        row.failed_doc_ids = rr.failed_ids;
        for (std::size_t i = 0; i < rr.records.size(); ++i) {
          const auto& rec = rr.records[i];
          if (rec.ok) {
            art.raw.push_back({rec.doc_id, rec.rephrased,
                               ingest_result.documents[i].reply_to_id,
                               ingest_result.documents[i].timestamp});
          } else if (cfg.include_failed_originals) {
            art.raw.push_back(ingest_result.documents[i]);
          }
        }
        if (art.raw.empty()) throw Error("all documents failed to rephrase");
      }

      std::vector<ProcessedDocument> processed =
          variant == "none" ? processed_original : preprocess_corpus(art.raw, pp);
      write_file((out / "processed" / (slug + ".jsonl")).string(), processed_to_jsonl(processed));
      for (const auto& d : processed)
        if (d.empty) ++row.docs_excluded_empty;
      row.docs_used = processed.size();

      FitParams fp;
      fp.k = cfg.k;
      fp.alpha = cfg.alpha;
      fp.beta = cfg.beta;
      fp.iterations = cfg.iterations;
      fp.seed = cfg.reseed_per_variant
                    ? fnv1a64(std::to_string(cfg.seed) + "\x1f" + variant)
                    : cfg.seed;
      fp.min_doc_freq = cfg.min_doc_freq;
      fp.threads = cfg.threads;
      art.model = fit(processed, fp);
      save_model(art.model, (out / "models" / (slug + ".json")).string());

      row.topics = top_keywords(art.model, cfg.n);
      save_topics(row.topics, (out / "topics" / (slug + ".json")).string());

      row.metrics = evaluate(row.topics, index, row.model_id, row.label);
      write_file((out / "reports" / (slug + ".json")).string(),
                 report_to_json(row.metrics).dump(2) + "\n");
      row.ok = true;
      artifacts.emplace(variant, std::move(art));
    } catch (const std::exception& e) {
      row.ok = false;
      row.error = e.what();
    }
    rep.rows.push_back(std::move(row));
  }

  // Per-document assignment samples over docs usable in every ok variant.
  if (cfg.samples > 0) {
    std::vector<const VariantRow*> ok_rows;
    for (const auto& r : rep.rows)
      if (r.ok) ok_rows.push_back(&r);
    if (!ok_rows.empty()) {
      std::unordered_map<std::string, std::unordered_map<std::string, const RawDocument*>> by_id;
      for (const auto& [variant, art] : artifacts)
        for (const auto& d : art.raw) by_id[variant].emplace(d.id, &d);
      for (const auto& doc : ingest_result.documents) {
        if (rep.samples.size() >= cfg.samples) break;
        bool everywhere = true;
        for (const auto* r : ok_rows)
          if (!by_id[r->variant].count(doc.id)) everywhere = false;
        if (!everywhere) continue;
        Sample s;
        s.doc_id = doc.id;
        s.original = doc.text;
        for (const auto* r : ok_rows) {
          const auto& art = artifacts.at(r->variant);
          const RawDocument* rd = by_id[r->variant].at(doc.id);
          SampleAssignment a;
          a.variant = r->variant;
          a.text = rd->text;
          ProcessedDocument pd;
          pd.id = rd->id;
          pd.tokens = preprocess(rd->text, pp);
          pd.empty = pd.tokens.empty();
          TopicDistribution td = infer_doc_topics(art.model, pd);
          a.dominant_topic = td.dominant;
          const auto& topic = r->topics.topics[td.dominant];
          for (std::size_t i = 0; i < std::min<std::size_t>(5, topic.size()); ++i)
            a.keywords.push_back(topic[i].word);
          s.per_variant.push_back(std::move(a));
        }
        rep.samples.push_back(std::move(s));
      }
    }
  }

  write_file((out / "reports" / "comparison.json").string(),
             comparison_to_json(rep).dump(2) + "\n");
  write_file((out / "reports" / "comparison.txt").string(), render_comparison_text(rep));
  return rep;
}

}  // namespace tmr
