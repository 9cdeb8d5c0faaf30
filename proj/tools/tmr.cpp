// tmr — short-text topic modeling pipeline with LLM-backed rephrasing.
//
// Subcommands wrap one library operation each; `run` drives the whole
// experiment from a config file.  Exit codes: 0 success, 1 usage error,
// 2 stage failure.  Errors go to stderr as one JSON object per failure.

#include <cstdio>
#include <iostream>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tmr/cooccur.hpp"
#include "tmr/corpus.hpp"
#include "tmr/http_provider.hpp"
#include "tmr/lda.hpp"
#include "tmr/metrics.hpp"
#include "tmr/pipeline.hpp"
#include "tmr/preprocess.hpp"
#include "tmr/rephrase.hpp"
#include "tmr/topics.hpp"
#include "tmr/util.hpp"

namespace {

void emit_error(const std::string& message) {
  std::cerr << nlohmann::json{{"error", message}}.dump() << "\n";
}

struct PreprocessFlags {
  std::string stopwords;
  std::string lemmas;
  bool no_hashtags = false;
  bool no_mentions = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--stopwords", stopwords, "Stopword list file (one word per line)")
        ->check(CLI::ExistingFile);
    cmd->add_option("--lemmas", lemmas, "Lemma table file (surface<TAB>lemma per line)")
        ->check(CLI::ExistingFile);
    cmd->add_flag("--no-hashtags", no_hashtags, "Treat # as punctuation instead of keeping it");
    cmd->add_flag("--no-mentions", no_mentions, "Treat @ as punctuation instead of keeping it");
  }

  tmr::PreprocessConfig build() const {
    tmr::PreprocessConfig cfg = tmr::PreprocessConfig::defaults();
    if (!stopwords.empty()) cfg.load_stopwords(stopwords);
    if (!lemmas.empty()) cfg.load_lemmas(lemmas);
    cfg.keep_hashtags = !no_hashtags;
    cfg.keep_mentions = !no_mentions;
    return cfg;
  }
};

struct ProviderFlags {
  std::string provider = "mock";
  tmr::ProviderConfig cfg;

  void attach(CLI::App* cmd) {
    cmd->add_option("--provider", provider, "Provider kind: mock or http")
        ->check(CLI::IsMember({"mock", "http"}));
    cmd->add_option("--endpoint", cfg.endpoint, "HTTP completion endpoint URL");
    cmd->add_option("--model", cfg.model, "Model id (also keys the cache)");
    cmd->add_option("--auth-env", cfg.auth_env,
                    "Environment variable holding the API token (default TMR_API_KEY)");
    cmd->add_option("--temperature", cfg.temperature, "Sampling temperature (default 0)");
    cmd->add_option("--max-retries", cfg.max_retries, "Retries per request (default 3)");
    cmd->add_option("--rpm", cfg.requests_per_minute, "Requests-per-minute cap (0 = uncapped)");
    cmd->add_option("--max-in-flight", cfg.max_in_flight, "Concurrent requests (default 4)");
    cmd->add_option("--timeout", cfg.timeout_seconds, "Per-request timeout in seconds");
  }

  std::unique_ptr<tmr::Provider> build() const {
    if (provider == "http") {
      if (cfg.endpoint.empty()) throw tmr::ConfigError("--provider http requires --endpoint");
      return std::make_unique<tmr::HttpProvider>(cfg);
    }
    return std::make_unique<tmr::MockProvider>(cfg.model.empty() ? "mock" : cfg.model);
  }
};

int cmd_stats(const std::string& input, const std::string& format) {
  tmr::IngestResult r = tmr::ingest(input, tmr::parse_corpus_format(format));
  nlohmann::json rejected = nlohmann::json::array();
  for (const auto& rej : r.rejected)
    rejected.push_back({{"line", rej.line}, {"id", rej.id}, {"reason", rej.reason}});
  nlohmann::json out{{"documents", r.documents.size()}, {"rejected", std::move(rejected)}};
  if (!r.documents.empty()) out["stats"] = tmr::stats_to_json(tmr::stats(r.documents));
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_preprocess(const std::string& input, const std::string& format, const std::string& output,
                   const PreprocessFlags& ppf) {
  tmr::IngestResult r = tmr::ingest(input, tmr::parse_corpus_format(format));
  auto processed = tmr::preprocess_corpus(r.documents, ppf.build());
  tmr::write_file(output, tmr::processed_to_jsonl(processed));
  std::size_t empty = 0;
  for (const auto& d : processed)
    if (d.empty) ++empty;
  std::cout << nlohmann::json{{"documents", processed.size()},
                              {"empty", empty},
                              {"rejected", r.rejected.size()},
                              {"output", output}}
                   .dump(2)
            << "\n";
  return 0;
}

int cmd_rephrase(const std::string& input, const std::string& format, const std::string& scheme,
                 const std::string& cache_path, const std::string& output,
                 const std::string& records_path, const ProviderFlags& pf) {
  tmr::IngestResult r = tmr::ingest(input, tmr::parse_corpus_format(format));
  auto provider = pf.build();
  tmr::RephraseCache cache(cache_path);
  tmr::RephraseResult rr =
      tmr::rephrase_corpus(r.documents, tmr::parse_scheme(scheme), *provider, &cache,
                           pf.cfg.max_in_flight, pf.cfg.requests_per_minute);
  std::size_t hits = 0;
  for (const auto& rec : rr.records)
    if (rec.from_cache) ++hits;
  if (!output.empty()) {
    std::string corpus;
    for (const auto& rec : rr.records) {
      if (!rec.ok) continue;
      corpus += nlohmann::json{{"id", rec.doc_id}, {"text", rec.rephrased}}.dump();
      corpus += '\n';
    }
    tmr::write_file(output, corpus);
  }
  if (!records_path.empty()) {
    std::string lines;
    for (const auto& rec : rr.records) {
      lines += tmr::record_to_json(rec).dump();
      lines += '\n';
    }
    tmr::write_file(records_path, lines);
  }
  std::cout << nlohmann::json{{"documents", rr.records.size()},
                              {"failed", rr.failed_ids.size()},
                              {"failed_ids", rr.failed_ids},
                              {"from_cache", hits},
                              {"cache", cache_path}}
                   .dump(2)
            << "\n";
  return rr.failed_ids.empty() ? 0 : 2;
}

int cmd_build_index(const std::string& reference, const std::string& output, std::size_t window,
                    double epsilon, const std::string& filter_words,
                    const std::string& filter_topics, const PreprocessFlags& ppf) {
  tmr::PreprocessConfig pp = ppf.build();
  std::unordered_set<std::string> filter;
  if (!filter_words.empty())
    for (const auto& line : tmr::read_lines(filter_words)) {
      const std::string w = tmr::trim(line);
      if (!w.empty() && w[0] != '#') filter.insert(w);
    }
  if (!filter_topics.empty())
    for (const auto& topic : tmr::load_topics(filter_topics).topics)
      for (const auto& tw : topic) filter.insert(tw.word);

  tmr::CooccurrenceIndex idx({window, epsilon});
  for (const auto& text : tmr::load_reference_texts(reference))
    idx.add_document(tmr::preprocess(text, pp), filter.empty() ? nullptr : &filter);
  idx.save(output);
  std::cout << nlohmann::json{{"windows", idx.total_windows()},
                              {"vocabulary", idx.vocabulary_size()},
                              {"config_id", idx.config_id()},
                              {"output", output}}
                   .dump(2)
            << "\n";
  return 0;
}

int cmd_fit(const std::string& input, const tmr::FitParams& params, std::size_t n,
            const std::string& model_out, const std::string& topics_out, bool verbose) {
  auto processed = tmr::load_processed(input);
  tmr::SweepCallback cb;
  if (verbose)
    cb = [](std::size_t sweep, double ll) {
      std::fprintf(stderr, "sweep %zu log-likelihood %.4f\n", sweep, ll);
    };
  tmr::LdaModel model = tmr::fit(processed, params, cb);
  if (!model_out.empty()) tmr::save_model(model, model_out);
  nlohmann::json out{{"k", model.k},
                     {"vocabulary", model.vocab.size()},
                     {"documents", model.doc_ids.size()},
                     {"excluded", model.excluded_doc_ids.size()},
                     {"final_log_likelihood", model.log_likelihood.back()}};
  if (!model_out.empty()) out["model"] = model_out;
  if (!topics_out.empty()) {
    tmr::TopicSet ts = tmr::top_keywords(model, n);
    tmr::save_topics(ts, topics_out);
    out["topics"] = topics_out;
    out["n"] = n;
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_evaluate(const std::string& topics_path, const std::string& index_path,
                 const std::string& model_id, const std::string& variant) {
  tmr::TopicSet ts = tmr::load_topics(topics_path);
  tmr::CooccurrenceIndex idx = tmr::CooccurrenceIndex::load(index_path);
  tmr::MetricReport rep = tmr::evaluate(ts, idx, model_id, variant);
  std::cout << tmr::report_to_json(rep).dump(2) << "\n";
  return 0;
}

int cmd_compare(const std::vector<std::string>& report_paths) {
  tmr::ComparisonReport rep;
  for (const auto& path : report_paths) {
    nlohmann::json j = nlohmann::json::parse(tmr::read_file(path), nullptr, false);
    if (j.is_discarded()) throw tmr::Error("compare: malformed JSON in " + path);
    tmr::VariantRow row;
    row.metrics = tmr::report_from_json(j);
    row.ok = true;
    row.model_id = row.metrics.model_id.empty() ? "model" : row.metrics.model_id;
    row.label = row.metrics.variant.empty() ? path : row.metrics.variant;
    row.variant = row.metrics.variant;
    rep.rows.push_back(std::move(row));
  }
  std::cout << tmr::render_comparison_text(rep);
  if (rep.rows.size() > 1) {
    const auto& base = rep.rows.front().metrics;
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
      const auto& m = rep.rows[i].metrics;
      std::printf("delta vs first: C_v %+0.4f  TU %+0.4f  TR %+0.4f  TD %+0.4f  (%s)\n",
                  m.cv - base.cv, m.tu - base.tu, m.tr - base.tr, m.td - base.td,
                  rep.rows[i].label.c_str());
    }
  }
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& output_override) {
  tmr::RunConfig cfg = tmr::load_run_config(config_path);
  if (!output_override.empty()) cfg.output = output_override;
  std::unique_ptr<tmr::Provider> provider;
  if (cfg.provider == "http")
    provider = std::make_unique<tmr::HttpProvider>(cfg.provider_cfg);
  else
    provider = tmr::make_provider(cfg);
  tmr::ComparisonReport rep = tmr::run_pipeline(cfg, provider.get());

  std::cout << tmr::render_comparison_text(rep);
  nlohmann::json rows = nlohmann::json::array();
  bool any_ok = false, all_ok = true;
  for (const auto& r : rep.rows) {
    rows.push_back({{"variant", r.variant}, {"ok", r.ok}});
    any_ok = any_ok || r.ok;
    all_ok = all_ok && r.ok;
  }
  const auto out = std::filesystem::path(cfg.output);
  std::cout << nlohmann::json{
                   {"comparison_json", (out / "reports" / "comparison.json").string()},
                   {"comparison_txt", (out / "reports" / "comparison.txt").string()},
                   {"rows", std::move(rows)}}
                   .dump(2)
            << "\n";
  if (!any_ok) return 2;
  if (!all_ok) emit_error("one or more variants failed; see comparison report");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Short-text topic modeling pipeline: rephrase, preprocess, fit LDA, evaluate "
               "topic quality (C_v, TU, TR, TD)"};
  app.require_subcommand(1);
  int rc = 0;

  // stats
  auto* stats = app.add_subcommand("stats", "Ingest a corpus and print word-count statistics");
  struct { std::string input, format = "jsonl"; } st;
  stats->add_option("--input", st.input, "Corpus file (JSONL {id, text} or CSV)")
      ->required()->check(CLI::ExistingFile);
  stats->add_option("--format", st.format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));
  stats->callback([&] { rc = cmd_stats(st.input, st.format); });

  // preprocess
  auto* prep = app.add_subcommand("preprocess", "Clean and tokenize a corpus to JSONL");
  struct { std::string input, format = "jsonl", output; } pr;
  PreprocessFlags prep_ppf;
  prep->add_option("--input", pr.input, "Corpus file")->required()->check(CLI::ExistingFile);
  prep->add_option("--format", pr.format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));
  prep->add_option("--output", pr.output, "Processed JSONL output path")->required();
  prep_ppf.attach(prep);
  prep->callback([&] { rc = cmd_preprocess(pr.input, pr.format, pr.output, prep_ppf); });

  // rephrase
  auto* reph = app.add_subcommand("rephrase", "Rephrase a corpus through an LLM provider");
  struct {
    std::string input, format = "jsonl", scheme, cache, output, records;
  } rp;
  ProviderFlags reph_pf;
  reph->add_option("--input", rp.input, "Corpus file")->required()->check(CLI::ExistingFile);
  reph->add_option("--format", rp.format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));
  reph->add_option("--scheme", rp.scheme, "general or colloquial_to_formal (alias c-to-f)")
      ->required();
  reph->add_option("--cache", rp.cache, "Append-only JSONL record cache")->required();
  reph->add_option("--output", rp.output, "Write rephrased corpus JSONL {id, text}");
  reph->add_option("--records", rp.records, "Write all records (including failures) as JSONL");
  reph_pf.attach(reph);
  reph->callback([&] {
    rc = cmd_rephrase(rp.input, rp.format, rp.scheme, rp.cache, rp.output, rp.records, reph_pf);
  });

  // build-index
  auto* bidx = app.add_subcommand(
      "build-index", "Build a sliding-window co-occurrence index from a reference corpus");
  struct {
    std::string reference, output, filter_words, filter_topics;
    std::size_t window = 110;
    double epsilon = 1e-12;
  } bi;
  PreprocessFlags bidx_ppf;
  bidx->add_option("--reference", bi.reference,
                   "Reference text: one document per line, or a directory of files")
      ->required()->check(CLI::ExistingPath);
  bidx->add_option("--output", bi.output, "Index output path")->required();
  bidx->add_option("--window", bi.window, "Sliding window size (default 110)");
  bidx->add_option("--epsilon", bi.epsilon, "NPMI smoothing constant (default 1e-12)");
  bidx->add_option("--filter-words", bi.filter_words, "Only count words from this list file")
      ->check(CLI::ExistingFile);
  bidx->add_option("--filter-topics", bi.filter_topics,
                   "Only count words appearing in this topics JSON")
      ->check(CLI::ExistingFile);
  bidx_ppf.attach(bidx);
  bidx->callback([&] {
    rc = cmd_build_index(bi.reference, bi.output, bi.window, bi.epsilon, bi.filter_words,
                         bi.filter_topics, bidx_ppf);
  });

  // fit
  auto* fitc = app.add_subcommand("fit", "Fit an LDA model to a processed corpus");
  struct {
    std::string input, model_out, topics_out;
    std::size_t n = 15;
    bool verbose = false;
  } ft;
  tmr::FitParams fparams;
  fitc->add_option("--input", ft.input, "Processed corpus JSONL")->required()
      ->check(CLI::ExistingFile);
  fitc->add_option("--k", fparams.k, "Topic count (default 8)");
  fitc->add_option("--n", ft.n, "Keywords per topic for --topics-out (default 15)");
  fitc->add_option("--alpha", fparams.alpha, "Document-topic prior (default 50/K)");
  fitc->add_option("--beta", fparams.beta, "Topic-word prior (default 0.01)");
  fitc->add_option("--iterations", fparams.iterations, "Gibbs sweeps (default 1000)");
  fitc->add_option("--seed", fparams.seed, "RNG seed (default 42)");
  fitc->add_option("--min-doc-freq", fparams.min_doc_freq,
                   "Vocabulary document-frequency floor (default 2)");
  fitc->add_option("--threads", fparams.threads,
                   "Sampling shards per sweep (>1 is approximate)");
  fitc->add_option("--model-out", ft.model_out, "Model JSON output path");
  fitc->add_option("--topics-out", ft.topics_out, "TopicSet JSON output path");
  fitc->add_flag("--verbose", ft.verbose, "Log per-sweep log-likelihood to stderr");
  fitc->callback(
      [&] { rc = cmd_fit(ft.input, fparams, ft.n, ft.model_out, ft.topics_out, ft.verbose); });

  // evaluate
  auto* eval = app.add_subcommand("evaluate", "Score a TopicSet against a co-occurrence index");
  struct { std::string topics, index, model_id, variant; } ev;
  eval->add_option("--topics", ev.topics, "TopicSet JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--index", ev.index, "Co-occurrence index file")->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--model-id", ev.model_id, "Label recorded in the report");
  eval->add_option("--variant", ev.variant, "Variant label recorded in the report");
  eval->callback([&] { rc = cmd_evaluate(ev.topics, ev.index, ev.model_id, ev.variant); });

  // compare
  auto* comp = app.add_subcommand("compare", "Render metric reports side by side with deltas");
  std::vector<std::string> report_paths;
  comp->add_option("reports", report_paths, "MetricReport JSON files")->required()
      ->check(CLI::ExistingFile);
  comp->callback([&] { rc = cmd_compare(report_paths); });

  // run
  auto* runc = app.add_subcommand("run", "Run the full pipeline from a config file");
  struct { std::string config, output; } rn;
  runc->add_option("--config", rn.config, "Run config (key = value lines, `include` supported)")
      ->required()->check(CLI::ExistingFile);
  runc->add_option("--output", rn.output, "Override the config's output directory");
  runc->callback([&] { rc = cmd_run(rn.config, rn.output); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    emit_error(e.what());
    return 1;
  } catch (const tmr::ConfigError& e) {
    emit_error(e.what());
    return 1;
  } catch (const std::exception& e) {
    emit_error(e.what());
    return 2;
  }
  return rc;
}
