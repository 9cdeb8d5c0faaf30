#pragma once

// Collapsed Gibbs sampling for LDA.
//
// Determinism contract: every document owns an RNG stream derived from
// (global seed, doc id), and sweeps visit documents in id order, so the
// fitted model is a pure function of (corpus contents, parameters) —
// input order does not matter.  Parallel sweeps sample shards against a
// per-sweep snapshot of the topic-word counts and merge deltas in shard
// order, which is also deterministic but not bit-identical to the serial
// schedule (documented approximation).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "tmr/preprocess.hpp"
#include "tmr/topics.hpp"
#include "tmr/util.hpp"

namespace tmr {

struct Vocabulary {
  std::vector<std::string> tokens;             // id -> token
  std::unordered_map<std::string, std::uint32_t> ids;  // token -> id

  std::size_t size() const { return tokens.size(); }
  bool contains(const std::string& t) const { return ids.count(t) != 0; }
};

inline Vocabulary build_vocabulary(const std::vector<ProcessedDocument>& corpus,
                                   std::size_t min_doc_freq = 2) {
  if (corpus.empty()) throw Error("vocabulary: empty corpus");
  std::unordered_map<std::string, std::uint64_t> doc_freq;
  std::unordered_set<std::string> seen;
  for (const auto& doc : corpus) {
    seen.clear();
    for (const auto& t : doc.tokens)
      if (seen.insert(t).second) ++doc_freq[t];
  }
  std::vector<std::pair<std::string, std::uint64_t>> kept;
  for (auto& [tok, df] : doc_freq)
    if (df >= min_doc_freq) kept.emplace_back(tok, df);
  if (kept.empty()) throw Error("vocabulary: no token meets min_doc_freq=" +
                                std::to_string(min_doc_freq));
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  v.tokens.reserve(kept.size());
  for (auto& [tok, df] : kept) {
    v.ids.emplace(tok, static_cast<std::uint32_t>(v.tokens.size()));
    v.tokens.push_back(tok);
  }
  return v;
}

struct FitParams {
  std::size_t k = 8;
  double alpha = -1.0;  // <= 0 means 50/K
  double beta = 0.01;
  std::size_t iterations = 1000;
  std::uint64_t seed = 42;
  std::size_t min_doc_freq = 2;
  std::size_t threads = 1;

  double effective_alpha() const { return alpha > 0.0 ? alpha : 50.0 / static_cast<double>(k); }
};

struct LdaModel {
  std::size_t k = 0;
  double alpha = 0.0;
  double beta = 0.0;
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  Vocabulary vocab;
  std::vector<std::string> doc_ids;           // modeled documents, sorted by id
  std::vector<std::string> excluded_doc_ids;  // no in-vocabulary tokens
  std::vector<std::vector<std::uint64_t>> topic_word;  // K x V
  std::vector<std::uint64_t> topic_total;              // K
  std::vector<std::vector<std::uint64_t>> doc_topic;   // D x K
  std::vector<std::uint64_t> doc_total;                // D
  std::vector<double> log_likelihood;                  // one entry per sweep

  double phi(std::size_t topic, std::uint32_t word) const {
    const double v = static_cast<double>(vocab.size());
    return (static_cast<double>(topic_word[topic][word]) + beta) /
           (static_cast<double>(topic_total[topic]) + v * beta);
  }

  std::vector<double> theta(std::size_t doc) const {
    std::vector<double> out(k);
    const double denom = static_cast<double>(doc_total[doc]) + static_cast<double>(k) * alpha;
    for (std::size_t t = 0; t < k; ++t)
      out[t] = (static_cast<double>(doc_topic[doc][t]) + alpha) / denom;
    return out;
  }
};

namespace detail {

// Standardized engine + fixed-width draw helpers: std::*_distribution is
// implementation-defined, so we avoid it for cross-platform reproducibility.
inline std::mt19937_64 doc_rng(std::uint64_t seed, const std::string& doc_id) {
  std::string key = std::to_string(seed);
  key += '\x1f';
  key += doc_id;
  return std::mt19937_64(fnv1a64(key));
}

inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::size_t uniform_topic(std::mt19937_64& rng, std::size_t k) {
  return static_cast<std::size_t>(rng() % k);
}

// lgamma(c + offset) memoized over integer c; counts are bounded by corpus size.
class LgammaTable {
 public:
  explicit LgammaTable(double offset) : offset_(offset) {}
  double operator()(std::uint64_t c) {
    if (c >= table_.size()) {
      std::size_t old = table_.size();
      table_.resize(c + 1);
      for (std::size_t i = old; i < table_.size(); ++i)
        table_[i] = std::lgamma(static_cast<double>(i) + offset_);
    }
    return table_[c];
  }

 private:
  double offset_;
  std::vector<double> table_;
};

struct GibbsState {
  std::vector<std::vector<std::uint32_t>> docs;  // in-vocabulary token ids
  std::vector<std::mt19937_64> rngs;
  std::vector<std::vector<std::uint32_t>> z;     // token topic assignments
};

inline void sample_doc(std::size_t d, GibbsState& st, LdaModel& m,
                       std::vector<std::vector<std::uint64_t>>& tw,
                       std::vector<std::uint64_t>& tt, double vbeta,
                       std::vector<double>& p) {
  auto& doc = st.docs[d];
  auto& zd = st.z[d];
  auto& rng = st.rngs[d];
  auto& dt = m.doc_topic[d];
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::uint32_t w = doc[i];
    const std::size_t old = zd[i];
    --dt[old];
    --tw[old][w];
    --tt[old];
    double total = 0.0;
    for (std::size_t t = 0; t < m.k; ++t) {
      total += (static_cast<double>(dt[t]) + m.alpha) *
               (static_cast<double>(tw[t][w]) + m.beta) /
               (static_cast<double>(tt[t]) + vbeta);
      p[t] = total;
    }
    const double u = unit_uniform(rng) * total;
    std::size_t pick = 0;
    while (pick + 1 < m.k && u >= p[pick]) ++pick;
    zd[i] = static_cast<std::uint32_t>(pick);
    ++dt[pick];
    ++tw[pick][w];
    ++tt[pick];
  }
}

inline double joint_log_likelihood(const LdaModel& m, LgammaTable& lg_beta,
                                   LgammaTable& lg_alpha) {
  const double v = static_cast<double>(m.vocab.size());
  const double lg_b0 = lg_beta(0);
  const double lg_a0 = lg_alpha(0);
  double ll = 0.0;
  for (std::size_t t = 0; t < m.k; ++t) {
    ll += std::lgamma(v * m.beta) -
          std::lgamma(static_cast<double>(m.topic_total[t]) + v * m.beta);
    for (std::uint64_t c : m.topic_word[t])
      if (c > 0) ll += lg_beta(c) - lg_b0;
  }
  const double ka = static_cast<double>(m.k) * m.alpha;
  for (std::size_t d = 0; d < m.doc_ids.size(); ++d) {
    ll += std::lgamma(ka) - std::lgamma(static_cast<double>(m.doc_total[d]) + ka);
    for (std::uint64_t c : m.doc_topic[d])
      if (c > 0) ll += lg_alpha(c) - lg_a0;
  }
  return ll;
}

}  // namespace detail

using SweepCallback = std::function<void(std::size_t sweep, double log_likelihood)>;

inline LdaModel fit(const std::vector<ProcessedDocument>& corpus, const Vocabulary& vocab,
                    const FitParams& params, const SweepCallback& on_sweep = {}) {
  if (params.k < 2) throw Error("lda: need at least 2 topics");
  if (params.iterations < 1) throw Error("lda: need at least 1 sweep");
  if (vocab.size() == 0) throw Error("lda: empty vocabulary");

  // Canonical order + per-doc streams make the fit order-independent.
  std::vector<const ProcessedDocument*> sorted;
  sorted.reserve(corpus.size());
  for (const auto& d : corpus) sorted.push_back(&d);
  std::sort(sorted.begin(), sorted.end(),
            [](const ProcessedDocument* a, const ProcessedDocument* b) { return a->id < b->id; });
  for (std::size_t i = 1; i < sorted.size(); ++i)
    if (sorted[i]->id == sorted[i - 1]->id)
      throw Error("lda: duplicate document id '" + sorted[i]->id + "'");

  LdaModel m;
  m.k = params.k;
  m.alpha = params.effective_alpha();
  m.beta = params.beta;
  m.iterations = params.iterations;
  m.seed = params.seed;
  m.vocab = vocab;

  detail::GibbsState st;
  for (const auto* doc : sorted) {
    std::vector<std::uint32_t> ids;
    for (const auto& t : doc->tokens) {
      auto it = vocab.ids.find(t);
      if (it != vocab.ids.end()) ids.push_back(it->second);
    }
    if (ids.empty()) {
      m.excluded_doc_ids.push_back(doc->id);
      continue;
    }
    m.doc_ids.push_back(doc->id);
    st.docs.push_back(std::move(ids));
  }
  if (st.docs.size() < params.k)
    throw Error("lda: fewer non-empty documents (" + std::to_string(st.docs.size()) +
                ") than topics (" + std::to_string(params.k) + ")");

  const std::size_t d_count = st.docs.size();
  const std::size_t v_count = vocab.size();
  m.topic_word.assign(m.k, std::vector<std::uint64_t>(v_count, 0));
  m.topic_total.assign(m.k, 0);
  m.doc_topic.assign(d_count, std::vector<std::uint64_t>(m.k, 0));
  m.doc_total.assign(d_count, 0);
  st.rngs.reserve(d_count);
  st.z.resize(d_count);

  for (std::size_t d = 0; d < d_count; ++d) {
    st.rngs.push_back(detail::doc_rng(params.seed, m.doc_ids[d]));
    auto& rng = st.rngs.back();
    st.z[d].resize(st.docs[d].size());
    for (std::size_t i = 0; i < st.docs[d].size(); ++i) {
      const std::size_t t = detail::uniform_topic(rng, m.k);
      st.z[d][i] = static_cast<std::uint32_t>(t);
      ++m.doc_topic[d][t];
      ++m.topic_word[t][st.docs[d][i]];
      ++m.topic_total[t];
      ++m.doc_total[d];
    }
  }

  const double vbeta = static_cast<double>(v_count) * m.beta;
  detail::LgammaTable lg_beta(m.beta), lg_alpha(m.alpha);
  m.log_likelihood.reserve(params.iterations);
  const std::size_t threads = std::max<std::size_t>(1, params.threads);

  std::vector<double> p(m.k);
  for (std::size_t sweep = 0; sweep < params.iterations; ++sweep) {
    if (threads == 1 || d_count < 2 * threads) {
      for (std::size_t d = 0; d < d_count; ++d)
        detail::sample_doc(d, st, m, m.topic_word, m.topic_total, vbeta, p);
    } else {
      // Shards sample against a shared snapshot; deltas merge in shard order.
      const auto snapshot_tw = m.topic_word;
      const auto snapshot_tt = m.topic_total;
      std::vector<std::vector<std::vector<std::uint64_t>>> shard_tw(
          threads, snapshot_tw);
      std::vector<std::vector<std::uint64_t>> shard_tt(threads, snapshot_tt);
      std::vector<std::thread> pool;
      const std::size_t per = (d_count + threads - 1) / threads;
      for (std::size_t s = 0; s < threads; ++s) {
        pool.emplace_back([&, s]() {
          std::vector<double> lp(m.k);
          const std::size_t lo = s * per;
          const std::size_t hi = std::min(d_count, lo + per);
          for (std::size_t d = lo; d < hi; ++d)
            detail::sample_doc(d, st, m, shard_tw[s], shard_tt[s], vbeta, lp);
        });
      }
      for (auto& t : pool) t.join();
      for (std::size_t s = 0; s < threads; ++s) {
        for (std::size_t t = 0; t < m.k; ++t) {
          m.topic_total[t] += shard_tt[s][t] - snapshot_tt[t];
          for (std::size_t w = 0; w < v_count; ++w)
            m.topic_word[t][w] += shard_tw[s][t][w] - snapshot_tw[t][w];
        }
      }
    }
    const double ll = detail::joint_log_likelihood(m, lg_beta, lg_alpha);
    m.log_likelihood.push_back(ll);
    if (on_sweep) on_sweep(sweep + 1, ll);
  }
  return m;
}

inline LdaModel fit(const std::vector<ProcessedDocument>& corpus, const FitParams& params,
                    const SweepCallback& on_sweep = {}) {
  return fit(corpus, build_vocabulary(corpus, params.min_doc_freq), params, on_sweep);
}

inline TopicSet top_keywords(const LdaModel& m, std::size_t n) {
  if (n == 0) throw Error("top_keywords: n must be positive");
  if (n > m.vocab.size())
    throw Error("top_keywords: n=" + std::to_string(n) + " exceeds vocabulary size " +
                std::to_string(m.vocab.size()));
  TopicSet ts;
  for (std::size_t t = 0; t < m.k; ++t) {
    std::vector<std::uint32_t> order(m.vocab.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      if (m.topic_word[t][a] != m.topic_word[t][b]) return m.topic_word[t][a] > m.topic_word[t][b];
      return m.vocab.tokens[a] < m.vocab.tokens[b];
    });
    Topic topic;
    for (std::size_t i = 0; i < n; ++i)
      topic.push_back({m.vocab.tokens[order[i]], m.phi(t, order[i])});
    ts.topics.push_back(std::move(topic));
  }
  ts.validate();
  return ts;
}

struct TopicDistribution {
  std::vector<double> p;
  std::size_t dominant = 0;
  bool uniform_fallback = false;  // no in-vocabulary tokens
};

inline TopicDistribution infer_doc_topics(const LdaModel& m, const ProcessedDocument& doc,
                                          std::size_t sweeps = 50) {
  TopicDistribution out;
  std::vector<std::uint32_t> ids;
  for (const auto& t : doc.tokens) {
    auto it = m.vocab.ids.find(t);
    if (it != m.vocab.ids.end()) ids.push_back(it->second);
  }
  if (ids.empty()) {
    out.p.assign(m.k, 1.0 / static_cast<double>(m.k));
    out.uniform_fallback = true;
    return out;
  }

  // Fold-in: local assignments move, global topic-word counts stay fixed.
  auto rng = detail::doc_rng(m.seed ^ 0x666f6c64u /* per-use salt */, doc.id);
  std::vector<std::uint64_t> dt(m.k, 0);
  std::vector<std::uint32_t> z(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    z[i] = static_cast<std::uint32_t>(detail::uniform_topic(rng, m.k));
    ++dt[z[i]];
  }
  const double vbeta = static_cast<double>(m.vocab.size()) * m.beta;
  std::vector<double> p(m.k);
  for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t i = 0; i < ids.size(); ++i) {
      --dt[z[i]];
      double total = 0.0;
      for (std::size_t t = 0; t < m.k; ++t) {
        total += (static_cast<double>(dt[t]) + m.alpha) *
                 (static_cast<double>(m.topic_word[t][ids[i]]) + m.beta) /
                 (static_cast<double>(m.topic_total[t]) + vbeta);
        p[t] = total;
      }
      const double u = detail::unit_uniform(rng) * total;
      std::size_t pick = 0;
      while (pick + 1 < m.k && u >= p[pick]) ++pick;
      z[i] = static_cast<std::uint32_t>(pick);
      ++dt[pick];
    }
  }
  const double denom = static_cast<double>(ids.size()) + static_cast<double>(m.k) * m.alpha;
  out.p.resize(m.k);
  for (std::size_t t = 0; t < m.k; ++t)
    out.p[t] = (static_cast<double>(dt[t]) + m.alpha) / denom;
  out.dominant = static_cast<std::size_t>(
      std::max_element(out.p.begin(), out.p.end()) - out.p.begin());
  return out;
}

inline nlohmann::json model_to_json(const LdaModel& m) {
  return nlohmann::json{
      {"k", m.k},
      {"alpha", m.alpha},
      {"beta", m.beta},
      {"iterations", m.iterations},
      {"seed", m.seed},
      {"vocabulary", m.vocab.tokens},
      {"doc_ids", m.doc_ids},
      {"excluded_doc_ids", m.excluded_doc_ids},
      {"topic_word_counts", m.topic_word},
      {"doc_topic_counts", m.doc_topic},
      {"log_likelihood", m.log_likelihood},
  };
}

inline LdaModel model_from_json(const nlohmann::json& j) {
  LdaModel m;
  m.k = j.at("k").get<std::size_t>();
  m.alpha = j.at("alpha").get<double>();
  m.beta = j.at("beta").get<double>();
  m.iterations = j.at("iterations").get<std::size_t>();
  m.seed = j.at("seed").get<std::uint64_t>();
  auto tokens = j.at("vocabulary").get<std::vector<std::string>>();
  for (std::size_t i = 0; i < tokens.size(); ++i)
    m.vocab.ids.emplace(tokens[i], static_cast<std::uint32_t>(i));
  m.vocab.tokens = std::move(tokens);
  m.doc_ids = j.at("doc_ids").get<std::vector<std::string>>();
  m.excluded_doc_ids = j.at("excluded_doc_ids").get<std::vector<std::string>>();
  m.topic_word = j.at("topic_word_counts").get<std::vector<std::vector<std::uint64_t>>>();
  m.doc_topic = j.at("doc_topic_counts").get<std::vector<std::vector<std::uint64_t>>>();
  m.log_likelihood = j.at("log_likelihood").get<std::vector<double>>();
  if (m.topic_word.size() != m.k) throw Error("model: topic_word_counts shape mismatch");
  m.topic_total.assign(m.k, 0);
  for (std::size_t t = 0; t < m.k; ++t) {
    if (m.topic_word[t].size() != m.vocab.size())
      throw Error("model: topic_word_counts row " + std::to_string(t) + " shape mismatch");
    for (std::uint64_t c : m.topic_word[t]) m.topic_total[t] += c;
  }
  if (m.doc_topic.size() != m.doc_ids.size()) throw Error("model: doc_topic_counts shape mismatch");
  m.doc_total.assign(m.doc_topic.size(), 0);
  for (std::size_t d = 0; d < m.doc_topic.size(); ++d) {
    if (m.doc_topic[d].size() != m.k)
      throw Error("model: doc_topic_counts row " + std::to_string(d) + " shape mismatch");
    for (std::uint64_t c : m.doc_topic[d]) m.doc_total[d] += c;
  }
  return m;
}

inline void save_model(const LdaModel& m, const std::string& path) {
  write_file(path, model_to_json(m).dump() + "\n");
}

inline LdaModel load_model(const std::string& path) {
  nlohmann::json j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error("model: parse failure in " + path);
  return model_from_json(j);
}

}  // namespace tmr
