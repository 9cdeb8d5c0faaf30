#pragma once

// Topic-quality metrics over a co-occurrence index and a TopicSet:
//   cv  — mean cosine between each keyword's NPMI context vector and the
//         topic's summed context vector
//   tu  — mean inverse occurrence count of each keyword across topics
//   tr  — mean share of other topics repeating each keyword
//   td  — fraction of keyword slots whose word occurs in exactly one topic
//
// tu/tr/td reduce algebraically to integer counts divided once at the end,
// which keeps them exact for the boundary cases (all-distinct, all-identical).

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "tmr/cooccur.hpp"
#include "tmr/topics.hpp"
#include "tmr/util.hpp"

namespace tmr {

inline double npmi(const CooccurrenceIndex& idx, const std::string& a, const std::string& b) {
  const double eps = idx.config().epsilon;
  const double pij = idx.p(a, b);
  const double pi = idx.p(a);
  const double pj = idx.p(b);
  const double num = std::log((pij + eps) / (pi * pj + eps));
  const double den = -std::log(pij + eps);
  return num / den;
}

namespace detail {

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace detail

// Coherence of one keyword list: each word's NPMI vector against the others,
// compared with the topic-level aggregate (element-wise sum of all vectors).
inline double topic_cv(const CooccurrenceIndex& idx, const std::vector<std::string>& words) {
  const std::size_t n = words.size();
  if (n == 0) return 0.0;
  std::vector<std::vector<double>> ctx(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) ctx[i][j] = npmi(idx, words[i], words[j]);
  std::vector<double> agg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) agg[j] += ctx[i][j];
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += detail::cosine(ctx[i], agg);
  return sum / static_cast<double>(n);
}

struct DiversityScores {
  double tu = 0.0;
  double tr = 0.0;
  double td = 0.0;
  bool tr_undefined = false;              // K == 1: no other topics to repeat into
  std::map<std::uint64_t, std::uint64_t> occurrence_histogram;  // #topics containing a word -> #words
};

inline DiversityScores diversity_scores(const TopicSet& ts) {
  const std::size_t k = ts.k();
  const std::size_t n = ts.n();
  std::unordered_map<std::string, std::uint64_t> occ;
  for (const auto& topic : ts.topics)
    for (const auto& tw : topic) ++occ[tw.word];

  // Sum over slots of 1/#(w) equals the number of distinct words; the other
  // two sums reduce the same way, so each score is one exact division.
  std::uint64_t distinct = 0, singletons = 0, repeats = 0;
  DiversityScores out;
  for (const auto& [word, c] : occ) {
    ++distinct;
    if (c == 1) ++singletons;
    repeats += c * (c - 1);
    ++out.occurrence_histogram[c];
  }
  const double slots = static_cast<double>(k) * static_cast<double>(n);
  out.tu = static_cast<double>(distinct) / slots;
  out.td = static_cast<double>(singletons) / slots;
  if (k <= 1) {
    out.tr = 0.0;
    out.tr_undefined = true;
  } else {
    out.tr = static_cast<double>(repeats) / (slots * static_cast<double>(k - 1));
  }
  return out;
}

struct MetricReport {
  double cv = 0.0;
  double tu = 0.0;
  double tr = 0.0;
  double td = 0.0;
  std::vector<double> per_topic_cv;
  std::map<std::uint64_t, std::uint64_t> occurrence_histogram;
  std::vector<std::string> flags;
  std::size_t k = 0;
  std::size_t n = 0;
  std::uint64_t index_windows = 0;
  std::string index_config_id;
  std::string model_id;  // provenance labels, set by the caller
  std::string variant;
};

inline MetricReport evaluate(const TopicSet& ts, const CooccurrenceIndex& idx,
                             const std::string& model_id = "", const std::string& variant = "") {
  ts.validate();
  MetricReport rep;
  rep.k = ts.k();
  rep.n = ts.n();
  rep.index_windows = idx.total_windows();
  rep.index_config_id = idx.config_id();
  rep.model_id = model_id;
  rep.variant = variant;

  std::uint64_t oov = 0;
  double cv_sum = 0.0;
  for (const auto& topic : ts.topics) {
    std::vector<std::string> words;
    words.reserve(topic.size());
    for (const auto& tw : topic) {
      words.push_back(tw.word);
      if (idx.window_count(tw.word) == 0) ++oov;
    }
    const double t = topic_cv(idx, words);
    rep.per_topic_cv.push_back(t);
    cv_sum += t;
  }
  rep.cv = cv_sum / static_cast<double>(rep.k);

  DiversityScores d = diversity_scores(ts);
  rep.tu = d.tu;
  rep.tr = d.tr;
  rep.td = d.td;
  rep.occurrence_histogram = std::move(d.occurrence_histogram);
  if (d.tr_undefined) rep.flags.push_back("single topic: redundancy reported as 0");
  if (oov > 0)
    rep.flags.push_back(std::to_string(oov) + " keyword slot(s) absent from reference index");
  if (idx.total_windows() == 0) rep.flags.push_back("reference index has no windows");
  if (rep.cv < 0.0) rep.flags.push_back("coherence below 0 (reported raw, not clamped)");
  return rep;
}

inline nlohmann::json report_to_json(const MetricReport& r) {
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [c, w] : r.occurrence_histogram) hist[std::to_string(c)] = w;
  return nlohmann::json{
      {"cv", r.cv},
      {"tu", r.tu},
      {"tr", r.tr},
      {"td", r.td},
      {"per_topic_cv", r.per_topic_cv},
      {"occurrence_histogram", std::move(hist)},
      {"flags", r.flags},
      {"k", r.k},
      {"n", r.n},
      {"index_windows", r.index_windows},
      {"index_config_id", r.index_config_id},
      {"model_id", r.model_id},
      {"variant", r.variant},
  };
}

inline MetricReport report_from_json(const nlohmann::json& j) {
  MetricReport r;
  r.cv = j.at("cv").get<double>();
  r.tu = j.at("tu").get<double>();
  r.tr = j.at("tr").get<double>();
  r.td = j.at("td").get<double>();
  if (j.contains("per_topic_cv")) r.per_topic_cv = j["per_topic_cv"].get<std::vector<double>>();
  if (j.contains("occurrence_histogram"))
    for (const auto& [key, val] : j["occurrence_histogram"].items())
      r.occurrence_histogram[std::stoull(key)] = val.get<std::uint64_t>();
  if (j.contains("flags")) r.flags = j["flags"].get<std::vector<std::string>>();
  r.k = j.value("k", std::size_t{0});
  r.n = j.value("n", std::size_t{0});
  r.index_windows = j.value("index_windows", std::uint64_t{0});
  r.index_config_id = j.value("index_config_id", std::string{});
  r.model_id = j.value("model_id", std::string{});
  r.variant = j.value("variant", std::string{});
  return r;
}

}  // namespace tmr
