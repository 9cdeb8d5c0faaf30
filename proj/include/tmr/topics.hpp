#pragma once

// TopicSet: K ordered keyword lists of length N with per-word weights.
// The JSON form below is both the model export format and the import
// format for externally produced keyword lists.

#include <cstddef>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "tmr/util.hpp"

namespace tmr {

struct TopicWord {
  std::string word;
  double weight = 0.0;
};

using Topic = std::vector<TopicWord>;

struct TopicSet {
  std::vector<Topic> topics;

  std::size_t k() const { return topics.size(); }
  std::size_t n() const { return topics.empty() ? 0 : topics.front().size(); }

  // Throws on ragged lists, within-topic duplicates, or non-increasing
  // weight violations.
  void validate() const {
    if (topics.empty()) throw Error("TopicSet: no topics");
    const std::size_t len = topics.front().size();
    if (len == 0) throw Error("TopicSet: empty topic");
    for (std::size_t k = 0; k < topics.size(); ++k) {
      const Topic& t = topics[k];
      if (t.size() != len)
        throw Error("TopicSet: topic " + std::to_string(k) + " has " + std::to_string(t.size()) +
                    " words, expected " + std::to_string(len));
      std::unordered_set<std::string> seen;
      for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i].word.empty()) throw Error("TopicSet: empty word in topic " + std::to_string(k));
        if (!seen.insert(t[i].word).second)
          throw Error("TopicSet: duplicate word '" + t[i].word + "' in topic " + std::to_string(k));
        if (i > 0 && t[i].weight > t[i - 1].weight)
          throw Error("TopicSet: weights not non-increasing in topic " + std::to_string(k));
      }
    }
  }
};

inline nlohmann::json topics_to_json(const TopicSet& ts) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& topic : ts.topics) {
    nlohmann::json t = nlohmann::json::array();
    for (const auto& tw : topic) t.push_back({{"word", tw.word}, {"weight", tw.weight}});
    arr.push_back(std::move(t));
  }
  return nlohmann::json{{"k", ts.k()}, {"n", ts.n()}, {"topics", std::move(arr)}};
}

// Accepts the emitted format plus hand-written variants: entries may be
// plain strings or objects without a weight; missing weights get a strictly
// decreasing rank placeholder in (0,1) so TopicSet invariants still hold.
inline TopicSet topics_from_json(const nlohmann::json& j) {
  if (!j.contains("topics") || !j["topics"].is_array())
    throw Error("topic JSON: missing `topics` array");
  TopicSet ts;
  for (const auto& jt : j["topics"]) {
    if (!jt.is_array()) throw Error("topic JSON: each topic must be an array");
    Topic topic;
    const std::size_t n = jt.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& e = jt[i];
      TopicWord tw;
      if (e.is_string()) {
        tw.word = e.get<std::string>();
        tw.weight = static_cast<double>(n - i) / static_cast<double>(n + 1);
      } else if (e.is_object() && e.contains("word")) {
        tw.word = e["word"].get<std::string>();
        tw.weight = e.contains("weight") ? e["weight"].get<double>()
                                         : static_cast<double>(n - i) / static_cast<double>(n + 1);
      } else {
        throw Error("topic JSON: entries must be words or {word, weight} objects");
      }
      topic.push_back(std::move(tw));
    }
    ts.topics.push_back(std::move(topic));
  }
  ts.validate();
  return ts;
}

inline TopicSet load_topics(const std::string& path) {
  nlohmann::json j = nlohmann::json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw Error("topic JSON: parse failure in " + path);
  return topics_from_json(j);
}

inline void save_topics(const TopicSet& ts, const std::string& path) {
  write_file(path, topics_to_json(ts).dump(2) + "\n");
}

}  // namespace tmr
