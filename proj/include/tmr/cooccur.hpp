#pragma once

// Sliding-window co-occurrence index with boolean (per-window set) counting.
// Windows move with stride 1; a document shorter than the window yields a
// single window covering the whole document.  Empty documents contribute
// nothing.  The on-disk format is little-endian and documented in README.md.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tmr/util.hpp"

namespace tmr {

struct CooccurrenceConfig {
  std::size_t window_size = 110;
  double epsilon = 1e-12;
};

class CooccurrenceIndex {
 public:
  explicit CooccurrenceIndex(CooccurrenceConfig cfg = {}) : cfg_(cfg) {
    if (cfg_.window_size == 0) throw Error("cooccur: window size must be positive");
  }

  const CooccurrenceConfig& config() const { return cfg_; }
  std::uint64_t total_windows() const { return total_windows_; }
  std::size_t vocabulary_size() const { return words_.size(); }

  // Windows are positioned over the full token sequence; the optional filter
  // restricts which words (and pairs) get counted, not where windows fall.
  void add_document(const std::vector<std::string>& tokens,
                    const std::unordered_set<std::string>* filter = nullptr) {
    if (tokens.empty()) return;
    constexpr std::uint32_t kSkip = 0xffffffffu;
    std::vector<std::uint32_t> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens)
      ids.push_back(filter && !filter->count(t) ? kSkip : intern(t));

    const std::size_t w = cfg_.window_size;
    const std::size_t n_windows = ids.size() <= w ? 1 : ids.size() - w + 1;
    std::vector<std::uint32_t> distinct;
    for (std::size_t start = 0; start < n_windows; ++start) {
      const std::size_t end = std::min(start + w, ids.size());
      distinct.clear();
      for (std::size_t i = start; i < end; ++i)
        if (ids[i] != kSkip) distinct.push_back(ids[i]);
      std::sort(distinct.begin(), distinct.end());
      distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
      for (std::size_t i = 0; i < distinct.size(); ++i) {
        ++word_count_[distinct[i]];
        for (std::size_t j = i + 1; j < distinct.size(); ++j)
          ++pair_count_[pair_key(distinct[i], distinct[j])];
      }
      ++total_windows_;
    }
  }

  std::uint64_t window_count(const std::string& word) const {
    auto it = word_id_.find(word);
    return it == word_id_.end() ? 0 : word_count_[it->second];
  }

  std::uint64_t pair_window_count(const std::string& a, const std::string& b) const {
    if (a == b) return window_count(a);
    auto ia = word_id_.find(a);
    auto ib = word_id_.find(b);
    if (ia == word_id_.end() || ib == word_id_.end()) return 0;
    auto it = pair_count_.find(pair_key(ia->second, ib->second));
    return it == pair_count_.end() ? 0 : it->second;
  }

  double p(const std::string& word) const {
    if (total_windows_ == 0) return 0.0;
    return static_cast<double>(window_count(word)) / static_cast<double>(total_windows_);
  }

  // Joint probability; the diagonal is defined as P(w,w) = P(w).
  double p(const std::string& a, const std::string& b) const {
    if (total_windows_ == 0) return 0.0;
    return static_cast<double>(pair_window_count(a, b)) / static_cast<double>(total_windows_);
  }

  // Identifies the counting configuration so a persisted index can be
  // checked against the settings an evaluation expects.
  std::string config_id() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "w=%zu;eps=%.17g", cfg_.window_size, cfg_.epsilon);
    return fnv1a64_hex(buf);
  }

  void merge(const CooccurrenceIndex& other) {
    if (other.cfg_.window_size != cfg_.window_size || other.cfg_.epsilon != cfg_.epsilon)
      throw Error("cooccur: cannot merge indexes with different configurations");
    total_windows_ += other.total_windows_;
    std::vector<std::uint32_t> remap(other.words_.size());
    for (std::size_t i = 0; i < other.words_.size(); ++i) {
      remap[i] = intern(other.words_[i]);
      word_count_[remap[i]] += other.word_count_[i];
    }
    for (const auto& [key, count] : other.pair_count_) {
      const auto a = remap[static_cast<std::uint32_t>(key >> 32)];
      const auto b = remap[static_cast<std::uint32_t>(key & 0xffffffffu)];
      pair_count_[pair_key(a, b)] += count;
    }
  }

  // Canonical serialization: the word table is sorted lexicographically and
  // pair entries are remapped to sorted ids, so byte output is independent
  // of insertion order.
  void save(const std::string& path) const {
    std::vector<std::uint32_t> order(words_.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::uint32_t a, std::uint32_t b) { return words_[a] < words_[b]; });
    std::vector<std::uint32_t> rank(words_.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) rank[order[i]] = i;

    std::string out;
    out += "TMRCOOC1";
    put_u32(out, 1);
    put_u64(out, cfg_.window_size);
    put_f64(out, cfg_.epsilon);
    put_u64(out, total_windows_);
    put_u64(out, words_.size());
    for (std::uint32_t id : order) {
      put_u32(out, static_cast<std::uint32_t>(words_[id].size()));
      out += words_[id];
      put_u64(out, word_count_[id]);
    }
    std::vector<std::pair<std::uint64_t, std::uint64_t>> pairs;
    pairs.reserve(pair_count_.size());
    for (const auto& [key, count] : pair_count_) {
      const auto a = rank[static_cast<std::uint32_t>(key >> 32)];
      const auto b = rank[static_cast<std::uint32_t>(key & 0xffffffffu)];
      pairs.emplace_back(pair_key(a, b), count);
    }
    std::sort(pairs.begin(), pairs.end());
    put_u64(out, pairs.size());
    for (const auto& [key, count] : pairs) {
      put_u32(out, static_cast<std::uint32_t>(key >> 32));
      put_u32(out, static_cast<std::uint32_t>(key & 0xffffffffu));
      put_u64(out, count);
    }
    write_file(path, out);
  }

  static CooccurrenceIndex load(const std::string& path) {
    const std::string raw = read_file(path);
    ByteReader r(raw);
    if (r.bytes(8) != "TMRCOOC1") throw Error("cooccur: bad magic in " + path);
    if (r.u32() != 1) throw Error("cooccur: unsupported version in " + path);
    CooccurrenceConfig cfg;
    cfg.window_size = static_cast<std::size_t>(r.u64());
    cfg.epsilon = r.f64();
    CooccurrenceIndex idx(cfg);
    idx.total_windows_ = r.u64();
    const std::uint64_t n_words = r.u64();
    idx.words_.reserve(n_words);
    idx.word_count_.reserve(n_words);
    for (std::uint64_t i = 0; i < n_words; ++i) {
      const std::uint32_t len = r.u32();
      std::string w = r.bytes(len);
      if (!idx.word_id_.emplace(w, static_cast<std::uint32_t>(i)).second)
        throw Error("cooccur: duplicate word in " + path);
      idx.words_.push_back(std::move(w));
      idx.word_count_.push_back(r.u64());
    }
    const std::uint64_t n_pairs = r.u64();
    idx.pair_count_.reserve(n_pairs);
    for (std::uint64_t i = 0; i < n_pairs; ++i) {
      const std::uint32_t a = r.u32();
      const std::uint32_t b = r.u32();
      if (a >= n_words || b >= n_words || a == b)
        throw Error("cooccur: pair id out of range in " + path);
      idx.pair_count_[pair_key(a, b)] = r.u64();
    }
    if (!r.at_end()) throw Error("cooccur: trailing bytes in " + path);
    return idx;
  }

 private:
  std::uint32_t intern(const std::string& word) {
    auto [it, inserted] = word_id_.emplace(word, static_cast<std::uint32_t>(words_.size()));
    if (inserted) {
      words_.push_back(word);
      word_count_.push_back(0);
    }
    return it->second;
  }

  static std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
  }

  CooccurrenceConfig cfg_;
  std::uint64_t total_windows_ = 0;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::uint32_t> word_id_;
  std::vector<std::uint64_t> word_count_;
  std::unordered_map<std::uint64_t, std::uint64_t> pair_count_;
};

template <class Docs>
CooccurrenceIndex build_index(const Docs& docs, CooccurrenceConfig cfg = {},
                              const std::unordered_set<std::string>* filter = nullptr) {
  if (docs.empty()) throw Error("cooccur: empty reference corpus");
  CooccurrenceIndex idx(cfg);
  for (const auto& d : docs) idx.add_document(d.tokens, filter);
  return idx;
}

inline CooccurrenceIndex build_index_from_tokens(const std::vector<std::vector<std::string>>& docs,
                                                 CooccurrenceConfig cfg = {},
                                                 const std::unordered_set<std::string>* filter = nullptr) {
  if (docs.empty()) throw Error("cooccur: empty reference corpus");
  CooccurrenceIndex idx(cfg);
  for (const auto& tokens : docs) idx.add_document(tokens, filter);
  return idx;
}

}  // namespace tmr
