#pragma once

// LLM-backed rephrasing with two built-in prompt schemes, an append-only
// record cache, and a pluggable provider (deterministic mock for offline
// use, generic JSON-over-HTTP chat adapter for real services).
//
// With a warm cache the whole stage is a pure function of (corpus, scheme,
// provider id): hits return the recorded text and never touch the network.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "tmr/corpus.hpp"
#include "tmr/util.hpp"

namespace tmr {

enum class Scheme { general, colloquial_to_formal };

// Single-line prompt texts; the em dash is spelled out so the bytes survive
// any editor re-encoding.
inline constexpr const char* kGeneralTemplate =
    "Rephrase the following tweet to improve grammar, clarity, and tone, while keeping the "
    "meaning exactly the same. Do not alter or remove any named entities, hashtags, usernames, "
    "or specific terms. Return only the rephrased tweet \xe2\x80\x94 no explanation, no "
    "formatting.";

inline constexpr const char* kColloquialToFormalTemplate =
    "Convert the following tweet into formal, professional, and standard English suitable for "
    "inclusion in a public health report or professional summary. Preserve the original meaning "
    "and do not change or remove any named entities, hashtags, usernames, or specific terms. "
    "Avoid slang, contractions, or overly casual language. Use complete sentences and proper "
    "grammar. Return only the rephrased tweet \xe2\x80\x94 no explanation or formatting.";

inline const char* scheme_template(Scheme s) {
  return s == Scheme::general ? kGeneralTemplate : kColloquialToFormalTemplate;
}

inline std::string scheme_name(Scheme s) {
  return s == Scheme::general ? "general" : "colloquial_to_formal";
}

inline Scheme parse_scheme(std::string_view name) {
  if (name == "general") return Scheme::general;
  if (name == "colloquial_to_formal" || name == "c-to-f" || name == "ctof")
    return Scheme::colloquial_to_formal;
  throw Error("unknown rephrase scheme: " + std::string(name));
}

inline std::string render_prompt(Scheme s, const std::string& text) {
  if (text.empty()) throw Error("render_prompt: empty text");
  std::string out = scheme_template(s);
  out += '\n';
  out += text;
  return out;
}

struct RephraseRecord {
  std::string doc_id;
  std::string scheme;
  std::string provider_id;
  std::string original;
  std::string rephrased;
  bool from_cache = false;
  std::string requested_at;
  bool ok = false;
  std::string error;
};

inline std::string cache_key(const std::string& doc_id, const std::string& scheme,
                             const std::string& provider_id, const std::string& original) {
  std::string key = doc_id;
  key += '\x1f';
  key += scheme;
  key += '\x1f';
  key += provider_id;
  key += '\x1f';
  key += fnv1a64_hex(original);
  return key;
}

inline nlohmann::json record_to_json(const RephraseRecord& r) {
  return nlohmann::json{{"doc_id", r.doc_id},       {"scheme", r.scheme},
                        {"provider_id", r.provider_id}, {"original", r.original},
                        {"rephrased", r.rephrased}, {"from_cache", r.from_cache},
                        {"requested_at", r.requested_at}, {"ok", r.ok},
                        {"error", r.error}};
}

inline RephraseRecord record_from_json(const nlohmann::json& j) {
  RephraseRecord r;
  r.doc_id = j.at("doc_id").get<std::string>();
  r.scheme = j.at("scheme").get<std::string>();
  r.provider_id = j.at("provider_id").get<std::string>();
  r.original = j.at("original").get<std::string>();
  r.rephrased = j.at("rephrased").get<std::string>();
  r.from_cache = j.value("from_cache", false);
  r.requested_at = j.value("requested_at", std::string{});
  r.ok = j.value("ok", true);
  r.error = j.value("error", std::string{});
  return r;
}

// Append-only JSONL of successful records; lookups by cache_key.  A missing
// file is an empty cache.  Thread-safe: one mutex covers map and file.
class RephraseCache {
 public:
  RephraseCache() = default;

  explicit RephraseCache(std::string path) : path_(std::move(path)) {
    if (path_.empty() || !std::filesystem::exists(path_)) return;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path_)) {
      ++line_no;
      if (line.empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded())
        throw Error("cache: malformed JSON at " + path_ + ":" + std::to_string(line_no));
      RephraseRecord r = record_from_json(j);
      entries_[cache_key(r.doc_id, r.scheme, r.provider_id, r.original)] = std::move(r);
    }
  }

  std::optional<RephraseRecord> lookup(const std::string& key) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void store(const RephraseRecord& r) {
    const std::string key = cache_key(r.doc_id, r.scheme, r.provider_id, r.original);
    std::lock_guard<std::mutex> lock(mu_);
    if (entries_.count(key)) return;
    entries_.emplace(key, r);
    if (!path_.empty()) append_file(path_, record_to_json(r).dump() + "\n");
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return entries_.size();
  }

 private:
  std::string path_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, RephraseRecord> entries_;
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string id() const = 0;
  // Returns raw completion text; throws Error after exhausting any retries.
  virtual std::string complete(const std::string& prompt) = 0;
};

// Offline provider: deterministic function of the prompt.  The default
// responder echoes the document text back (everything after the template's
// newline), which makes rephrasing the identity map.
class MockProvider : public Provider {
 public:
  using Responder = std::function<std::string(const std::string& prompt)>;

  explicit MockProvider(std::string id = "mock", Responder responder = {})
      : id_(std::move(id)), responder_(std::move(responder)) {}

  std::string id() const override { return id_; }

  std::string complete(const std::string& prompt) override {
    ++calls;
    if (responder_) return responder_(prompt);
    const auto nl = prompt.find('\n');
    return nl == std::string::npos ? prompt : prompt.substr(nl + 1);
  }

  std::atomic<std::uint64_t> calls{0};

 private:
  std::string id_;
  Responder responder_;
};

struct ProviderConfig {
  std::string endpoint;                 // e.g. http://host:port/v1/chat/completions
  std::string model;                    // doubles as provider_id in cache keys
  std::string auth_env = "TMR_API_KEY"; // name of env var holding the token
  double temperature = 0.0;
  std::size_t max_retries = 3;
  std::size_t requests_per_minute = 0;  // 0 = uncapped
  std::size_t max_in_flight = 4;
  std::size_t timeout_seconds = 60;
};

// Spaces provider calls at least 60/rpm seconds apart across all threads.
class RateLimiter {
 public:
  explicit RateLimiter(std::size_t requests_per_minute) : rpm_(requests_per_minute) {}

  void acquire() {
    if (rpm_ == 0) return;
    const auto interval =
        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(60.0 / static_cast<double>(rpm_)));
    std::chrono::steady_clock::time_point wait_until;
    {
      std::lock_guard<std::mutex> lock(mu_);
      const auto now = std::chrono::steady_clock::now();
      if (next_ < now) next_ = now;
      wait_until = next_;
      next_ += interval;
    }
    std::this_thread::sleep_until(wait_until);
  }

 private:
  std::size_t rpm_;
  std::mutex mu_;
  std::chrono::steady_clock::time_point next_{};
};

namespace detail {

// Trim plus at most one layer of matching wrapping quotes, per the prompt's
// "Return only the rephrased tweet" contract.
inline std::string clean_reply(std::string_view raw) {
  std::string s = trim(raw);
  static constexpr std::pair<const char*, const char*> kPairs[] = {
      {"\"", "\""}, {"'", "'"}, {"\xe2\x80\x9c", "\xe2\x80\x9d"}, {"\xe2\x80\x98", "\xe2\x80\x99"},
  };
  for (const auto& [open, close] : kPairs) {
    const std::size_t lo = std::char_traits<char>::length(open);
    const std::size_t lc = std::char_traits<char>::length(close);
    if (s.size() > lo + lc && s.compare(0, lo, open) == 0 &&
        s.compare(s.size() - lc, lc, close) == 0) {
      s = trim(std::string_view(s).substr(lo, s.size() - lo - lc));
      break;
    }
  }
  return s;
}

}  // namespace detail

inline RephraseRecord rephrase_one(const RawDocument& doc, Scheme scheme, Provider& provider,
                                   RephraseCache* cache = nullptr,
                                   RateLimiter* limiter = nullptr) {
  RephraseRecord rec;
  rec.doc_id = doc.id;
  rec.scheme = scheme_name(scheme);
  rec.provider_id = provider.id();
  rec.original = doc.text;

  const std::string key = cache_key(rec.doc_id, rec.scheme, rec.provider_id, rec.original);
  if (cache) {
    if (auto hit = cache->lookup(key)) {
      RephraseRecord out = *hit;
      out.from_cache = true;
      return out;
    }
  }

  try {
    const std::string prompt = render_prompt(scheme, doc.text);
    if (limiter) limiter->acquire();
    const std::string reply = detail::clean_reply(provider.complete(prompt));
    if (reply.empty()) throw Error("provider returned empty text");
    rec.rephrased = reply;
    rec.ok = true;
    rec.requested_at = iso8601_utc_now();
    if (cache) cache->store(rec);
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

struct RephraseResult {
  std::vector<RephraseRecord> records;  // one per input document, same order
  std::vector<std::string> failed_ids;
};

inline RephraseResult rephrase_corpus(const std::vector<RawDocument>& docs, Scheme scheme,
                                      Provider& provider, RephraseCache* cache = nullptr,
                                      std::size_t max_in_flight = 4,
                                      std::size_t requests_per_minute = 0) {
  RephraseResult result;
  result.records.resize(docs.size());
  RateLimiter limiter(requests_per_minute);

  const std::size_t workers = std::min(std::max<std::size_t>(1, max_in_flight), docs.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < docs.size(); ++i)
      result.records[i] = rephrase_one(docs[i], scheme, provider, cache, &limiter);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= docs.size()) return;
          result.records[i] = rephrase_one(docs[i], scheme, provider, cache, &limiter);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& r : result.records)
    if (!r.ok) result.failed_ids.push_back(r.doc_id);
  return result;
}

}  // namespace tmr
