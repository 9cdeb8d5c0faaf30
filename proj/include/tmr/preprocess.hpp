#pragma once

// Text cleaning for raw or rephrased posts. Stage order is fixed:
// URL removal -> emoji removal -> lowercasing -> punctuation stripping ->
// whitespace tokenization -> lemmatization -> stopword removal.
// URL removal must run before punctuation stripping or URLs shatter into
// junk tokens.

#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "tmr/corpus.hpp"
#include "tmr/english_defaults.hpp"
#include "tmr/util.hpp"

namespace tmr {

struct PreprocessConfig {
  std::unordered_set<std::string> stopwords;
  std::unordered_map<std::string, std::string> lemmas;
  bool keep_hashtags = true;
  bool keep_mentions = true;

  static PreprocessConfig defaults() {
    PreprocessConfig cfg;
    for (auto w : english::kStopwords) cfg.stopwords.emplace(w);
    for (auto [surface, lemma] : english::kLemmas) cfg.lemmas.emplace(surface, lemma);
    return cfg;
  }

  // one stopword per line; blank lines and lines starting with '#' skipped
  void load_stopwords(const std::string& path) {
    stopwords.clear();
    for (const auto& line : read_lines(path)) {
      std::string w = trim(line);
      if (w.empty() || w[0] == '#') continue;
      stopwords.insert(lower_ascii(w));
    }
  }

  // surface<TAB>lemma per line
  void load_lemmas(const std::string& path) {
    lemmas.clear();
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
      ++line_no;
      if (trim(line).empty()) continue;
      auto tab = line.find('\t');
      if (tab == std::string::npos)
        throw Error("lemma table line " + std::to_string(line_no) + ": expected surface<TAB>lemma");
      std::string surface = lower_ascii(trim(line.substr(0, tab)));
      std::string lemma = lower_ascii(trim(line.substr(tab + 1)));
      if (surface.empty() || lemma.empty())
        throw Error("lemma table line " + std::to_string(line_no) + ": empty entry");
      lemmas[surface] = lemma;
    }
  }
};

struct ProcessedDocument {
  std::string id;
  std::vector<std::string> tokens;
  bool empty = false;  // flagged so id alignment with other variants survives
};

namespace detail {

inline bool is_emoji_cp(char32_t cp) {
  return (cp >= 0x1F000 && cp <= 0x1FAFF) ||  // pictographs, emoticons, transport, symbols
         (cp >= 0x2600 && cp <= 0x27BF) ||    // misc symbols, dingbats
         (cp >= 0x2B00 && cp <= 0x2BFF) ||    // misc symbols and arrows
         (cp >= 0x2300 && cp <= 0x23FF) ||    // misc technical (watch, hourglass, ...)
         (cp >= 0xFE00 && cp <= 0xFE0F) ||    // variation selectors
         cp == 0x200D || cp == 0x20E3;        // ZWJ, combining keycap
}

inline std::string remove_urls(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  auto starts = [&](std::string_view prefix) {
    if (i + prefix.size() > text.size()) return false;
    for (std::size_t k = 0; k < prefix.size(); ++k) {
      char c = text[i + k];
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      if (c != prefix[k]) return false;
    }
    return true;
  };
  while (i < text.size()) {
    if (starts("http://") || starts("https://") || starts("www.")) {
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
      out.push_back(' ');
      continue;
    }
    out.push_back(text[i]);
    ++i;
  }
  return out;
}

inline std::string remove_emoji(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t start = i;
    char32_t cp;
    if (!utf8_next(text, i, cp)) {  // stray byte: drop it
      i = start + 1;
      continue;
    }
    if (!is_emoji_cp(cp)) out.append(text.substr(start, i - start));
  }
  return out;
}

inline bool is_token_char(char32_t cp, const PreprocessConfig& cfg) {
  if ((cp >= 'a' && cp <= 'z') || (cp >= '0' && cp <= '9') || cp == '_' || cp == '\'') return true;
  if (cp == '#') return cfg.keep_hashtags;
  if (cp == '@') return cfg.keep_mentions;
  return false;
}

// Deletes every codepoint outside the permitted token class, mapping
// whitespace (Unicode included) to a plain space.
inline std::string strip_punctuation(std::string_view text, const PreprocessConfig& cfg) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t start = i;
    char32_t cp;
    if (!utf8_next(text, i, cp)) {
      i = start + 1;
      continue;
    }
    if (is_space_cp(cp)) {
      out.push_back(' ');
    } else if (is_token_char(cp, cfg)) {
      out.append(text.substr(start, i - start));
    }
  }
  return out;
}

}  // namespace detail

// Total function: any UTF-8 input maps to a (possibly empty) token list.
inline std::vector<std::string> preprocess(std::string_view text, const PreprocessConfig& cfg) {
  std::string s = detail::remove_urls(text);
  s = detail::remove_emoji(s);
  s = lower_ascii(s);
  s = detail::strip_punctuation(s, cfg);

  std::vector<std::string> tokens;
  for (auto& tok : split_whitespace(s)) {
    auto it = cfg.lemmas.find(tok);
    std::string lemma = it == cfg.lemmas.end() ? std::move(tok) : it->second;
    if (cfg.stopwords.count(lemma)) continue;
    tokens.push_back(std::move(lemma));
  }
  return tokens;
}

inline std::vector<ProcessedDocument> preprocess_corpus(const std::vector<RawDocument>& docs,
                                                        const PreprocessConfig& cfg) {
  std::vector<ProcessedDocument> out;
  out.reserve(docs.size());
  for (const auto& doc : docs) {
    ProcessedDocument p;
    p.id = doc.id;
    p.tokens = preprocess(doc.text, cfg);
    p.empty = p.tokens.empty();
    out.push_back(std::move(p));
  }
  return out;
}

// ---------------------------------------------------------------------------
// serialization: JSONL {id, tokens, empty}

inline std::string processed_to_jsonl(const std::vector<ProcessedDocument>& docs) {
  std::string out;
  for (const auto& doc : docs) {
    nlohmann::json j{{"id", doc.id}, {"tokens", doc.tokens}, {"empty", doc.empty}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline std::vector<ProcessedDocument> processed_from_jsonl(const std::string& data) {
  std::vector<ProcessedDocument> docs;
  std::size_t line_no = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= data.size(); ++i) {
    if (i != data.size() && data[i] != '\n') continue;
    std::size_t end = i;
    if (end > start && data[end - 1] == '\r') --end;
    std::string line = data.substr(start, end - start);
    start = i + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("id") || !j.contains("tokens"))
      throw Error("processed corpus line " + std::to_string(line_no) + ": malformed record");
    ProcessedDocument doc;
    doc.id = j["id"].get<std::string>();
    doc.tokens = j["tokens"].get<std::vector<std::string>>();
    doc.empty = j.value("empty", doc.tokens.empty());
    docs.push_back(std::move(doc));
  }
  return docs;
}

inline std::vector<ProcessedDocument> load_processed(const std::string& path) {
  return processed_from_jsonl(read_file(path));
}

}  // namespace tmr
