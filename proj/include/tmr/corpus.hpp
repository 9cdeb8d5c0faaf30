#pragma once

// Ingestion of raw short-text corpora from JSONL/CSV plus descriptive
// statistics over raw whitespace word counts.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "tmr/util.hpp"

namespace tmr {

struct RawDocument {
  std::string id;
  std::string text;
  std::optional<std::string> reply_to_id;
  std::optional<std::string> timestamp;
};

struct Rejection {
  std::size_t line = 0;  // 1-based line of the offending record
  std::string id;        // empty when the id itself was unusable
  std::string reason;
};

struct IngestResult {
  std::vector<RawDocument> documents;
  std::vector<Rejection> rejected;
};

enum class CorpusFormat { jsonl, csv };

inline CorpusFormat parse_corpus_format(const std::string& name) {
  if (name == "jsonl") return CorpusFormat::jsonl;
  if (name == "csv") return CorpusFormat::csv;
  throw Error("unknown corpus format: " + name + " (expected jsonl or csv)");
}

namespace detail {

inline bool check_document(const std::string& id, const std::string& text,
                           std::unordered_set<std::string>& seen, std::size_t line,
                           std::vector<Rejection>& rejected) {
  if (id.empty()) {
    rejected.push_back({line, "", "empty id"});
    return false;
  }
  if (!utf8_valid(id) || !utf8_valid(text)) {
    rejected.push_back({line, id, "invalid UTF-8"});
    return false;
  }
  if (!has_visible_content(text)) {
    rejected.push_back({line, id, "empty text"});
    return false;
  }
  if (!seen.insert(id).second) {
    rejected.push_back({line, id, "duplicate id"});
    return false;
  }
  return true;
}

inline IngestResult ingest_jsonl(const std::string& raw) {
  IngestResult result;
  std::unordered_set<std::string> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= raw.size(); ++i) {
    if (i != raw.size() && raw[i] != '\n') continue;
    std::size_t end = i;
    if (end > start && raw[end - 1] == '\r') --end;
    std::string line = raw.substr(start, end - start);
    start = i + 1;
    ++line_no;
    if (trim(line).empty()) continue;

    nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) {
      result.rejected.push_back({line_no, "", "malformed JSON record"});
      continue;
    }
    if (!rec.contains("id") || !rec["id"].is_string() || !rec.contains("text") ||
        !rec["text"].is_string()) {
      result.rejected.push_back({line_no, "", "missing required id/text string fields"});
      continue;
    }
    RawDocument doc;
    doc.id = rec["id"].get<std::string>();
    doc.text = rec["text"].get<std::string>();
    if (rec.contains("reply_to_id") && rec["reply_to_id"].is_string())
      doc.reply_to_id = rec["reply_to_id"].get<std::string>();
    if (rec.contains("timestamp") && rec["timestamp"].is_string())
      doc.timestamp = rec["timestamp"].get<std::string>();
    if (check_document(doc.id, doc.text, seen, line_no, result.rejected))
      result.documents.push_back(std::move(doc));
  }
  return result;
}

// RFC 4180 style fields: quoted fields may hold commas, doubled quotes and
// newlines. Returns one row per record and the 1-based line each started on.
inline std::vector<std::pair<std::size_t, std::vector<std::string>>> parse_csv(
    const std::string& raw) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t row_line = 1;

  auto end_field = [&] {
    row.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (row.size() > 1 || !row[0].empty()) rows.emplace_back(row_line, row);
    row.clear();
    row_line = line;
  };

  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < raw.size() && raw[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started && field.empty()) {
          in_quotes = true;
          field_started = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        ++line;
        end_row();
        break;
      default:
        field_started = true;
        field.push_back(c);
        break;
    }
  }
  if (in_quotes) throw Error("unterminated quoted CSV field");
  if (!field.empty() || !row.empty()) end_row();
  return rows;
}

inline IngestResult ingest_csv(const std::string& raw) {
  auto rows = parse_csv(raw);
  if (rows.empty()) throw Error("CSV input has no header row");

  const auto& header = rows.front().second;
  int id_col = -1, text_col = -1, reply_col = -1, ts_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name = trim(header[c]);
    if (name == "id") id_col = static_cast<int>(c);
    else if (name == "text") text_col = static_cast<int>(c);
    else if (name == "reply_to_id") reply_col = static_cast<int>(c);
    else if (name == "timestamp") ts_col = static_cast<int>(c);
  }
  if (id_col < 0 || text_col < 0)
    throw Error("CSV header must name `id` and `text` columns");

  IngestResult result;
  std::unordered_set<std::string> seen;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& [line_no, row] = rows[r];
    auto cell = [&](int col) -> std::string {
      return (col >= 0 && static_cast<std::size_t>(col) < row.size()) ? row[col] : std::string();
    };
    if (static_cast<std::size_t>(std::max(id_col, text_col)) >= row.size()) {
      result.rejected.push_back({line_no, cell(id_col), "row has too few columns"});
      continue;
    }
    RawDocument doc;
    doc.id = cell(id_col);
    doc.text = cell(text_col);
    if (std::string v = cell(reply_col); !v.empty()) doc.reply_to_id = v;
    if (std::string v = cell(ts_col); !v.empty()) doc.timestamp = v;
    if (check_document(doc.id, doc.text, seen, line_no, result.rejected))
      result.documents.push_back(std::move(doc));
  }
  return result;
}

}  // namespace detail

inline IngestResult ingest(const std::string& path, CorpusFormat format) {
  std::string raw = read_file(path);
  return format == CorpusFormat::jsonl ? detail::ingest_jsonl(raw) : detail::ingest_csv(raw);
}

inline nlohmann::json document_to_json(const RawDocument& doc) {
  nlohmann::json j{{"id", doc.id}, {"text", doc.text}};
  if (doc.reply_to_id) j["reply_to_id"] = *doc.reply_to_id;
  if (doc.timestamp) j["timestamp"] = *doc.timestamp;
  return j;
}

inline std::string corpus_to_jsonl(const std::vector<RawDocument>& docs) {
  std::string out;
  for (const auto& doc : docs) {
    out += document_to_json(doc).dump();
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// statistics

struct CorpusStats {
  std::uint64_t total_docs = 0;
  double mean_words = 0.0;
  double std_words = 0.0;
  std::uint64_t min_words = 0;
  std::uint64_t p25 = 0;
  std::uint64_t median = 0;
  std::uint64_t p75 = 0;
  std::uint64_t max_words = 0;
};

// Word counts come from raw whitespace splitting, independent of the
// preprocessing tokenizer. Percentiles use the nearest-rank convention.
inline CorpusStats stats(const std::vector<RawDocument>& corpus) {
  if (corpus.empty()) throw Error("stats: empty corpus");
  std::vector<std::uint64_t> counts;
  counts.reserve(corpus.size());
  for (const auto& doc : corpus) counts.push_back(split_whitespace(doc.text).size());
  std::sort(counts.begin(), counts.end());

  const std::size_t n = counts.size();
  double sum = 0.0;
  for (auto c : counts) sum += static_cast<double>(c);
  const double mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (auto c : counts) {
    const double d = static_cast<double>(c) - mean;
    sq += d * d;
  }

  auto nearest_rank = [&](double q) {
    std::size_t rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    if (rank == 0) rank = 1;
    return counts[rank - 1];
  };

  CorpusStats s;
  s.total_docs = n;
  s.mean_words = mean;
  s.std_words = std::sqrt(sq / static_cast<double>(n));
  s.min_words = counts.front();
  s.p25 = nearest_rank(0.25);
  s.median = nearest_rank(0.50);
  s.p75 = nearest_rank(0.75);
  s.max_words = counts.back();
  return s;
}

inline nlohmann::json stats_to_json(const CorpusStats& s) {
  return nlohmann::json{
      {"total_docs", s.total_docs}, {"mean_words", s.mean_words}, {"std_words", s.std_words},
      {"min_words", s.min_words},   {"p25", s.p25},               {"median", s.median},
      {"p75", s.p75},               {"max_words", s.max_words}};
}

}  // namespace tmr
