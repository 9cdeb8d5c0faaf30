#pragma once

// Generic JSON-over-HTTP chat/completion adapter.  Sends
//   {model, messages: [{role: "user", content: prompt}], temperature}
// and accepts the common response shapes (OpenAI-style choices, Gemini-style
// candidates, or bare text/content fields).  The auth token is read from the
// environment variable named in ProviderConfig and is never persisted.

#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "tmr/rephrase.hpp"
#include "tmr/util.hpp"

namespace tmr {

class HttpProvider : public Provider {
 public:
  explicit HttpProvider(ProviderConfig cfg) : cfg_(std::move(cfg)) {
    const auto scheme_end = cfg_.endpoint.find("://");
    if (scheme_end == std::string::npos)
      throw Error("provider endpoint must include a scheme: " + cfg_.endpoint);
    const auto path_start = cfg_.endpoint.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
      base_ = cfg_.endpoint;
      path_ = "/";
    } else {
      base_ = cfg_.endpoint.substr(0, path_start);
      path_ = cfg_.endpoint.substr(path_start);
    }
    if (!cfg_.auth_env.empty()) {
      if (const char* tok = std::getenv(cfg_.auth_env.c_str())) token_ = tok;
    }
  }

  std::string id() const override { return cfg_.model; }

  std::string complete(const std::string& prompt) override {
    const nlohmann::json body = {
        {"model", cfg_.model},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", cfg_.temperature},
    };
    const std::string payload = body.dump();
    std::string last_error;
    for (std::size_t attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      if (attempt > 0) {
        const double secs = std::min(0.25 * static_cast<double>(1u << attempt), 8.0);
        std::this_thread::sleep_for(std::chrono::duration<double>(secs));
      }
      httplib::Client cli(base_);
      cli.set_connection_timeout(static_cast<time_t>(cfg_.timeout_seconds), 0);
      cli.set_read_timeout(static_cast<time_t>(cfg_.timeout_seconds), 0);
      httplib::Headers headers;
      if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
      auto res = cli.Post(path_, headers, payload, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 200) return extract(res->body);
      last_error = "HTTP " + std::to_string(res->status);
      const bool retryable = res->status == 429 || res->status >= 500;
      if (!retryable) break;
    }
    throw Error("provider call failed after " + std::to_string(cfg_.max_retries + 1) +
                " attempt(s): " + last_error);
  }

 private:
  static std::string extract(const std::string& body) {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_discarded()) throw Error("provider returned malformed JSON");
    if (j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
      const auto& c = j["choices"][0];
      if (c.contains("message") && c["message"].contains("content"))
        return c["message"]["content"].get<std::string>();
      if (c.contains("text")) return c["text"].get<std::string>();
    }
    if (j.contains("candidates") && j["candidates"].is_array() && !j["candidates"].empty()) {
      const auto& parts = j["candidates"][0]["content"]["parts"];
      if (parts.is_array() && !parts.empty() && parts[0].contains("text"))
        return parts[0]["text"].get<std::string>();
    }
    if (j.contains("text")) return j["text"].get<std::string>();
    if (j.contains("content") && j["content"].is_string()) return j["content"].get<std::string>();
    throw Error("provider response has no recognizable completion field");
  }

  ProviderConfig cfg_;
  std::string base_;
  std::string path_;
  std::string token_;
};

}  // namespace tmr
