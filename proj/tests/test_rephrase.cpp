#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>

#include "helpers.hpp"
#include "tmr/http_provider.hpp"
#include "tmr/rephrase.hpp"

using namespace tmr;

namespace {

RawDocument raw(std::string id, std::string text) {
  return {std::move(id), std::move(text), std::nullopt, std::nullopt};
}

std::vector<RawDocument> small_corpus(std::size_t n) {
  std::vector<RawDocument> docs;
  for (std::size_t i = 0; i < n; ++i)
    docs.push_back(raw("r" + std::to_string(i), "post number " + std::to_string(i)));
  return docs;
}

}  // namespace

TEST_CASE("prompt templates have frozen bytes") {
  CHECK(std::string(kGeneralTemplate).size() == 261);
  CHECK(std::string(kColloquialToFormalTemplate).size() == 430);
  CHECK(fnv1a64_hex(kGeneralTemplate) == "6c5534ff78dd2497");
  CHECK(fnv1a64_hex(kColloquialToFormalTemplate) == "f8ed72aae1922fa5");
  // single line each
  CHECK(std::string(kGeneralTemplate).find('\n') == std::string::npos);
  CHECK(std::string(kColloquialToFormalTemplate).find('\n') == std::string::npos);
}

TEST_CASE("render_prompt appends the verbatim text after one newline") {
  const std::string text = "feelin sick ngl \"quoted\"";
  const std::string p = render_prompt(Scheme::general, text);
  CHECK(p == std::string(kGeneralTemplate) + "\n" + text);
  CHECK(render_prompt(Scheme::colloquial_to_formal, "x") ==
        std::string(kColloquialToFormalTemplate) + "\nx");
  CHECK_THROWS_AS(render_prompt(Scheme::general, ""), Error);
}

TEST_CASE("scheme names parse with aliases") {
  CHECK(parse_scheme("general") == Scheme::general);
  CHECK(parse_scheme("colloquial_to_formal") == Scheme::colloquial_to_formal);
  CHECK(parse_scheme("c-to-f") == Scheme::colloquial_to_formal);
  CHECK(parse_scheme("ctof") == Scheme::colloquial_to_formal);
  CHECK_THROWS_AS(parse_scheme("pirate"), Error);
  CHECK(scheme_name(Scheme::general) == "general");
  CHECK(scheme_name(Scheme::colloquial_to_formal) == "colloquial_to_formal");
}

TEST_CASE("cache keys separate documents, schemes, providers and text versions") {
  const std::string base = cache_key("d1", "general", "mock", "hello");
  CHECK(base != cache_key("d2", "general", "mock", "hello"));
  CHECK(base != cache_key("d1", "colloquial_to_formal", "mock", "hello"));
  CHECK(base != cache_key("d1", "general", "other", "hello"));
  CHECK(base != cache_key("d1", "general", "mock", "hello!"));
  CHECK(base == cache_key("d1", "general", "mock", "hello"));
}

TEST_CASE("reply cleaning trims and strips one matching quote layer") {
  using tmr::detail::clean_reply;
  CHECK(clean_reply("  hello  ") == "hello");
  CHECK(clean_reply("\"hello\"") == "hello");
  CHECK(clean_reply("  'hi there'  ") == "hi there");
  CHECK(clean_reply("\xe2\x80\x9csmart\xe2\x80\x9d") == "smart");
  CHECK(clean_reply("\xe2\x80\x98single\xe2\x80\x99") == "single");
  // only one layer comes off, and mismatched quotes stay
  CHECK(clean_reply("\"\"x\"\"") == "\"x\"");
  CHECK(clean_reply("\"unbalanced") == "\"unbalanced");
  CHECK(clean_reply("don't") == "don't");
  CHECK(clean_reply("''") == "''");  // nothing inside: left alone
}

TEST_CASE("mock provider defaults to the identity rephrase") {
  MockProvider mock;
  RephraseRecord rec = rephrase_one(raw("d1", "keep me as-is"), Scheme::general, mock);
  CHECK(rec.ok);
  CHECK(rec.rephrased == "keep me as-is");
  CHECK(rec.scheme == "general");
  CHECK(rec.provider_id == "mock");
  CHECK_FALSE(rec.from_cache);
  CHECK_FALSE(rec.requested_at.empty());
  CHECK(mock.calls == 1);
}

TEST_CASE("cache: second identical request replays without a provider call") {
  testutil::TempDir tmp;
  RephraseCache cache(tmp.file("cache.jsonl"));
  MockProvider mock;

  RephraseRecord first = rephrase_one(raw("d1", "some text"), Scheme::general, mock, &cache);
  CHECK(first.ok);
  CHECK_FALSE(first.from_cache);
  CHECK(mock.calls == 1);
  CHECK(cache.size() == 1);

  RephraseRecord second = rephrase_one(raw("d1", "some text"), Scheme::general, mock, &cache);
  CHECK(second.ok);
  CHECK(second.from_cache);
  CHECK(second.rephrased == first.rephrased);
  CHECK(second.requested_at == first.requested_at);  // replayed, not re-stamped
  CHECK(mock.calls == 1);

  // edited text is a different key
  RephraseRecord third = rephrase_one(raw("d1", "some text!"), Scheme::general, mock, &cache);
  CHECK_FALSE(third.from_cache);
  CHECK(mock.calls == 2);
}

TEST_CASE("cache persists on disk and reloads") {
  testutil::TempDir tmp;
  const std::string path = tmp.file("cache.jsonl");
  {
    RephraseCache cache(path);
    MockProvider mock;
    rephrase_one(raw("d1", "alpha"), Scheme::general, mock, &cache);
    rephrase_one(raw("d2", "beta"), Scheme::colloquial_to_formal, mock, &cache);
  }
  CHECK(read_lines(path).size() == 2);

  RephraseCache reloaded(path);
  CHECK(reloaded.size() == 2);
  MockProvider mock;
  RephraseRecord rec = rephrase_one(raw("d1", "alpha"), Scheme::general, mock, &reloaded);
  CHECK(rec.from_cache);
  CHECK(mock.calls == 0);

  write_file(tmp.file("bad.jsonl"), "{nope\n");
  CHECK_THROWS_AS(RephraseCache(tmp.file("bad.jsonl")), Error);
}

TEST_CASE("provider replies are cleaned before caching") {
  MockProvider mock("mock", [](const std::string&) { return "  \"Tidy reply.\"  "; });
  RephraseRecord rec = rephrase_one(raw("d1", "messy"), Scheme::general, mock);
  CHECK(rec.ok);
  CHECK(rec.rephrased == "Tidy reply.");
}

TEST_CASE("empty or throwing providers yield failure records, never exceptions") {
  MockProvider empty("mock", [](const std::string&) { return "   "; });
  RephraseRecord rec = rephrase_one(raw("d1", "text"), Scheme::general, empty);
  CHECK_FALSE(rec.ok);
  CHECK(rec.error.find("empty") != std::string::npos);
  CHECK(rec.rephrased.empty());

  MockProvider boom("mock", [](const std::string&) -> std::string {
    throw Error("service melted");
  });
  RephraseRecord rec2 = rephrase_one(raw("d1", "text"), Scheme::general, boom);
  CHECK_FALSE(rec2.ok);
  CHECK(rec2.error == "service melted");
}

TEST_CASE("failures are not cached; the next attempt retries the provider") {
  testutil::TempDir tmp;
  RephraseCache cache(tmp.file("cache.jsonl"));
  std::atomic<int> hits{0};
  MockProvider flaky("mock", [&](const std::string& prompt) -> std::string {
    if (hits.fetch_add(1) == 0) throw Error("first call fails");
    const auto nl = prompt.find('\n');
    return prompt.substr(nl + 1);
  });

  RephraseRecord r1 = rephrase_one(raw("d1", "try me"), Scheme::general, flaky, &cache);
  CHECK_FALSE(r1.ok);
  CHECK(cache.size() == 0);

  RephraseRecord r2 = rephrase_one(raw("d1", "try me"), Scheme::general, flaky, &cache);
  CHECK(r2.ok);
  CHECK_FALSE(r2.from_cache);
  CHECK(cache.size() == 1);
  CHECK(hits == 2);
}

TEST_CASE("rephrase_corpus preserves order, aligns ids, collects failures") {
  auto docs = small_corpus(10);
  MockProvider mock("mock", [](const std::string& prompt) -> std::string {
    const auto nl = prompt.find('\n');
    const std::string text = prompt.substr(nl + 1);
    if (text.find("number 7") != std::string::npos) throw Error("refused");
    return "Rephrased: " + text;
  });

  RephraseResult rr = rephrase_corpus(docs, Scheme::colloquial_to_formal, mock, nullptr, 4);
  REQUIRE(rr.records.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(rr.records[i].doc_id == docs[i].id);
    if (docs[i].id == "r7") {
      CHECK_FALSE(rr.records[i].ok);
    } else {
      CHECK(rr.records[i].ok);
      CHECK(rr.records[i].rephrased == "Rephrased: " + docs[i].text);
    }
  }
  CHECK(rr.failed_ids == std::vector<std::string>{"r7"});
}

TEST_CASE("a warm cache satisfies a whole corpus with zero provider calls") {
  testutil::TempDir tmp;
  auto docs = small_corpus(8);
  {
    RephraseCache cache(tmp.file("cache.jsonl"));
    MockProvider mock;
    RephraseResult rr = rephrase_corpus(docs, Scheme::general, mock, &cache, 4);
    CHECK(rr.failed_ids.empty());
    CHECK(mock.calls == 8);
  }
  RephraseCache warm(tmp.file("cache.jsonl"));
  MockProvider mock;
  RephraseResult rr = rephrase_corpus(docs, Scheme::general, mock, &warm, 4);
  CHECK(rr.failed_ids.empty());
  CHECK(mock.calls == 0);
  for (const auto& r : rr.records) CHECK(r.from_cache);
}

TEST_CASE("record JSON round-trip") {
  RephraseRecord r;
  r.doc_id = "d9";
  r.scheme = "colloquial_to_formal";
  r.provider_id = "prov";
  r.original = "b4 the jab";
  r.rephrased = "Before the vaccination";
  r.from_cache = true;
  r.requested_at = "2025-11-20T12:00:00Z";
  r.ok = true;
  RephraseRecord back = record_from_json(record_to_json(r));
  CHECK(back.doc_id == r.doc_id);
  CHECK(back.scheme == r.scheme);
  CHECK(back.provider_id == r.provider_id);
  CHECK(back.original == r.original);
  CHECK(back.rephrased == r.rephrased);
  CHECK(back.from_cache == r.from_cache);
  CHECK(back.requested_at == r.requested_at);
  CHECK(back.ok == r.ok);
}

TEST_CASE("rate limiter spaces calls out") {
  RateLimiter limiter(1200);  // 50ms interval
  const auto start = std::chrono::steady_clock::now();
  limiter.acquire();
  limiter.acquire();
  limiter.acquire();
  const auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(std::chrono::duration<double>(elapsed).count() >= 0.095);

  RateLimiter uncapped(0);  // no pacing
  const auto s2 = std::chrono::steady_clock::now();
  for (int i = 0; i < 100; ++i) uncapped.acquire();
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - s2).count() < 0.5);
}

// ---------------------------------------------------------------------------
// HTTP adapter against a loopback server

namespace {

struct LoopbackServer {
  httplib::Server server;
  int port = 0;
  std::thread thread;

  explicit LoopbackServer(std::function<void(const httplib::Request&, httplib::Response&)> h) {
    server.Post("/v1/chat/completions", std::move(h));
    port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~LoopbackServer() {
    server.stop();
    thread.join();
  }

  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
  }
};

ProviderConfig loopback_config(const LoopbackServer& s) {
  ProviderConfig cfg;
  cfg.endpoint = s.endpoint();
  cfg.model = "test-model";
  cfg.auth_env = "TMR_TEST_KEY";
  cfg.temperature = 0.0;
  cfg.max_retries = 3;
  cfg.timeout_seconds = 5;
  return cfg;
}

}  // namespace

TEST_CASE("http provider: request shape, auth header and reply extraction") {
  setenv("TMR_TEST_KEY", "sekrit-token", 1);
  std::string seen_auth, seen_body;
  LoopbackServer srv([&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    res.set_content(
        R"({"choices":[{"message":{"content":" \"A formal reply.\" "}}]})",
        "application/json");
  });

  HttpProvider provider(loopback_config(srv));
  CHECK(provider.id() == "test-model");

  RawDocument d = raw("h1", "yo this rocks");
  RephraseRecord rec = rephrase_one(d, Scheme::colloquial_to_formal, provider);
  CHECK(rec.ok);
  CHECK(rec.rephrased == "A formal reply.");  // trimmed and unquoted
  CHECK(rec.provider_id == "test-model");

  CHECK(seen_auth == "Bearer sekrit-token");
  nlohmann::json body = nlohmann::json::parse(seen_body);
  CHECK(body["model"] == "test-model");
  CHECK(body["temperature"] == 0.0);
  REQUIRE(body["messages"].size() == 1);
  CHECK(body["messages"][0]["role"] == "user");
  CHECK(body["messages"][0]["content"] ==
        render_prompt(Scheme::colloquial_to_formal, d.text));
  unsetenv("TMR_TEST_KEY");
}

TEST_CASE("http provider retries 5xx and succeeds") {
  std::atomic<int> attempts{0};
  LoopbackServer srv([&](const httplib::Request&, httplib::Response& res) {
    if (attempts.fetch_add(1) < 2) {
      res.status = 500;
      return;
    }
    res.set_content(R"({"choices":[{"text":"third time lucky"}]})", "application/json");
  });

  HttpProvider provider(loopback_config(srv));
  CHECK(provider.complete("prompt") == "third time lucky");
  CHECK(attempts == 3);
}

TEST_CASE("http provider does not retry non-retryable 4xx") {
  std::atomic<int> attempts{0};
  LoopbackServer srv([&](const httplib::Request&, httplib::Response& res) {
    attempts.fetch_add(1);
    res.status = 404;
  });

  HttpProvider provider(loopback_config(srv));
  CHECK_THROWS_WITH_AS(provider.complete("prompt"), doctest::Contains("HTTP 404"), Error);
  CHECK(attempts == 1);
}

TEST_CASE("http provider gives up after retry budget on persistent 429") {
  std::atomic<int> attempts{0};
  LoopbackServer srv([&](const httplib::Request&, httplib::Response& res) {
    attempts.fetch_add(1);
    res.status = 429;
  });

  ProviderConfig cfg = loopback_config(srv);
  cfg.max_retries = 1;
  HttpProvider provider(cfg);
  CHECK_THROWS_WITH_AS(provider.complete("prompt"), doctest::Contains("HTTP 429"), Error);
  CHECK(attempts == 2);  // initial + one retry
}

TEST_CASE("http provider parses alternate response shapes") {
  int mode = 0;
  LoopbackServer srv([&](const httplib::Request&, httplib::Response& res) {
    switch (mode) {
      case 0:
        res.set_content(R"({"candidates":[{"content":{"parts":[{"text":"g-shape"}]}}]})",
                        "application/json");
        break;
      case 1:
        res.set_content(R"({"text":"bare-shape"})", "application/json");
        break;
      default:
        res.set_content(R"({"unrelated": true})", "application/json");
        break;
    }
  });

  ProviderConfig cfg = loopback_config(srv);
  cfg.max_retries = 0;
  HttpProvider provider(cfg);
  CHECK(provider.complete("p") == "g-shape");
  mode = 1;
  CHECK(provider.complete("p") == "bare-shape");
  mode = 2;
  CHECK_THROWS_WITH_AS(provider.complete("p"),
                       doctest::Contains("no recognizable completion"), Error);
}

TEST_CASE("http provider requires a scheme in the endpoint") {
  ProviderConfig cfg;
  cfg.endpoint = "127.0.0.1:99/x";
  CHECK_THROWS_AS(HttpProvider{cfg}, Error);
}
