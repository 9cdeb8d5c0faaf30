#include <doctest.h>

#include <random>
#include <string>
#include <unordered_set>
#include <vector>

#include "helpers.hpp"
#include "tmr/cooccur.hpp"
#include "tmr/preprocess.hpp"

using namespace tmr;

using Docs = std::vector<std::vector<std::string>>;

TEST_CASE("two-token doc shorter than the window forms one window") {
  auto idx = build_index_from_tokens(Docs{{"a", "b"}}, {2, 1e-12});
  CHECK(idx.total_windows() == 1);
  CHECK(idx.window_count("a") == 1);
  CHECK(idx.window_count("b") == 1);
  CHECK(idx.pair_window_count("a", "b") == 1);
}

TEST_CASE("stride-1 windows over [a b c] with window 2") {
  auto idx = build_index_from_tokens(Docs{{"a", "b", "c"}}, {2, 1e-12});
  CHECK(idx.total_windows() == 2);  // {a,b}, {b,c}
  CHECK(idx.window_count("a") == 1);
  CHECK(idx.window_count("b") == 2);
  CHECK(idx.window_count("c") == 1);
  CHECK(idx.pair_window_count("a", "b") == 1);
  CHECK(idx.pair_window_count("b", "c") == 1);
  CHECK(idx.pair_window_count("a", "c") == 0);
  CHECK(idx.p("b") == 1.0);
  CHECK(idx.p("a") == 0.5);
  CHECK(idx.p("a", "b") == 0.5);
}

TEST_CASE("a word repeated inside one window counts once") {
  auto idx = build_index_from_tokens(Docs{{"a", "a"}}, {2, 1e-12});
  CHECK(idx.total_windows() == 1);
  CHECK(idx.window_count("a") == 1);
}

TEST_CASE("diagonal joint probability equals the marginal") {
  auto idx = build_index_from_tokens(Docs{{"a", "b", "c"}}, {2, 1e-12});
  CHECK(idx.p("a", "a") == idx.p("a"));
  CHECK(idx.pair_window_count("b", "b") == idx.window_count("b"));
}

TEST_CASE("unseen words have zero counts and probabilities") {
  auto idx = build_index_from_tokens(Docs{{"a", "b"}}, {2, 1e-12});
  CHECK(idx.window_count("zzz") == 0);
  CHECK(idx.pair_window_count("a", "zzz") == 0);
  CHECK(idx.p("zzz") == 0.0);
  CHECK(idx.p("zzz", "zzz") == 0.0);
}

TEST_CASE("empty documents add no windows; empty corpus is an error") {
  CooccurrenceIndex idx({2, 1e-12});
  idx.add_document({});
  CHECK(idx.total_windows() == 0);
  CHECK_THROWS_AS(build_index_from_tokens(Docs{}, {2, 1e-12}), Error);
  CHECK_THROWS_AS(CooccurrenceIndex({0, 1e-12}), Error);
}

TEST_CASE("vocabulary filter restricts counting but not window placement") {
  std::unordered_set<std::string> keep{"a", "b"};
  CooccurrenceIndex idx({2, 1e-12});
  idx.add_document({"x", "a", "y", "b"}, &keep);
  // windows: {x,a} {a,y} {y,b} — x and y are invisible but still occupy slots
  CHECK(idx.total_windows() == 3);
  CHECK(idx.window_count("a") == 2);
  CHECK(idx.window_count("b") == 1);
  CHECK(idx.window_count("x") == 0);
  CHECK(idx.pair_window_count("a", "b") == 0);  // never share a window
}

TEST_CASE("symmetry and count bounds hold on random corpora") {
  std::mt19937_64 rng(99);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e", "f"};
  Docs docs;
  for (int d = 0; d < 30; ++d) {
    std::vector<std::string> doc;
    const std::size_t len = 1 + rng() % 12;
    for (std::size_t i = 0; i < len; ++i) doc.push_back(vocab[rng() % vocab.size()]);
    docs.push_back(std::move(doc));
  }
  auto idx = build_index_from_tokens(docs, {3, 1e-12});
  for (const auto& a : vocab)
    for (const auto& b : vocab) {
      CHECK(idx.pair_window_count(a, b) == idx.pair_window_count(b, a));
      CHECK(idx.pair_window_count(a, b) <= idx.window_count(a));
      CHECK(idx.pair_window_count(a, b) <= idx.window_count(b));
      CHECK(idx.window_count(a) <= idx.total_windows());
    }
}

TEST_CASE("adding documents never decreases any count") {
  auto before = build_index_from_tokens(Docs{{"a", "b", "c", "a"}}, {2, 1e-12});
  auto after = before;
  after.add_document({"b", "c", "d"});
  for (const auto& w : {"a", "b", "c", "d"}) {
    CHECK(after.window_count(w) >= before.window_count(w));
    for (const auto& v : {"a", "b", "c", "d"})
      CHECK(after.pair_window_count(w, v) >= before.pair_window_count(w, v));
  }
  CHECK(after.total_windows() > before.total_windows());
}

TEST_CASE("merge equals building from the concatenated corpus") {
  Docs part1{{"a", "b", "c"}, {"b", "d"}};
  Docs part2{{"c", "d", "a"}, {"e"}};
  Docs both = part1;
  both.insert(both.end(), part2.begin(), part2.end());

  auto i1 = build_index_from_tokens(part1, {2, 1e-12});
  auto i2 = build_index_from_tokens(part2, {2, 1e-12});
  auto ref = build_index_from_tokens(both, {2, 1e-12});
  i1.merge(i2);

  CHECK(i1.total_windows() == ref.total_windows());
  for (const auto& a : {"a", "b", "c", "d", "e"}) {
    CHECK(i1.window_count(a) == ref.window_count(a));
    for (const auto& b : {"a", "b", "c", "d", "e"})
      CHECK(i1.pair_window_count(a, b) == ref.pair_window_count(a, b));
  }

  auto other = build_index_from_tokens(part2, {3, 1e-12});
  CHECK_THROWS_AS(i1.merge(other), Error);
}

TEST_CASE("config id distinguishes window size and epsilon") {
  CooccurrenceIndex a({110, 1e-12}), b({10, 1e-12}), c({110, 1e-9});
  CHECK(a.config_id() != b.config_id());
  CHECK(a.config_id() != c.config_id());
  CHECK(a.config_id() == CooccurrenceIndex({110, 1e-12}).config_id());
}

TEST_CASE("serialization round-trips and is byte-stable") {
  Docs docs{{"pear", "apple", "fig"}, {"apple", "fig", "fig", "pear"}};
  auto idx = build_index_from_tokens(docs, {2, 1e-12});

  testutil::TempDir tmp;
  idx.save(tmp.file("one.idx"));
  idx.save(tmp.file("two.idx"));
  CHECK(read_file(tmp.file("one.idx")) == read_file(tmp.file("two.idx")));

  // insertion order must not leak into the bytes: build from reversed docs
  Docs reversed(docs.rbegin(), docs.rend());
  auto idx2 = build_index_from_tokens(reversed, {2, 1e-12});
  idx2.save(tmp.file("three.idx"));
  CHECK(read_file(tmp.file("one.idx")) == read_file(tmp.file("three.idx")));

  auto back = CooccurrenceIndex::load(tmp.file("one.idx"));
  CHECK(back.total_windows() == idx.total_windows());
  CHECK(back.config().window_size == 2);
  CHECK(back.config().epsilon == 1e-12);
  CHECK(back.config_id() == idx.config_id());
  for (const auto& a : {"pear", "apple", "fig"}) {
    CHECK(back.window_count(a) == idx.window_count(a));
    for (const auto& b : {"pear", "apple", "fig"})
      CHECK(back.pair_window_count(a, b) == idx.pair_window_count(a, b));
  }
}

TEST_CASE("load rejects corrupt index files") {
  testutil::TempDir tmp;
  auto idx = build_index_from_tokens(Docs{{"a", "b"}}, {2, 1e-12});
  idx.save(tmp.file("good.idx"));
  std::string bytes = read_file(tmp.file("good.idx"));

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  write_file(tmp.file("bad1.idx"), bad_magic);
  CHECK_THROWS_AS(CooccurrenceIndex::load(tmp.file("bad1.idx")), Error);

  write_file(tmp.file("bad2.idx"), bytes.substr(0, bytes.size() - 3));  // truncated
  CHECK_THROWS_AS(CooccurrenceIndex::load(tmp.file("bad2.idx")), Error);

  write_file(tmp.file("bad3.idx"), bytes + "junk");  // trailing garbage
  CHECK_THROWS_AS(CooccurrenceIndex::load(tmp.file("bad3.idx")), Error);
}

TEST_CASE("build_index preprocesses ProcessedDocument-like inputs") {
  std::vector<ProcessedDocument> docs{
      {"d1", {"a", "b"}, false},
      {"d2", {}, true},
  };
  auto idx = build_index(docs, {2, 1e-12});
  CHECK(idx.total_windows() == 1);
  CHECK(idx.window_count("a") == 1);
}
