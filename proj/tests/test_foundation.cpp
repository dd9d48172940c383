#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "mgt/budget.hpp"
#include "mgt/corpus.hpp"
#include "mgt/error.hpp"
#include "mgt/rng.hpp"
#include "mgt/text.hpp"
#include "support.hpp"

using namespace mgt;

TEST_CASE("utf8 round trip and malformed input") {
  const std::string s = "café а​ \U0001F600";
  CHECK(text::encode(text::decode(s)) == s);
  CHECK(text::codepoint_count(s) == 9);
  CHECK_THROWS_AS(text::decode("\xff"), DataError);
  CHECK_THROWS_AS(text::decode("\xc3"), DataError);
}

TEST_CASE("zero-width space is not whitespace") {
  CHECK_FALSE(text::is_space(U'​'));
  CHECK(text::is_space(U' '));
  CHECK(text::is_line_break(U'\v'));
  CHECK(text::split_words("a​ b").size() == 2);
}

TEST_CASE("segment keeps the layout") {
  for (const std::string s : {"", "  lead", "one two\n\nthree  ", "\tx\vy\r\nz"}) {
    CHECK(text::segment(s).str() == s);
  }
  const auto seg = text::segment("Hi there. Next one! Last");
  const auto sents = text::sentences(seg);
  REQUIRE(sents.size() == 3);
  CHECK(sents[0].first == 0);
  CHECK(sents[0].last == 2);
  CHECK(sents[2].last == 5);
}

TEST_CASE("affix split") {
  const auto p = text::split_affixes("\"Hello,\"");
  CHECK(p.prefix == "\"");
  CHECK(p.core == "Hello");
  CHECK(p.suffix == ",\"");
}

TEST_CASE("rng is deterministic and derive_seed separates keys") {
  Rng a(5), b(5);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  CHECK(derive_seed(1, "x", "y") != derive_seed(1, "xy", ""));
  CHECK(derive_seed(1, "x") != derive_seed(2, "x"));
  CHECK(derive_seed(1, 3) != derive_seed(1, 4));
  Rng r(9);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 70000; ++i) ++hits[r.below(7)];
  for (int h : hits) CHECK(std::abs(h - 10000) < 400);
  const std::vector<double> w{0.0, 3.0, 1.0};
  int ones = 0;
  for (int i = 0; i < 40000; ++i) ones += r.weighted(w) == 1;
  CHECK(std::abs(ones - 30000) < 400);
  CHECK(r.weighted(std::vector<double>{0.0, 0.0}) == 2);
}

TEST_CASE("load_dataset") {
  testing::TempDir tmp("corpus");
  const auto p = tmp.path() / "d.jsonl";
  {
    std::ofstream out(p);
    out << R"({"id": "a", "text": "x y", "label": "HWT"})" << '\n' << R"({"id": "b", "text": "z", "label": "MGT"})" << '\n';
  }
  const auto ds = corpus::load_dataset(p, corpus::Split::test);
  CHECK(ds.documents.size() == 2);
  CHECK(ds.balanced());
  corpus::save_dataset(ds, tmp.path() / "copy.jsonl");
  CHECK(corpus::load_dataset(tmp.path() / "copy.jsonl", corpus::Split::test).documents == ds.documents);
  {
    std::ofstream out(p);
    out << R"({"id": "a", "text": "x", "label": "HWT"})" << '\n' << R"({"id": "a", "text": "y", "label": "HWT"})" << '\n';
  }
  try {
    corpus::load_dataset(p, corpus::Split::test);
    FAIL("duplicate id accepted");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("'a'") != std::string::npos);
  }
  CHECK_THROWS_AS(corpus::parse_record(R"({"id": "a", "text": "x", "label": "robot"})", 1), DataError);
  CHECK_THROWS_AS(corpus::parse_record(R"({"id": "a", "text": "   ", "label": "HWT"})", 1), DataError);
  CHECK_THROWS_AS(corpus::parse_record("{", 1), DataError);
}

TEST_CASE("bundled corpus sizes match a line count") {
  std::size_t total = 0;
  for (const auto& [file, split] : {std::pair{"news_train.jsonl", corpus::Split::train},
                                    std::pair{"news_eval.jsonl", corpus::Split::eval},
                                    std::pair{"news_test.jsonl", corpus::Split::test}}) {
    std::ifstream in(testing::data_dir() / file);
    std::size_t lines = 0;
    std::string line;
    while (std::getline(in, line)) lines += !line.empty();
    const auto ds = corpus::load_dataset(testing::data_dir() / file, split);
    CHECK(ds.documents.size() == lines);
    CHECK(corpus::derive_prompts(ds, 20).size() == ds.count(corpus::Label::HWT));
    total += ds.count(corpus::Label::HWT);
  }
  CHECK(total == 1000);
  CHECK(corpus::load_dataset(testing::data_dir() / "mini_test.jsonl", corpus::Split::test).documents.size() +
            corpus::load_dataset(testing::data_dir() / "mini_train.jsonl", corpus::Split::train).documents.size() ==
        50);
}

TEST_CASE("derive_prompts") {
  corpus::Dataset ds;
  ds.documents = {{"h", "a b c d", corpus::Label::HWT, "", ""}, {"m", "q r", corpus::Label::MGT, "", ""}};
  auto p = corpus::derive_prompts(ds, 2);
  REQUIRE(p.size() == 1);
  CHECK(p[0].text == "a b");
  CHECK_FALSE(p[0].truncated);
  p = corpus::derive_prompts(ds, 20);
  CHECK(p[0].text == "a b c d");
  CHECK(p[0].truncated);
  CHECK_THROWS_AS(corpus::derive_prompts(ds, 0), UsageError);
}

double brute_repetition(const std::string& s, std::size_t n) {
  const auto w = text::split_words(s);
  if (w.size() < n) return 0.0;
  std::size_t total = 0, repeats = 0;
  for (std::size_t i = 0; i + n <= w.size(); ++i) {
    ++total;
    bool seen = false;
    for (std::size_t j = 0; j < i && !seen; ++j) seen = std::equal(w.begin() + i, w.begin() + i + n, w.begin() + j);
    repeats += seen;
  }
  return static_cast<double>(repeats) / static_cast<double>(total);
}

TEST_CASE("repetition_score") {
  CHECK(corpus::repetition_score("a b c d e", 4) == 0.0);
  CHECK(corpus::repetition_score("a b a b a b a b", 2) == doctest::Approx(5.0 / 7.0));
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    std::string s;
    const auto len = rng.below(15);
    for (std::uint64_t k = 0; k < len; ++k) s += std::string(1, static_cast<char>('a' + rng.below(3))) + " ";
    const std::size_t n = 1 + rng.below(3);
    CHECK(corpus::repetition_score(s, n) == doctest::Approx(brute_repetition(s, n)).epsilon(1e-12));
  }
}

TEST_CASE("edit distance examples and metric properties") {
  using budget::Accounting;
  CHECK(budget::edit_distance("kitten", "kitten") == 0);
  CHECK(budget::edit_distance("kitten", "sitten") == 1);
  CHECK(budget::edit_distance("kitten", "sitting") == 3);
  CHECK(budget::edit_distance("a b", "a​ b") == 1);
  CHECK(budget::edit_distance("a b", "a​ b", Accounting::byte) == 2);
  CHECK(budget::edit_distance("a", "а") == 1);
  Rng rng(17);
  auto random_text = [&] {
    std::u32string s;
    const auto len = rng.below(10);
    for (std::uint64_t k = 0; k < len; ++k) s.push_back(U"abéc"[rng.below(4)]);
    return s;
  };
  for (int i = 0; i < 500; ++i) {
    const auto a = random_text(), b = random_text(), c = random_text();
    for (auto acc : {Accounting::codepoint, Accounting::byte}) {
      const auto ab = budget::edit_distance(a, b, acc);
      CHECK(ab == budget::edit_distance(b, a, acc));
      CHECK((ab == 0) == (a == b));
      CHECK(budget::edit_distance(a, c, acc) <= ab + budget::edit_distance(b, c, acc));
    }
    CHECK((budget::jaro(a, b) == 1.0) == (a == b));
  }
}

TEST_CASE("jaro and ngram cosine") {
  CHECK(budget::jaro("abc", "abc") == 1.0);
  CHECK(budget::jaro("abc", "xyz") == 0.0);
  CHECK(budget::jaro("MARTHA", "MARHTA") == doctest::Approx(0.944444).epsilon(1e-6));
  CHECK(budget::jaro("DIXON", "DICKSONX") == doctest::Approx((4.0 / 5 + 4.0 / 8 + 1.0) / 3));
  CHECK(budget::ngram_cosine("hello world", "hello world") == doctest::Approx(1.0));
  CHECK(budget::ngram_cosine("aaaa", "bbbb") == 0.0);
  // 2-grams: "abab" -> ab:2 ba:1; "abba" -> ab:1 bb:1 ba:1; dot 3, norms sqrt5 and sqrt3.
  CHECK(budget::ngram_cosine("abab", "abba", 2) == doctest::Approx(3.0 / std::sqrt(15.0)));
}

TEST_CASE("perplexity") {
  const std::vector<double> uniform(7, -std::log(50.0));
  CHECK(budget::perplexity(uniform) == doctest::Approx(50.0));
  const std::vector<double> hand{-1.0, -2.0, -3.0};
  CHECK(budget::perplexity(hand) == doctest::Approx(std::exp(2.0)));
  CHECK_THROWS(budget::perplexity(std::vector<double>{}));
  const auto r = budget::measure("abc", "abd", budget::Accounting::codepoint);
  CHECK(r.edit_distance == 1);
  CHECK(r.jaro < 1.0);
}
