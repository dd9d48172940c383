#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "mgt/detectors.hpp"
#include "mgt/error.hpp"
#include "mgt/text.hpp"
#include "mgt/watermark.hpp"
#include "support.hpp"

using namespace mgt;
using watermark::GreenList;
using watermark::WatermarkConfig;

namespace {

WatermarkConfig wm(watermark::Seeding seeding, std::uint64_t key = 0) {
  WatermarkConfig c;
  c.seeding = seeding;
  c.key = key;
  return c;
}

std::vector<toylm::TokenScore> with_ranks(std::initializer_list<std::uint64_t> ranks) {
  std::vector<toylm::TokenScore> out;
  for (auto r : ranks) out.push_back({"x", -1.0, r, 1.0});
  return out;
}

}  // namespace

TEST_CASE("z statistic hand cases") {
  CHECK(watermark::z_score(100, 25, 0.25) == doctest::Approx(0.0));
  CHECK(watermark::z_score(100, 50, 0.25) == doctest::Approx(25.0 / std::sqrt(18.75)).epsilon(1e-12));
  CHECK(watermark::z_score(100, 50, 0.25) == doctest::Approx(5.7735).epsilon(1e-5));
  CHECK_THROWS_AS(watermark::z_score(1, 1, 0.25), DataError);
  GreenList g(WatermarkConfig{}, 1000);
  watermark::StreamState s;
  s.T = 100;
  s.green_count = 50;
  CHECK(watermark::finish(g, s).detected);
  s.green_count = 25;
  CHECK_FALSE(watermark::finish(g, s).detected);
  CHECK(watermark::StreamState{}.T == 0);
  CHECK_THROWS_AS(watermark::finish(g, watermark::StreamState{}), DataError);
}

TEST_CASE("configuration validation") {
  WatermarkConfig c;
  CHECK_THROWS_AS(GreenList(c, 3), UsageError);
  c.gamma = 1.0;
  CHECK_THROWS_AS(GreenList(c, 1000), UsageError);
  c.gamma = 0.25;
  c.delta = -1.0;
  CHECK_THROWS_AS(GreenList(c, 1000), UsageError);
  CHECK(watermark::parse_seeding("self_hash") == watermark::Seeding::self_hash);
  CHECK_THROWS_AS(watermark::parse_seeding("lefthash"), UsageError);
}

TEST_CASE("keyed permutation is a bijection and the green list has floor(gamma V) ids") {
  for (auto seeding : {watermark::Seeding::prev_token, watermark::Seeding::self_hash}) {
    GreenList g(wm(seeding, 7), 1000);
    CHECK(g.green_size() == 250);
    for (std::uint64_t seed : {0ULL, 1ULL, 123456789ULL}) {
      std::set<std::uint64_t> images;
      std::size_t greens = 0;
      for (toylm::TokenId t = 0; t < 1000; ++t) {
        images.insert(g.permute(seed, t));
        greens += g.is_green_for_seed(seed, t);
      }
      CHECK(images.size() == 1000);
      CHECK(*images.rbegin() == 999);
      CHECK(greens == 250);
    }
  }
  GreenList a(wm(watermark::Seeding::prev_token, 1), 1000), b(wm(watermark::Seeding::prev_token, 2), 1000);
  std::size_t same = 0;
  const std::vector<toylm::TokenId> ctx{5};
  for (toylm::TokenId t = 0; t < 1000; ++t) same += a.is_green(ctx, t) == b.is_green(ctx, t);
  CHECK(same < 1000);
}

TEST_CASE("null green rate is gamma") {
  const auto V = testing::news_model().vocab().size();
  for (auto seeding : {watermark::Seeding::prev_token, watermark::Seeding::self_hash}) {
    GreenList g(wm(seeding), V);
    Rng rng(44);
    std::size_t green = 0;
    const std::size_t n = 100000;
    std::vector<toylm::TokenId> ctx(g.config().context_width());
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& c : ctx) c = static_cast<toylm::TokenId>(rng.below(V));
      green += g.is_green(ctx, static_cast<toylm::TokenId>(rng.below(V)));
    }
    CHECK(std::abs(static_cast<double>(green) / n - 0.25) <= 0.02);
  }
}

TEST_CASE("streaming detection equals batch detection") {
  Rng rng(3);
  for (auto seeding : {watermark::Seeding::prev_token, watermark::Seeding::self_hash}) {
    GreenList g(wm(seeding, 9), 500);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<toylm::TokenId> ids(2 + rng.below(60));
      for (auto& id : ids) id = static_cast<toylm::TokenId>(rng.below(500));
      watermark::StreamState s;
      const auto cut = rng.below(ids.size());
      for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i == cut) {
          const auto wire = s.serialize();
          s = watermark::StreamState::deserialize(wire);
          CHECK(s.serialize() == wire);
        }
        s = watermark::score_stream(g, s, ids[i]);
      }
      if (s.T < 2) {
        CHECK_THROWS_AS(watermark::detect_ids(g, ids), DataError);
        continue;
      }
      const auto batch = watermark::detect_ids(g, ids);
      const auto stream = watermark::finish(g, s);
      CHECK(batch.T == stream.T);
      CHECK(batch.green_count == stream.green_count);
      CHECK(batch.z == stream.z);
      CHECK(batch.T == ids.size() - g.config().context_width());
    }
  }
  CHECK_THROWS_AS(watermark::StreamState::deserialize("1 2"), DataError);
}

TEST_CASE("zero bias reproduces plain generation") {
  const auto& m = testing::mini_model();
  WatermarkConfig c;
  c.delta = 0.0;
  GreenList g(c, m.vocab().size());
  toylm::GenerateOptions o;
  o.sampling = {1.0, 0.96, 80, 40};
  o.seed = 21;
  CHECK(watermark::generate(m, "The council said", g, o.sampling, 21).text == m.generate("The council said", o).text);
}

TEST_CASE("strong bias makes almost every generated token green") {
  const auto& m = testing::news_model();
  WatermarkConfig c;
  c.delta = 10.0;
  GreenList g(c, m.vocab().size());
  const std::string prompt = "The city council approved the new budget on Monday";
  const auto gen = watermark::generate(m, prompt, g, {1.0, 0.96, 300, 300}, 2);
  auto ids = m.vocab().ids(toylm::tokenize(prompt));
  const std::size_t first = ids.size();
  for (const auto& t : gen.tokens) ids.push_back(m.vocab().id(t));
  std::size_t green = 0;
  for (std::size_t i = first; i < ids.size(); ++i) {
    green += g.is_green(std::span<const toylm::TokenId>(ids.data() + i - 1, 1), ids[i]);
  }
  CHECK(gen.tokens.size() == 300);
  CHECK(static_cast<double>(green) / 300.0 > 0.9);
  CHECK(watermark::detect(gen.text, g, m.vocab()).detected);
  CHECK_THROWS_AS(watermark::detect(gen.text, GreenList(c, 10), m.vocab()), UsageError);
}

TEST_CASE("metric detectors") {
  const auto uniform = toylm::NGramModel::train_texts({"a b c d e f g"}, 3, 1e12);
  const auto s = uniform.score("a b c d e f g");
  const double lnV = std::log(static_cast<double>(uniform.vocab().size()));
  CHECK(detectors::gltr(s.tokens) == doctest::Approx(-lnV).epsilon(1e-6));
  CHECK(detectors::entropy_detector(s.tokens) == doctest::Approx(-lnV).epsilon(1e-6));

  std::vector<toylm::TokenScore> hand{{"a", -1.0, 1, 0.5}, {"b", -2.5, 2, 1.5}, {"c", -0.5, 4, 1.0}};
  CHECK(detectors::gltr(hand) == doctest::Approx(-4.0 / 3.0));
  CHECK(detectors::entropy_detector(hand) == doctest::Approx(-1.0));
  CHECK(detectors::rank_detector(with_ranks({1, 1, 1})) == -1.0);
  CHECK(detectors::logrank_detector(with_ranks({1, 1, 1})) == 0.0);
  CHECK(detectors::rank_detector(with_ranks({1, 3})) == -2.0);
  CHECK(detectors::logrank_detector(with_ranks({1, 3})) == doctest::Approx(-0.5493).epsilon(1e-4));
  CHECK_THROWS_AS(detectors::gltr(std::vector<toylm::TokenScore>{}), DataError);

  const auto& m = testing::news_model();
  toylm::GenerateOptions greedy, random;
  greedy.sampling = {1e-4, 1.0, 40, 40};
  random.sampling = {1.0, 1.0, 40, 40};
  const std::string prompt = "The city council";
  const auto g = m.score(prompt + " " + m.generate(prompt, greedy).text);
  const auto r = m.score(prompt + " " + m.generate(prompt, random).text);
  CHECK(detectors::gltr(g.tokens) > detectors::gltr(r.tokens));
  CHECK(detectors::logrank_detector(g.tokens) > detectors::logrank_detector(r.tokens));
  CHECK(detectors::entropy_detector(g.tokens) > detectors::entropy_detector(r.tokens));
}

TEST_CASE("DetectGPT statistic") {
  const std::vector<double> p{-12.0, -14.0};
  CHECK(detectors::detect_gpt_statistic(-10.0, p, detectors::GptMode::d) == doctest::Approx(3.0));
  CHECK(detectors::detect_gpt_statistic(-10.0, p, detectors::GptMode::z) == doctest::Approx(2.1213).epsilon(1e-4));
  const std::vector<double> flat{-10.0, -10.0};
  CHECK(detectors::detect_gpt_statistic(-10.0, flat, detectors::GptMode::z) == 0.0);
  CHECK(std::isfinite(detectors::detect_gpt_statistic(-9.0, flat, detectors::GptMode::z)));
}

TEST_CASE("DetectGPT on text") {
  const auto& m = testing::news_model();
  const std::string t = testing::human("news_test.jsonl", corpus::Split::test).at(0).text;
  detectors::DetectGptConfig c;
  c.mask_ratio = 0.0;
  CHECK(detectors::detect_gpt(t, m, c) == 0.0);
  c = {};
  c.seed = 3;
  const double plain = detectors::detect_gpt(t, m, c);
  CHECK(plain == detectors::detect_gpt(t, m, c));
  CHECK(detectors::detect_gpt(t, m, c, detectors::PatchConfig{0.0}) == plain);
  c.mode = detectors::GptMode::z;
  CHECK(detectors::detect_gpt(t, m, c, detectors::PatchConfig{0.0}) == detectors::detect_gpt(t, m, c));
  c.n_perturbations = 1;
  CHECK_THROWS_AS(detectors::detect_gpt(t, m, c), UsageError);
  CHECK_THROWS_AS(detectors::detect_gpt("one", m, detectors::DetectGptConfig{}), DataError);
  CHECK_THROWS_AS(detectors::detect_gpt(t, m, detectors::DetectGptConfig{}, detectors::PatchConfig{0.6}), UsageError);
}

TEST_CASE("patch mask") {
  const std::vector<double> lp{-1.0, -5.0, -3.0, -5.0, -0.5, -2.0, -4.0, -1.5, -0.1, -0.2};
  auto m = detectors::patch_mask(lp, 0.0);
  CHECK(std::count(m.begin(), m.end(), true) == 0);
  m = detectors::patch_mask(lp, 0.1);
  CHECK(std::count(m.begin(), m.end(), true) == 1);
  CHECK(m[1]);
  m = detectors::patch_mask(lp, 0.15);
  CHECK(std::count(m.begin(), m.end(), true) == 2);
  CHECK((m[1] && m[3]));
  m = detectors::patch_mask(lp, 0.3);
  CHECK((m[1] && m[3] && m[6]));
}

TEST_CASE("detector names") {
  for (const std::string n : {"gltr", "rank", "logrank", "entropy", "watermark", "detectgpt-10d", "detectgpt-5z+patch"}) {
    CHECK(detectors::DetectorSpec::parse(n).name() == n);
  }
  CHECK(detectors::DetectorSpec::parse("gltr").metric());
  CHECK_FALSE(detectors::DetectorSpec::parse("detectgpt-10d").metric());
  for (const std::string n : {"", "gltr2", "detectgpt-", "detectgpt-0d", "detectgpt-1z", "detectgpt-10x", "roberta"}) {
    CHECK_THROWS_AS(detectors::DetectorSpec::parse(n), UsageError);
  }
}

TEST_CASE("external scores") {
  testing::TempDir tmp("scores");
  const auto p = tmp.path() / "s.tsv";
  {
    std::ofstream out(p);
  }
  CHECK(detectors::ingest_external_scores(p).scores.empty());
  detectors::write_scores(p, "roberta", {{"a", 0.25}, {"b", -1.5}});
  auto s = detectors::ingest_external_scores(p);
  CHECK(s.detector == "roberta");
  CHECK(s.scores.at("a") == 0.25);
  CHECK(s.scores.at("b") == -1.5);
  {
    std::ofstream out(p);
    out << "# detector=ppl polarity=lower_is_machine\na\t3\n";
  }
  s = detectors::ingest_external_scores(p);
  CHECK(s.polarity == detectors::Polarity::lower_is_machine);
  CHECK(s.scores.at("a") == -3.0);
  const std::set<std::string> known{"b"};
  CHECK_THROWS_AS(detectors::ingest_external_scores(p, &known), DataError);
  {
    std::ofstream out(p);
    out << "# detector=x polarity=higher_is_machine\na\t1\na\t2\n";
  }
  CHECK_THROWS_AS(detectors::ingest_external_scores(p), DataError);
  {
    std::ofstream out(p);
    out << "a\t1\n";
  }
  CHECK_THROWS_AS(detectors::ingest_external_scores(p), DataError);
}
