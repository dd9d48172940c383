#include <doctest.h>

#include <cmath>
#include <set>

#include "mgt/attacks_cogen.hpp"
#include "mgt/attacks_edit.hpp"
#include "mgt/attacks_para.hpp"
#include "mgt/attacks_prompt.hpp"
#include "mgt/backend.hpp"
#include "mgt/budget.hpp"
#include "mgt/error.hpp"
#include "mgt/text.hpp"
#include "support.hpp"

using namespace mgt;
using namespace mgt::attacks;

namespace {

const std::string kText =
    "The city council approved the new budget on Monday. Officials said the plan would expand local "
    "schools and repair several roads before winter. Residents asked whether taxes would rise!";

EditResult edit(EditKind kind, double p, std::string_view s, std::uint64_t seed = 1) {
  EditAttackConfig c;
  c.kind = kind;
  c.per_word_probability = p;
  c.seed = seed;
  return apply_edit_attack(s, c);
}

std::size_t word_overlap(const std::string& a, const std::string& b) {
  std::multiset<std::string> wa;
  for (auto& w : text::split_words(a)) wa.insert(w);
  std::size_t shared = 0;
  for (auto& w : text::split_words(b)) {
    auto it = wa.find(w);
    if (it != wa.end()) {
      wa.erase(it);
      ++shared;
    }
  }
  return shared;
}

toylm::SamplingConfig sampling(std::size_t max_tokens, std::size_t min_tokens) {
  return {1.0, 0.96, max_tokens, min_tokens};
}

}  // namespace

TEST_CASE("edit attacks at p=0 are the identity") {
  for (auto kind : {EditKind::typo_insert, EditKind::typo_delete, EditKind::typo_substitute, EditKind::typo_transpose,
                    EditKind::typo_mixed, EditKind::homoglyph, EditKind::format_zws, EditKind::format_shift}) {
    const auto r = edit(kind, 0.0, kText);
    CHECK(r.text == kText);
    CHECK(r.count == 0);
  }
}

TEST_CASE("single typo kinds have the expected edit distance") {
  const auto del = edit(EditKind::typo_delete, 1.0, "abc");
  CHECK(text::codepoint_count(del.text) == 2);
  CHECK(budget::edit_distance("abc", del.text) == 1);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    CHECK(budget::edit_distance("house", edit(EditKind::typo_insert, 1.0, "house", seed).text) == 1);
    CHECK(budget::edit_distance("house", edit(EditKind::typo_substitute, 1.0, "house", seed).text) == 1);
    CHECK(budget::edit_distance("house", edit(EditKind::typo_transpose, 1.0, "house", seed).text) == 2);
    const auto mixed = edit(EditKind::typo_mixed, 1.0, "house", seed);
    CHECK(mixed.count == 1);
    CHECK(budget::edit_distance("house", mixed.text) >= 1);
  }
}

TEST_CASE("typos skip words without letters") {
  const auto r = edit(EditKind::typo_substitute, 1.0, "42 ... a");
  CHECK(r.count == 1);
  CHECK(r.skipped == 2);
  CHECK(edit(EditKind::typo_delete, 1.0, "a").skipped == 1);
  CHECK(edit(EditKind::typo_transpose, 1.0, "aa").skipped == 1);
}

TEST_CASE("keyboard neighbours are symmetric") {
  for (char a = 'a'; a <= 'z'; ++a) {
    CHECK_FALSE(qwerty_neighbors(a).empty());
    for (char b : qwerty_neighbors(a)) CHECK(qwerty_neighbors(b).find(a) != std::string_view::npos);
  }
  CHECK(qwerty_neighbors('1').empty());
}

TEST_CASE("apply_typo_count places exactly n typos") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto r = apply_typo_count(kText, EditKind::typo_mixed, 5, seed);
    CHECK(r.count == 5);
    CHECK(r.skipped == 0);
    const auto d = budget::edit_distance(kText, r.text);
    CHECK(d >= 5);
    CHECK(d <= 10);
  }
  const auto few = apply_typo_count("one two", EditKind::typo_substitute, 5, 1);
  CHECK(few.count == 2);
  CHECK(few.skipped == 3);
}

TEST_CASE("homoglyphs") {
  const auto r = edit(EditKind::homoglyph, 1.0, "a");
  CHECK(r.text == "а");
  CHECK(budget::edit_distance("a", r.text) == 1);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto h = edit(EditKind::homoglyph, 0.3, kText, seed);
    CHECK(budget::edit_distance(kText, h.text) == h.count);
    CHECK(HomoglyphTable::builtin().restore(h.text) == kText);
  }
  for (const auto& [from, to] : HomoglyphTable::builtin().mapping()) {
    CHECK(from < 0x80);
    CHECK(to >= 0x80);
  }
  CHECK_THROWS_AS(HomoglyphTable(std::map<char32_t, char32_t>{{U'a', U'x'}, {U'b', U'x'}}), DataError);
  CHECK_THROWS_AS(HomoglyphTable(std::map<char32_t, char32_t>{{U'a', U'a'}}), DataError);
  CHECK(edit(EditKind::homoglyph, 1.0, "42").skipped == 1);
}

TEST_CASE("format attacks") {
  const auto one = edit(EditKind::format_zws, 1.0, "a b");
  CHECK(one.text == "a​ b");
  CHECK(budget::edit_distance("a b", one.text) == 1);
  CHECK(budget::edit_distance("a b", one.text, budget::Accounting::byte) == 2);
  const auto many = edit(EditKind::format_zws, 0.5, kText, 3);
  CHECK(strip_zero_width(many.text) == kText);
  CHECK(budget::edit_distance(kText, many.text) == many.count);
  const auto shift = edit(EditKind::format_shift, 1.0, kText);
  CHECK(shift.count == 3);
  CHECK(text::split_words(shift.text) == text::split_words(kText));
}

TEST_CASE("edit attacks are deterministic") {
  CHECK(edit(EditKind::typo_mixed, 0.3, kText, 9).text == edit(EditKind::typo_mixed, 0.3, kText, 9).text);
  CHECK(edit(EditKind::typo_mixed, 0.3, kText, 9).text != edit(EditKind::typo_mixed, 0.3, kText, 10).text);
  EditAttackConfig bad;
  bad.per_word_probability = 1.5;
  CHECK_THROWS_AS(apply_edit_attack(kText, bad), UsageError);
}

TEST_CASE("synonym dictionary") {
  const SynonymDictionary d({{"Big", {"large", "big", "huge"}}, {"fast", {"fast"}}, {"run", {"sprint off"}}});
  REQUIRE(d.lookup("big"));
  CHECK(d.lookup("BIG")->front() == "large");
  CHECK(d.top("Big") == "Large");
  CHECK_FALSE(d.lookup("fast"));
  CHECK_FALSE(d.lookup("run"));
  CHECK(d.rejected() >= 1);
  ParaAttackConfig c;
  c.rate = 1.0;
  CHECK(synonym_substitute_free("big", c, d).text == "large");
  CHECK(synonym_substitute_free("The big, big dog.", c, d).text == "The large, large dog.");
  c.rate = 0.0;
  CHECK(synonym_substitute_free(kText, c, testing::dictionary()).text == kText);
}

TEST_CASE("free synonym substitution count follows the binomial mean") {
  std::string text;
  const auto words = text::split_words(testing::human("news_test.jsonl", corpus::Split::test).at(0).text);
  for (std::size_t i = 0; i < 200; ++i) text += words[i % words.size()] + " ";
  ParaAttackConfig c;
  c.rate = 0.2;
  double selected = 0.0;
  std::size_t eligible = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    c.seed = seed;
    const auto r = synonym_substitute_free(text, c, testing::dictionary());
    const auto sub = substitute_synonyms(text, 0.2, seed, testing::dictionary());
    eligible = sub.eligible;
    CHECK(r.count <= eligible);
    selected += static_cast<double>(r.count + r.skipped);
  }
  const double mean = selected / 1000.0;
  const double sd = std::sqrt(static_cast<double>(eligible) * 0.2 * 0.8 / 1000.0);
  CHECK(std::abs(mean - 0.2 * static_cast<double>(eligible)) < 4.0 * sd);
}

TEST_CASE("backend-delegated paraphrase attacks") {
  backend::ToyBackend toy(testing::news_model(), testing::dictionary());
  backend::ToyBackend echo(testing::news_model(), testing::dictionary(), backend::ParaphraseMode::echo);
  ParaAttackConfig c;
  for (auto kind : {ParaKind::syn_model, ParaKind::span, ParaKind::inner_sent, ParaKind::inter_sent}) {
    c.kind = kind;
    c.rate = 0.0;
    CHECK(apply_para_attack(kText, c, testing::dictionary(), toy).text == kText);
    c.rate = 0.5;
    c.seed = 4;
    const auto a = apply_para_attack(kText, c, testing::dictionary(), toy).text;
    CHECK(a == apply_para_attack(kText, c, testing::dictionary(), toy).text);
    CHECK(a != kText);
  }
  c.kind = ParaKind::inner_sent;
  c.rate = 1.0;
  CHECK(paraphrase_sentences(kText, c, echo).text == kText);
  c.kind = ParaKind::inter_sent;
  CHECK(paraphrase_sentences(kText, c, echo).text == kText);
}

TEST_CASE("toy paraphrase overlap falls as the rate grows") {
  backend::ToyBackend toy(testing::news_model(), testing::dictionary());
  const auto docs = testing::human("news_test.jsonl", corpus::Split::test);
  ParaAttackConfig c;
  c.kind = ParaKind::inter_sent;
  double previous = 1.0;
  for (double rate : {0.0, 0.25, 0.5, 1.0}) {
    c.rate = rate;
    double overlap = 0.0;
    for (std::size_t i = 0; i < 20; ++i) {
      c.seed = i;
      const auto out = paraphrase_sentences(docs[i].text, c, toy).text;
      overlap += static_cast<double>(word_overlap(docs[i].text, out)) /
                 static_cast<double>(text::split_words(docs[i].text).size());
    }
    overlap /= 20.0;
    if (rate == 0.0) {
      CHECK(overlap == 1.0);
    } else {
      CHECK(overlap < previous);
    }
    previous = overlap;
  }
}

TEST_CASE("substitution rules") {
  const auto rule = SubstitutionRule::parse("a:z");
  CHECK(apply_rule("casting", rule) == "czsting");
  CHECK(recover("Zs the sun dipped below the horiaon, czsting", rule) == "As the sun dipped below the horizon, casting");
  CHECK(apply_rule("hello world", rule) == "hello world");
  CHECK(rule.map(U'A') == U'Z');
  CHECK(rule.map(U'Z') == U'A');
  CHECK_THROWS_AS(SubstitutionRule::parse("a:a"), UsageError);
  CHECK_THROWS_AS(SubstitutionRule::parse("a:z,z:b"), UsageError);
  CHECK_THROWS_AS(SubstitutionRule::parse("az"), UsageError);
  CHECK_THROWS_AS(SubstitutionRule::parse("ab:c"), UsageError);
  CHECK(SubstitutionRule::parse("").empty());
  CHECK(SubstitutionRule::parse("a:z,c:k").str() == "a:z,c:k");
  Rng rng(8);
  const auto multi = SubstitutionRule::parse("a:z,e:q,é:ж");
  for (int i = 0; i < 1000; ++i) {
    std::u32string t;
    const auto len = rng.below(30);
    for (std::uint64_t k = 0; k < len; ++k) t.push_back(U"aAzZeEqQéж .b"[rng.below(13)]);
    const auto s = text::encode(t);
    CHECK(apply_rule(apply_rule(s, multi), multi) == s);
  }
}

TEST_CASE("in-context prompt template") {
  IclPromptSpec spec{std::string(kIclInstruction), "human text", "machine text", "Prompt words"};
  const auto p = build_icl_prompt(spec);
  CHECK(p == build_icl_prompt(spec));
  CHECK(p.find("Positive example: human text") != std::string::npos);
  CHECK(p.find("Negative example: machine text") != std::string::npos);
  CHECK(p.ends_with("Prompt words"));
  std::swap(spec.positive_example, spec.negative_example);
  CHECK(build_icl_prompt(spec) != p);
  spec.negative_example = " ";
  CHECK_THROWS_AS(build_icl_prompt(spec), UsageError);
}

TEST_CASE("prompt paraphrase") {
  backend::ToyBackend toy(testing::news_model(), testing::dictionary());
  backend::ToyBackend echo(testing::news_model(), testing::dictionary(), backend::ParaphraseMode::echo);
  const std::string prompt = "The city council approved the new budget";
  CHECK(paraphrase_prompt(prompt, echo, 1).text == prompt);
  CHECK(paraphrase_prompt(prompt, toy, 1).text != prompt);
  CHECK_THROWS_AS(paraphrase_prompt("  ", toy, 1), UsageError);
}

TEST_CASE("character-substituted generation") {
  const auto& m = testing::mini_model();
  const auto s = sampling(60, 30);
  toylm::GenerateOptions o;
  o.sampling = s;
  o.seed = 12;
  const auto plain = m.generate("The council said", o).text;
  const auto absent = SubstitutionRule::parse("ж:ю");
  const auto same = cs_generate(m, "The council said", absent, s, 12);
  CHECK(same.raw == plain);
  CHECK(same.recovered == plain);
  const auto rule = SubstitutionRule::parse("a:z");
  const auto g = cs_generate(m, "The council said", rule, s, 12);
  CHECK(apply_rule(g.recovered, rule) == g.raw);
  CHECK(g.raw != plain);
  backend::ToyBackend toy(m, testing::dictionary());
  const auto b = cs_generate(toy, "The council said", rule, s, 12);
  CHECK(recover(b.raw, rule) == b.recovered);
  CHECK(cs_instruction("The council said", rule, 60).find("The council said") != std::string::npos);
}

TEST_CASE("co-generation no-op configurations reproduce plain generation") {
  const auto& m = testing::mini_model();
  const auto s = sampling(60, 30);
  toylm::GenerateOptions o;
  o.sampling = s;
  o.seed = 5;
  const auto plain = m.generate("The council said", o).text;
  CogenConfig typo;
  typo.rule = SubstitutionRule::parse("ж:ю");
  const auto t = cogen_typo(m, "The council said", typo, s, 5);
  CHECK(t.raw == plain);
  CHECK(t.cleaned == plain);
  CHECK(t.insertions == 0);
  CogenConfig emoji;
  emoji.kind = CogenKind::emoji;
  emoji.emoji_probability = 0.0;
  const auto e = cogen_emoji(m, "The council said", emoji, s, 5);
  CHECK(e.raw == plain);
  CHECK(e.cleaned == plain);
}

TEST_CASE("co-generated emoji") {
  const auto& m = testing::mini_model();
  const auto s = sampling(60, 40);
  CogenConfig emoji;
  emoji.kind = CogenKind::emoji;
  emoji.emoji_probability = 1.0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    emoji.seed = seed;
    const auto e = cogen_emoji(m, "The council said", emoji, s, seed);
    CHECK(count_emoji(e.raw, emoji.emoji_list) == e.sentences);
    CHECK(count_emoji(e.cleaned, emoji.emoji_list) == 0);
  }
  emoji.emoji_probability = 0.5;
  double inserted = 0.0, sentences = 0.0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    emoji.seed = seed;
    const auto e = cogen_emoji(m, "The council said", emoji, sampling(40, 20), seed);
    inserted += static_cast<double>(e.insertions);
    sentences += static_cast<double>(e.sentences);
  }
  REQUIRE(sentences > 0.0);
  CHECK(std::abs(inserted / sentences - 0.5) <= 0.03);
}

TEST_CASE("co-generation configuration errors") {
  const auto m = toylm::NGramModel::train_texts({"hello \U0001F600 world ."}, 3, 1e-3);
  CogenConfig emoji;
  emoji.kind = CogenKind::emoji;
  emoji.emoji_probability = 0.5;
  CHECK_THROWS_AS(cogen_emoji(m, "hello", emoji, sampling(10, 0), 1), UsageError);
  emoji.emoji_probability = 2.0;
  CHECK_THROWS_AS(emoji.validate(), UsageError);
  emoji.emoji_probability = 0.5;
  emoji.emoji_list = {U'x'};
  CHECK_THROWS_AS(emoji.validate(), UsageError);
}

TEST_CASE("remove_emoji") {
  const auto& list = default_emoji();
  CHECK(list.size() == 50);
  CHECK(remove_emoji("Hi. \U0001F600 Next. \U0001F601", list) == "Hi. Next.");
  CHECK(count_emoji("a \U0001F600\U0001F600", list) == 2);
}
