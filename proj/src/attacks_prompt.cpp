#include "mgt/attacks_prompt.hpp"

#include <fmt/format.h>

#include "mgt/error.hpp"
#include "mgt/text.hpp"

namespace mgt::attacks {

namespace {

bool is_lower(char32_t c) { return c >= 'a' && c <= 'z'; }
bool is_upper(char32_t c) { return c >= 'A' && c <= 'Z'; }

std::string utf8(char32_t cp) {
  std::string s;
  text::append_utf8(s, cp);
  return s;
}

}  // namespace

SubstitutionRule::SubstitutionRule(const std::vector<std::pair<char32_t, char32_t>>& pairs) : pairs_(pairs) {
  auto add = [this](char32_t a, char32_t b) {
    if (swap_.count(a) || swap_.count(b)) {
      throw UsageError(fmt::format("character '{}' appears in more than one pair", swap_.count(a) ? utf8(a) : utf8(b)));
    }
    swap_[a] = b;
    swap_[b] = a;
  };
  for (const auto& [a, b] : pairs) {
    if (a == b) throw UsageError(fmt::format("pair '{}:{}' swaps a character with itself", utf8(a), utf8(b)));
    add(a, b);
    const bool letters = (is_lower(a) || is_upper(a)) && (is_lower(b) || is_upper(b));
    if (letters && is_lower(a) == is_lower(b)) {
      const char32_t shift = is_lower(a) ? -32 : 32;
      add(a + shift, b + shift);
    }
  }
}

SubstitutionRule SubstitutionRule::parse(std::string_view spec) {
  std::vector<std::pair<char32_t, char32_t>> pairs;
  if (spec.empty()) return SubstitutionRule(pairs);
  std::size_t start = 0;
  while (start <= spec.size()) {
    const auto comma = spec.find(',', start);
    const auto item = spec.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) throw UsageError(fmt::format("rule item '{}' lacks ':'", item));
    const auto a = text::decode(item.substr(0, colon));
    const auto b = text::decode(item.substr(colon + 1));
    if (a.size() != 1 || b.size() != 1) throw UsageError(fmt::format("rule item '{}' must pair two characters", item));
    pairs.emplace_back(a[0], b[0]);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return SubstitutionRule(pairs);
}

char32_t SubstitutionRule::map(char32_t cp) const {
  auto it = swap_.find(cp);
  return it == swap_.end() ? cp : it->second;
}

std::string SubstitutionRule::str() const {
  std::string out;
  for (const auto& [a, b] : pairs_) {
    if (!out.empty()) out += ',';
    out += utf8(a) + ":" + utf8(b);
  }
  return out;
}

std::string apply_rule(std::string_view s, const SubstitutionRule& rule) {
  if (rule.empty()) return std::string(s);
  auto cps = text::decode(s);
  for (auto& cp : cps) cp = rule.map(cp);
  return text::encode(cps);
}

std::string recover(std::string_view s, const SubstitutionRule& rule) { return apply_rule(s, rule); }

std::string build_icl_prompt(const IclPromptSpec& spec) {
  if (text::split_words(spec.positive_example).empty()) throw UsageError("in-context prompt needs a positive example");
  if (text::split_words(spec.negative_example).empty()) throw UsageError("in-context prompt needs a negative example");
  return fmt::format("{}\n\nPositive example: {}\n\nNegative example: {}\n\nText: {}", spec.instruction,
                     spec.positive_example, spec.negative_example, spec.prompt);
}

PromptParaphrase paraphrase_prompt(std::string_view prompt, backend::Backend& backend, std::uint64_t seed,
                                   double lex_diversity, double order_diversity) {
  if (text::split_words(prompt).empty()) throw UsageError("cannot paraphrase an empty prompt");
  PromptParaphrase r;
  try {
    r.text = backend.paraphrase(prompt, lex_diversity, order_diversity, seed);
  } catch (const BackendError&) {
    r.text.clear();
  }
  if (text::split_words(r.text).empty()) {
    r.text = std::string(prompt);
    r.flagged = true;
  }
  return r;
}

std::string cs_instruction(std::string_view prompt, const SubstitutionRule& rule, std::size_t n_words) {
  std::string swaps;
  const auto& pairs = rule.pairs();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto a = utf8(pairs[i].first);
    const auto b = utf8(pairs[i].second);
    if (i) swaps += i + 1 == pairs.size() ? " and " : ", ";
    swaps += fmt::format("all `{}'s substituted with `{}'s and all `{}'s substituted with `{}'s", a, b, b, a);
  }
  return fmt::format("Continue {} words with {}:\n{}", n_words, swaps, prompt);
}

CsGeneration cs_generate(const toylm::NGramModel& model, std::string_view prompt, const SubstitutionRule& rule,
                         const toylm::SamplingConfig& sampling, std::uint64_t seed) {
  toylm::GenerateOptions o;
  o.sampling = sampling;
  o.seed = seed;
  return cs_generate(model, prompt, rule, o);
}

CsGeneration cs_generate(const toylm::NGramModel& model, std::string_view prompt, const SubstitutionRule& rule,
                         const toylm::GenerateOptions& base) {
  toylm::GenerateOptions o = base;
  o.step_hook = [&rule](toylm::StepEvent& ev) { ev.token = apply_rule(ev.token, rule); };
  CsGeneration r;
  r.raw = model.generate(prompt, o).text;
  r.recovered = recover(r.raw, rule);
  return r;
}

CsGeneration cs_generate(backend::Backend& backend, std::string_view prompt, const SubstitutionRule& rule,
                         const toylm::SamplingConfig& sampling, std::uint64_t seed) {
  const auto g = backend.generate(cs_instruction(prompt, rule, sampling.max_tokens), sampling, seed);
  CsGeneration r;
  r.raw = g.text;
  r.recovered = recover(r.raw, rule);
  return r;
}

}  // namespace mgt::attacks
