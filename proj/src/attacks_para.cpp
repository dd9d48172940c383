#include "mgt/attacks_para.hpp"

#include <fmt/format.h>

#include <array>
#include <cmath>

#include "mgt/error.hpp"
#include "mgt/rng.hpp"
#include "mgt/text.hpp"

namespace mgt::attacks {

namespace {

constexpr std::array<std::pair<ParaKind, std::string_view>, 5> kNames{{
    {ParaKind::syn_free, "syn_free"},
    {ParaKind::syn_model, "syn_model"},
    {ParaKind::span, "span"},
    {ParaKind::inner_sent, "inner_sent"},
    {ParaKind::inter_sent, "inter_sent"},
}};

bool blank(std::string_view s) { return text::split_words(s).empty(); }

}  // namespace

ParaKind parse_para_kind(std::string_view s) {
  for (const auto& [k, name] : kNames) {
    if (name == s) return k;
  }
  throw UsageError(fmt::format("unknown paraphrase attack '{}'", s));
}

std::string_view to_string(ParaKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "?";
}

void ParaAttackConfig::validate() const {
  if (!(rate >= 0.0 && rate <= 1.0)) throw UsageError(fmt::format("rate {} is outside [0, 1]", rate));
  if (span_len == 0) throw UsageError("span length must be at least 1");
  if (!(lex_diversity >= 0.0 && lex_diversity <= 100.0) || !(order_diversity >= 0.0 && order_diversity <= 100.0)) {
    throw UsageError("diversity hints must be in [0, 100]");
  }
}

ParaResult synonym_substitute_free(std::string_view s, const ParaAttackConfig& config,
                                   const SynonymDictionary& dictionary) {
  config.validate();
  const auto sub = substitute_synonyms(s, config.rate, config.seed, dictionary);
  return {sub.text, sub.count, sub.skipped, 0};
}

ParaResult synonym_substitute_model(std::string_view s, const ParaAttackConfig& config, backend::Backend& backend) {
  config.validate();
  ParaResult r;
  if (config.rate == 0.0) {
    r.text = std::string(s);
    return r;
  }
  auto seg = text::segment(s);
  for (const auto& sub : backend.select_substitutions(s, config.rate, config.seed)) {
    if (sub.index >= seg.words.size()) throw BackendError(fmt::format("substitution index {} is out of range", sub.index));
    if (blank(sub.replacement) || text::split_words(sub.replacement).size() != 1) {
      throw BackendError("substitution must be a single word");
    }
    seg.words[sub.index] = sub.replacement;
    ++r.count;
  }
  r.text = seg.str();
  return r;
}

ParaResult span_perturb(std::string_view s, const ParaAttackConfig& config, backend::Backend& backend) {
  config.validate();
  ParaResult r;
  const auto n = text::split_words(s).size();
  const auto count = static_cast<std::size_t>(
      std::llround(config.rate * static_cast<double>(n) / static_cast<double>(config.span_len)));
  Rng rng(config.seed);
  const auto spans = toylm::choose_spans(std::vector<bool>(n, true), count, config.span_len, rng);
  if (spans.empty()) {
    r.text = std::string(s);
    return r;
  }
  r.text = backend.mask_fill(s, spans, derive_seed(config.seed, "fill"));
  r.count = spans.size();
  return r;
}

ParaResult paraphrase_sentences(std::string_view s, const ParaAttackConfig& config, backend::Backend& backend) {
  config.validate();
  ParaResult r;
  if (config.kind == ParaKind::inter_sent) {
    if (config.rate == 0.0) {
      r.text = std::string(s);
      return r;
    }
    std::string out = backend.paraphrase(s, config.rate * config.lex_diversity, config.rate * config.order_diversity,
                                         config.seed);
    if (blank(out)) {
      r.text = std::string(s);
      r.failures = 1;
    } else {
      r.text = std::move(out);
      r.count = 1;
    }
    return r;
  }
  if (config.kind != ParaKind::inner_sent) throw UsageError("not a sentence paraphrase attack");
  const auto seg = text::segment(s);
  Rng rng(config.seed);
  std::string out = seg.leading;
  std::size_t index = 0;
  for (const auto& range : text::sentences(seg)) {
    std::string sentence;
    for (std::size_t i = range.first; i < range.last; ++i) {
      sentence += seg.words[i];
      if (i + 1 < range.last) sentence += seg.gaps[i];
    }
    if (rng.bernoulli(config.rate)) {
      std::string para = backend.paraphrase(sentence, config.lex_diversity, 0.0, derive_seed(config.seed, index));
      if (blank(para)) {
        ++r.failures;
      } else {
        sentence = std::move(para);
        ++r.count;
      }
    }
    out += sentence;
    out += seg.gaps[range.last - 1];
    ++index;
  }
  r.text = std::move(out);
  return r;
}

ParaResult apply_para_attack(std::string_view s, const ParaAttackConfig& config, const SynonymDictionary& dictionary,
                             backend::Backend& backend) {
  switch (config.kind) {
    case ParaKind::syn_free: return synonym_substitute_free(s, config, dictionary);
    case ParaKind::syn_model: return synonym_substitute_model(s, config, backend);
    case ParaKind::span: return span_perturb(s, config, backend);
    case ParaKind::inner_sent:
    case ParaKind::inter_sent: return paraphrase_sentences(s, config, backend);
  }
  throw UsageError("unknown paraphrase attack");
}

}  // namespace mgt::attacks
