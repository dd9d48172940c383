#include "mgt/attacks_cogen.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "mgt/error.hpp"
#include "mgt/rng.hpp"
#include "mgt/text.hpp"

namespace mgt::attacks {

CogenKind parse_cogen_kind(std::string_view s) {
  if (s == "typo") return CogenKind::typo;
  if (s == "emoji") return CogenKind::emoji;
  throw UsageError(fmt::format("unknown co-generation kind '{}'", s));
}

std::string_view to_string(CogenKind kind) { return kind == CogenKind::typo ? "typo" : "emoji"; }

const std::vector<char32_t>& default_emoji() {
  static const std::vector<char32_t> list = {
      0x1F600, 0x1F601, 0x1F602, 0x1F603, 0x1F604, 0x1F605, 0x1F606, 0x1F609, 0x1F60A, 0x1F60B,
      0x1F60D, 0x1F60E, 0x1F60F, 0x1F610, 0x1F612, 0x1F614, 0x1F618, 0x1F61C, 0x1F621, 0x1F622,
      0x1F62D, 0x1F631, 0x1F633, 0x1F642, 0x1F643, 0x1F644, 0x1F914, 0x1F917, 0x1F923, 0x1F929,
      0x1F44D, 0x1F44E, 0x1F44F, 0x1F64F, 0x1F4AA, 0x1F440, 0x1F525, 0x1F4AF, 0x1F389, 0x1F680,
      0x1F31F, 0x1F308, 0x1F340, 0x1F34E, 0x1F355, 0x1F3B5, 0x1F4A1, 0x1F4F0, 0x1F30D, 0x1F499,
  };
  return list;
}

void CogenConfig::validate() const {
  if (kind == CogenKind::emoji) {
    if (!(emoji_probability >= 0.0 && emoji_probability <= 1.0)) {
      throw UsageError(fmt::format("emoji probability {} is outside [0, 1]", emoji_probability));
    }
    if (emoji_list.empty()) throw UsageError("emoji list is empty");
    for (char32_t cp : emoji_list) {
      if (cp < 0x80 || text::is_space(cp)) throw UsageError(fmt::format("U+{:04X} cannot serve as an emoji", static_cast<std::uint32_t>(cp)));
    }
  }
}

std::string remove_emoji(std::string_view text, const std::vector<char32_t>& emoji_list) {
  std::string stripped;
  for (char32_t cp : text::decode(text)) {
    if (std::find(emoji_list.begin(), emoji_list.end(), cp) == emoji_list.end()) text::append_utf8(stripped, cp);
  }
  std::string out;
  for (char c : stripped) {
    if (c == ' ' && (out.empty() || out.back() == ' ')) continue;
    out.push_back(c);
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::size_t count_emoji(std::string_view text, const std::vector<char32_t>& emoji_list) {
  const auto cps = text::decode(text);
  return static_cast<std::size_t>(std::count_if(cps.begin(), cps.end(), [&](char32_t cp) {
    return std::find(emoji_list.begin(), emoji_list.end(), cp) != emoji_list.end();
  }));
}

CogenResult cogen_generate(const toylm::NGramModel& model, std::string_view prompt, const CogenConfig& config,
                           const toylm::GenerateOptions& base) {
  config.validate();
  CogenResult r;
  toylm::GenerateOptions o = base;
  Rng emoji_rng(derive_seed(config.seed, "emoji"));
  if (config.kind == CogenKind::typo) {
    o.step_hook = [&](toylm::StepEvent& ev) {
      if (text::ends_sentence(ev.token)) ++r.sentences;
      std::string rewritten = apply_rule(ev.token, config.rule);
      if (rewritten != ev.token) ++r.insertions;
      ev.token = std::move(rewritten);
    };
  } else {
    for (char32_t cp : config.emoji_list) {
      std::string s;
      text::append_utf8(s, cp);
      if (model.vocab().contains(s)) throw UsageError(fmt::format("emoji {} is a vocabulary token", s));
    }
    o.step_hook = [&](toylm::StepEvent& ev) {
      if (!text::ends_sentence(ev.token)) return;
      ++r.sentences;
      if (!emoji_rng.bernoulli(config.emoji_probability)) return;
      std::string e;
      text::append_utf8(e, config.emoji_list[emoji_rng.below(config.emoji_list.size())]);
      ev.extra.push_back(std::move(e));
      ++r.insertions;
    };
  }
  auto gen = model.generate(prompt, o);
  r.flagged = gen.flagged;
  r.raw = std::move(gen.text);
  r.cleaned = config.kind == CogenKind::typo ? apply_rule(r.raw, config.rule) : remove_emoji(r.raw, config.emoji_list);
  return r;
}

CogenResult cogen_typo(const toylm::NGramModel& model, std::string_view prompt, const CogenConfig& config,
                       const toylm::SamplingConfig& sampling, std::uint64_t seed) {
  if (config.kind != CogenKind::typo) throw UsageError("cogen_typo needs a typo configuration");
  toylm::GenerateOptions o;
  o.sampling = sampling;
  o.seed = seed;
  return cogen_generate(model, prompt, config, o);
}

CogenResult cogen_emoji(const toylm::NGramModel& model, std::string_view prompt, const CogenConfig& config,
                        const toylm::SamplingConfig& sampling, std::uint64_t seed) {
  if (config.kind != CogenKind::emoji) throw UsageError("cogen_emoji needs an emoji configuration");
  toylm::GenerateOptions o;
  o.sampling = sampling;
  o.seed = seed;
  return cogen_generate(model, prompt, config, o);
}

}  // namespace mgt::attacks
