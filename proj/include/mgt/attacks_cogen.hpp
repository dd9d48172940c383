#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mgt/attacks_prompt.hpp"
#include "mgt/toylm.hpp"

namespace mgt::attacks {

enum class CogenKind { typo, emoji };

CogenKind parse_cogen_kind(std::string_view s);
std::string_view to_string(CogenKind kind);

/// 50 single-codepoint emoji.
const std::vector<char32_t>& default_emoji();

struct CogenConfig {
  CogenKind kind = CogenKind::typo;
  SubstitutionRule rule = SubstitutionRule::parse("c:k");
  double emoji_probability = 0.0;
  std::vector<char32_t> emoji_list = default_emoji();
  std::uint64_t seed = 0;

  void validate() const;
};

struct CogenResult {
  std::string raw;
  std::string cleaned;
  std::size_t insertions = 0;  // rewritten tokens (typo) or emoji inserted (emoji)
  std::size_t sentences = 0;   // sentence-ending tokens generated
  bool flagged = false;
};

/// Removes every codepoint of `emoji_list`, then collapses space runs and
/// trims spaces at both ends.
std::string remove_emoji(std::string_view text, const std::vector<char32_t>& emoji_list);
std::size_t count_emoji(std::string_view text, const std::vector<char32_t>& emoji_list);

/// Generation with the attack installed as the step hook. `base` supplies
/// sampling, generation seed and an optional logits hook (watermark).
CogenResult cogen_generate(const toylm::NGramModel& model, std::string_view prompt, const CogenConfig& config,
                           const toylm::GenerateOptions& base);

CogenResult cogen_typo(const toylm::NGramModel& model, std::string_view prompt, const CogenConfig& config,
                       const toylm::SamplingConfig& sampling, std::uint64_t seed);
CogenResult cogen_emoji(const toylm::NGramModel& model, std::string_view prompt, const CogenConfig& config,
                        const toylm::SamplingConfig& sampling, std::uint64_t seed);

}  // namespace mgt::attacks
