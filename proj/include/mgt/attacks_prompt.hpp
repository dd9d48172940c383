#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mgt/backend.hpp"
#include "mgt/toylm.hpp"

namespace mgt::attacks {

/// A set of disjoint character swaps. Letter pairs are case-paired: {a,z}
/// also swaps A and Z. Applying a rule twice is the identity.
class SubstitutionRule {
 public:
  SubstitutionRule() = default;
  explicit SubstitutionRule(const std::vector<std::pair<char32_t, char32_t>>& pairs);
  /// Syntax "a:z,c:k".
  static SubstitutionRule parse(std::string_view spec);

  char32_t map(char32_t cp) const;
  bool empty() const { return swap_.empty(); }
  const std::vector<std::pair<char32_t, char32_t>>& pairs() const { return pairs_; }
  std::string str() const;

 private:
  std::vector<std::pair<char32_t, char32_t>> pairs_;
  std::map<char32_t, char32_t> swap_;
};

std::string apply_rule(std::string_view text, const SubstitutionRule& rule);
/// Inverse of apply_rule, which for an involution is apply_rule itself.
std::string recover(std::string_view text, const SubstitutionRule& rule);

struct IclPromptSpec {
  std::string instruction;
  std::string positive_example;  // human-written
  std::string negative_example;  // machine-generated
  std::string prompt;
};

inline constexpr std::string_view kIclInstruction =
    "Continue the text in the style of the positive example and unlike the negative example.";
/// Whitespace tokens the template adds around the parts.
inline constexpr std::size_t kIclScaffoldTokens = 5;

std::string build_icl_prompt(const IclPromptSpec& spec);

struct PromptParaphrase {
  std::string text;
  bool flagged = false;  // the backend failed or returned nothing; text is the original
};

PromptParaphrase paraphrase_prompt(std::string_view prompt, backend::Backend& backend, std::uint64_t seed,
                                   double lex_diversity = 100.0, double order_diversity = 0.0);

/// Instruction asking a capable model to write with the rule applied.
std::string cs_instruction(std::string_view prompt, const SubstitutionRule& rule, std::size_t n_words);

struct CsGeneration {
  std::string raw;        // as produced, rule applied
  std::string recovered;  // after recover()
};

/// Toy path: a step hook applies the rule to every sampled token before it
/// enters the context, then the output is recovered.
CsGeneration cs_generate(const toylm::NGramModel& model, std::string_view prompt, const SubstitutionRule& rule,
                         const toylm::SamplingConfig& sampling, std::uint64_t seed);
/// Same, with sampling, seed and logits hook taken from `base`.
CsGeneration cs_generate(const toylm::NGramModel& model, std::string_view prompt, const SubstitutionRule& rule,
                         const toylm::GenerateOptions& base);
/// Backend path: sends the instruction prompt and recovers the reply.
CsGeneration cs_generate(backend::Backend& backend, std::string_view prompt, const SubstitutionRule& rule,
                         const toylm::SamplingConfig& sampling, std::uint64_t seed);

}  // namespace mgt::attacks
