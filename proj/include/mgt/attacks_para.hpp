#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "mgt/backend.hpp"
#include "mgt/synonyms.hpp"

namespace mgt::attacks {

enum class ParaKind { syn_free, syn_model, span, inner_sent, inter_sent };

ParaKind parse_para_kind(std::string_view s);
std::string_view to_string(ParaKind kind);

struct ParaAttackConfig {
  ParaKind kind = ParaKind::syn_free;
  double rate = 0.0;
  std::size_t span_len = 2;
  /// Diversity hints on a 0-100 scale. inner_sent sends lex_diversity with
  /// every sentence; inter_sent sends rate times each hint.
  double lex_diversity = 100.0;
  double order_diversity = 100.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct ParaResult {
  std::string text;
  std::size_t count = 0;     // substituted words, masked spans or paraphrased units
  std::size_t skipped = 0;   // selected words absent from the dictionary
  std::size_t failures = 0;  // empty paraphrases replaced by the original
};

ParaResult synonym_substitute_free(std::string_view text, const ParaAttackConfig& config,
                                   const SynonymDictionary& dictionary);
ParaResult synonym_substitute_model(std::string_view text, const ParaAttackConfig& config, backend::Backend& backend);
ParaResult span_perturb(std::string_view text, const ParaAttackConfig& config, backend::Backend& backend);
ParaResult paraphrase_sentences(std::string_view text, const ParaAttackConfig& config, backend::Backend& backend);

ParaResult apply_para_attack(std::string_view text, const ParaAttackConfig& config,
                             const SynonymDictionary& dictionary, backend::Backend& backend);

}  // namespace mgt::attacks
