#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mgt/toylm.hpp"

namespace mgt::attacks {

/// Headword -> ranked single-word synonyms, looked up case-insensitively.
class SynonymDictionary {
 public:
  SynonymDictionary() = default;
  /// Lowercases headwords, drops self-synonyms and rejects multiword entries.
  explicit SynonymDictionary(const std::map<std::string, std::vector<std::string>>& entries);

  /// Lines "headword<TAB>syn1,syn2,...".
  static SynonymDictionary parse(std::istream& in, std::string_view source = "<stream>");
  static SynonymDictionary load(const std::filesystem::path& path);

  std::size_t size() const { return entries_.size(); }
  std::size_t rejected() const { return rejected_; }
  const std::vector<std::string>* lookup(std::string_view word) const;
  /// Top synonym of `word` with an initial capital copied from the source.
  std::optional<std::string> top(std::string_view word) const;

 private:
  std::map<std::string, std::vector<std::string>> entries_;
  std::size_t rejected_ = 0;
};

/// Closed-class pronouns and prepositions that are never substituted.
bool is_stop_word(std::string_view word);

/// Copies an initial capital from `source` onto `word`.
std::string match_case(std::string_view source, std::string_view word);

struct SubstitutionResult {
  std::string text;
  std::size_t count = 0;
  std::size_t eligible = 0;
  std::size_t skipped = 0;  // selected but absent from the dictionary
  std::vector<std::size_t> missing;  // word indices of the skipped words
};

/// Selects each eligible word with probability `rate`; picks the top
/// synonym, or a uniformly drawn one when `random_choice` is set.
SubstitutionResult substitute_synonyms(std::string_view text, double rate, std::uint64_t seed,
                                       const SynonymDictionary& dictionary, bool random_choice = false);

/// The bundled stand-in paraphraser: synonym substitution at rate
/// lex_diversity/100, then adjacent-sentence swaps with probability
/// order_diversity/100. Sentences are rejoined with single spaces. With a
/// `rewriter`, selected words that have no dictionary entry are resampled
/// from it instead of being kept.
std::string toy_paraphrase(std::string_view text, double lex_diversity, double order_diversity, std::uint64_t seed,
                           const SynonymDictionary& dictionary, const toylm::NGramModel* rewriter = nullptr);

}  // namespace mgt::attacks
