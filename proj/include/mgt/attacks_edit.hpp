#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "mgt/rng.hpp"

namespace mgt::attacks {

enum class EditKind {
  typo_insert,
  typo_delete,
  typo_substitute,
  typo_transpose,
  typo_mixed,
  homoglyph,
  format_zws,
  format_shift,
};

EditKind parse_edit_kind(std::string_view s);
std::string_view to_string(EditKind kind);
bool is_typo(EditKind kind);

struct EditAttackConfig {
  EditKind kind = EditKind::typo_mixed;
  double per_word_probability = 0.0;
  std::uint64_t seed = 0;
  bool letter_frequency_weighting = true;

  void validate() const;
};

struct EditResult {
  std::string text;
  std::size_t count = 0;    // edited words, altered characters or inserted characters
  std::size_t skipped = 0;  // selected words the attack could not edit
};

/// Relative frequency of a letter in English text (percent); 0 for non-letters.
double letter_frequency(char32_t cp);
/// Keyboard neighbours of an ASCII letter on a QWERTY layout, lowercase.
std::string_view qwerty_neighbors(char c);

/// One draw from the fixed mixture of typo kinds.
EditKind draw_typo_kind(Rng& rng);

class HomoglyphTable {
 public:
  static const HomoglyphTable& builtin();
  /// Lines "<source><TAB><replacement>", one codepoint each; '#' starts a comment.
  static HomoglyphTable load(const std::filesystem::path& path);
  explicit HomoglyphTable(std::map<char32_t, char32_t> mapping);

  bool covers(char32_t cp) const { return mapping_.count(cp) != 0; }
  char32_t at(char32_t cp) const { return mapping_.at(cp); }
  const std::map<char32_t, char32_t>& mapping() const { return mapping_; }
  /// Replaces every mapped target codepoint with its source.
  std::string restore(std::string_view text) const;

 private:
  std::map<char32_t, char32_t> mapping_;
  std::map<char32_t, char32_t> inverse_;
};

EditResult apply_typo_attack(std::string_view text, const EditAttackConfig& config);
/// Exactly `n_edits` typos (fewer when the text has fewer eligible words),
/// one per word, on words drawn uniformly without replacement.
EditResult apply_typo_count(std::string_view text, EditKind kind, std::size_t n_edits, std::uint64_t seed,
                            bool letter_frequency_weighting = true);
EditResult apply_homoglyph_attack(std::string_view text, const EditAttackConfig& config,
                                  const HomoglyphTable& table = HomoglyphTable::builtin());
EditResult apply_format_attack(std::string_view text, const EditAttackConfig& config);
/// Dispatches on config.kind.
EditResult apply_edit_attack(std::string_view text, const EditAttackConfig& config,
                             const HomoglyphTable& table = HomoglyphTable::builtin());

/// Removes every U+200B.
std::string strip_zero_width(std::string_view text);

}  // namespace mgt::attacks
