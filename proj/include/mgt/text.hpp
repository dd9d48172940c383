#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 and word-level helpers shared by every module. Texts are kept as
// UTF-8 bytes and never normalized; codepoint-level operations decode on
// demand.
namespace mgt::text {

/// Decodes UTF-8 into codepoints. Throws DataError on malformed input.
std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view codepoints);
void append_utf8(std::string& out, char32_t cp);
std::size_t codepoint_count(std::string_view utf8);

/// Unicode White_Space property. U+200B is a format character, not whitespace.
bool is_space(char32_t cp);
/// Whitespace that breaks lines (LF, VT, FF, CR, NEL, LS, PS).
bool is_line_break(char32_t cp);

std::vector<std::string> split_words(std::string_view s);
std::string join(const std::vector<std::string>& words, std::string_view sep = " ");

/// A text cut into words and the whitespace runs around them, so that
/// word-level edits can be applied without disturbing the layout.
struct Segmented {
  std::string leading;
  std::vector<std::string> words;
  std::vector<std::string> gaps;  // gaps[i] follows words[i]

  std::string str() const;
};

Segmented segment(std::string_view s);

/// Sentence boundary rule: the word ends in '.', '!' or '?'.
bool ends_sentence(std::string_view word);

/// Groups word indices [first, last) per sentence.
struct SentenceRange {
  std::size_t first = 0;
  std::size_t last = 0;
};
std::vector<SentenceRange> sentences(const Segmented& seg);

/// Splits a word into leading punctuation, alphabetic core and trailing punctuation.
struct WordParts {
  std::string_view prefix;
  std::string_view core;
  std::string_view suffix;
};
WordParts split_affixes(std::string_view word);

std::string ascii_lower(std::string_view s);
bool is_ascii_alpha(char32_t cp);

}  // namespace mgt::text
