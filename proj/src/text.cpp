#include "mgt/text.hpp"

#include <fmt/format.h>

#include "mgt/error.hpp"

namespace mgt::text {

std::u32string decode(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    char32_t cp = 0;
    std::size_t len = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      throw DataError(fmt::format("invalid UTF-8 lead byte at offset {}", i));
    }
    if (i + len > s.size()) throw DataError(fmt::format("truncated UTF-8 sequence at offset {}", i));
    for (std::size_t k = 1; k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) throw DataError(fmt::format("invalid UTF-8 continuation at offset {}", i + k));
      cp = (cp << 6) | (b & 0x3F);
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string encode(std::u32string_view cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t cp : cps) append_utf8(out, cp);
  return out;
}

std::size_t codepoint_count(std::string_view s) {
  std::size_t n = 0;
  for (char c : s) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

bool is_space(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_line_break(char32_t cp) {
  return (cp >= 0x0A && cp <= 0x0D) || cp == 0x85 || cp == 0x2028 || cp == 0x2029;
}

Segmented segment(std::string_view s) {
  Segmented seg;
  const std::u32string cps = decode(s);
  std::string* gap = &seg.leading;
  std::size_t i = 0;
  while (i < cps.size()) {
    if (is_space(cps[i])) {
      append_utf8(*gap, cps[i]);
      ++i;
      continue;
    }
    std::string word;
    while (i < cps.size() && !is_space(cps[i])) append_utf8(word, cps[i++]);
    seg.words.push_back(std::move(word));
    seg.gaps.emplace_back();
    gap = &seg.gaps.back();
  }
  return seg;
}

std::string Segmented::str() const {
  std::string out = leading;
  for (std::size_t i = 0; i < words.size(); ++i) {
    out += words[i];
    out += gaps[i];
  }
  return out;
}

std::vector<std::string> split_words(std::string_view s) { return segment(s).words; }

std::string join(const std::vector<std::string>& words, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += sep;
    out += words[i];
  }
  return out;
}

bool ends_sentence(std::string_view word) {
  if (word.empty()) return false;
  const char last = word.back();
  return last == '.' || last == '!' || last == '?';
}

std::vector<SentenceRange> sentences(const Segmented& seg) {
  std::vector<SentenceRange> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < seg.words.size(); ++i) {
    if (ends_sentence(seg.words[i])) {
      out.push_back({start, i + 1});
      start = i + 1;
    }
  }
  if (start < seg.words.size()) out.push_back({start, seg.words.size()});
  return out;
}

bool is_ascii_alpha(char32_t cp) { return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z'); }

WordParts split_affixes(std::string_view word) {
  std::size_t b = 0;
  while (b < word.size() && !is_ascii_alpha(static_cast<unsigned char>(word[b]))) ++b;
  std::size_t e = word.size();
  while (e > b && !is_ascii_alpha(static_cast<unsigned char>(word[e - 1]))) --e;
  return {word.substr(0, b), word.substr(b, e - b), word.substr(e)};
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace mgt::text
