#include "mgt/attacks_edit.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <vector>

#include "mgt/error.hpp"
#include "mgt/text.hpp"

namespace mgt::attacks {

namespace {

struct KindName {
  EditKind kind;
  std::string_view name;
};

constexpr std::array<KindName, 8> kKindNames{{
    {EditKind::typo_insert, "typo_insert"},
    {EditKind::typo_delete, "typo_delete"},
    {EditKind::typo_substitute, "typo_substitute"},
    {EditKind::typo_transpose, "typo_transpose"},
    {EditKind::typo_mixed, "typo_mixed"},
    {EditKind::homoglyph, "homoglyph"},
    {EditKind::format_zws, "format_zws"},
    {EditKind::format_shift, "format_shift"},
}};

// a..z, percent of letters in English text.
constexpr std::array<double, 26> kLetterFrequency{
    8.17, 1.29, 2.78, 4.25, 12.70, 2.23, 2.02, 6.09, 6.97, 0.15, 0.77, 4.03, 2.41,
    6.75, 7.51, 1.93, 0.10, 5.99, 6.33, 9.06, 2.76, 0.98, 2.36, 0.15, 1.97, 0.07,
};

constexpr std::array<std::string_view, 3> kRows{"qwertyuiop", "asdfghjkl", "zxcvbnm"};

std::array<std::string, 26> build_neighbors() {
  std::array<std::string, 26> out;
  for (int r = 0; r < 3; ++r) {
    const auto row = kRows[static_cast<std::size_t>(r)];
    for (int c = 0; c < static_cast<int>(row.size()); ++c) {
      std::string& n = out[static_cast<std::size_t>(row[static_cast<std::size_t>(c)] - 'a')];
      auto add = [&n](int rr, int cc) {
        if (rr < 0 || rr > 2) return;
        const auto other = kRows[static_cast<std::size_t>(rr)];
        if (cc < 0 || cc >= static_cast<int>(other.size())) return;
        n.push_back(other[static_cast<std::size_t>(cc)]);
      };
      add(r, c - 1);
      add(r, c + 1);
      add(r - 1, c);
      add(r - 1, c + 1);
      add(r + 1, c - 1);
      add(r + 1, c);
    }
  }
  return out;
}

// Mixture weights in the order substitute, insert, transpose, delete.
constexpr std::array<double, 4> kMixture{0.556, 0.203, 0.011, 0.230};
constexpr std::array<EditKind, 4> kMixtureKinds{EditKind::typo_substitute, EditKind::typo_insert,
                                                EditKind::typo_transpose, EditKind::typo_delete};

bool ascii_upper(char32_t c) { return c >= 'A' && c <= 'Z'; }
char32_t to_lower(char32_t c) { return ascii_upper(c) ? c + 32 : c; }
char32_t with_case_of(char32_t c, char32_t model) { return ascii_upper(model) ? c - 32 : c; }

char32_t neighbor_of(char32_t c, Rng& rng) {
  const auto options = qwerty_neighbors(static_cast<char>(to_lower(c)));
  const char32_t pick = static_cast<unsigned char>(options[rng.below(options.size())]);
  return with_case_of(pick, c);
}

// Position weights over the word; non-letters never receive a typo.
std::vector<double> position_weights(const std::u32string& w, bool weighted) {
  std::vector<double> out(w.size(), 0.0);
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!text::is_ascii_alpha(w[i])) continue;
    out[i] = weighted ? letter_frequency(w[i]) : 1.0;
  }
  return out;
}

bool applicable(EditKind kind, const std::u32string& w) {
  bool any_letter = false;
  for (char32_t c : w) any_letter = any_letter || text::is_ascii_alpha(c);
  if (!any_letter) return false;
  if (kind == EditKind::typo_delete) return w.size() >= 2;
  if (kind == EditKind::typo_transpose) {
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      if (text::is_ascii_alpha(w[i]) && text::is_ascii_alpha(w[i + 1]) && w[i] != w[i + 1]) return true;
    }
    return false;
  }
  return true;
}

void apply_typo(EditKind kind, std::u32string& w, bool weighted, Rng& rng) {
  auto weights = position_weights(w, weighted);
  if (kind == EditKind::typo_transpose) {
    // The swapped pair starts at the chosen letter.
    for (std::size_t i = 0; i < w.size(); ++i) {
      const bool ok = i + 1 < w.size() && text::is_ascii_alpha(w[i + 1]) && w[i] != w[i + 1];
      if (!ok) weights[i] = 0.0;
    }
  }
  const std::size_t pos = rng.weighted(weights);
  switch (kind) {
    case EditKind::typo_substitute:
      w[pos] = neighbor_of(w[pos], rng);
      break;
    case EditKind::typo_insert:
      w.insert(w.begin() + static_cast<std::ptrdiff_t>(pos) + 1, neighbor_of(w[pos], rng));
      break;
    case EditKind::typo_delete:
      w.erase(w.begin() + static_cast<std::ptrdiff_t>(pos));
      break;
    case EditKind::typo_transpose:
      std::swap(w[pos], w[pos + 1]);
      break;
    default:
      throw UsageError("not a single typo kind");
  }
}

}  // namespace

EditKind parse_edit_kind(std::string_view s) {
  for (const auto& k : kKindNames) {
    if (k.name == s) return k.kind;
  }
  throw UsageError(fmt::format("unknown edit attack '{}'", s));
}

std::string_view to_string(EditKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.name;
  }
  return "?";
}

bool is_typo(EditKind kind) {
  switch (kind) {
    case EditKind::typo_insert:
    case EditKind::typo_delete:
    case EditKind::typo_substitute:
    case EditKind::typo_transpose:
    case EditKind::typo_mixed:
      return true;
    default:
      return false;
  }
}

void EditAttackConfig::validate() const {
  if (!(per_word_probability >= 0.0 && per_word_probability <= 1.0)) {
    throw UsageError(fmt::format("per-word probability {} is outside [0, 1]", per_word_probability));
  }
}

double letter_frequency(char32_t cp) {
  const char32_t c = to_lower(cp);
  if (c < 'a' || c > 'z') return 0.0;
  return kLetterFrequency[c - 'a'];
}

std::string_view qwerty_neighbors(char c) {
  static const auto table = build_neighbors();
  if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
  if (c < 'a' || c > 'z') return {};
  return table[static_cast<std::size_t>(c - 'a')];
}

EditKind draw_typo_kind(Rng& rng) { return kMixtureKinds[rng.weighted(kMixture)]; }

HomoglyphTable::HomoglyphTable(std::map<char32_t, char32_t> mapping) : mapping_(std::move(mapping)) {
  for (const auto& [from, to] : mapping_) {
    if (from == to) throw DataError(fmt::format("homoglyph for U+{:04X} maps to itself", static_cast<std::uint32_t>(from)));
    if (!inverse_.emplace(to, from).second) {
      throw DataError(fmt::format("homoglyph U+{:04X} is used twice", static_cast<std::uint32_t>(to)));
    }
    if (mapping_.count(to)) {
      throw DataError(fmt::format("homoglyph U+{:04X} is also a source", static_cast<std::uint32_t>(to)));
    }
  }
}

const HomoglyphTable& HomoglyphTable::builtin() {
  static const HomoglyphTable table(std::map<char32_t, char32_t>{
      {U'a', U'\u0430'}, {U'b', U'\u0184'}, {U'c', U'\u0441'}, {U'd', U'\u0501'}, {U'e', U'\u0435'},
      {U'f', U'\u0192'}, {U'g', U'\u0261'}, {U'h', U'\u04BB'}, {U'i', U'\u0456'}, {U'j', U'\u0458'},
      {U'k', U'\u03BA'}, {U'l', U'\u04CF'}, {U'm', U'\u217F'}, {U'n', U'\u0578'}, {U'o', U'\u043E'},
      {U'p', U'\u0440'}, {U'q', U'\u051B'}, {U'r', U'\u0433'}, {U's', U'\u0455'}, {U't', U'\u03C4'},
      {U'u', U'\u057D'}, {U'v', U'\u03BD'}, {U'w', U'\u051D'}, {U'x', U'\u0445'}, {U'y', U'\u0443'},
      {U'z', U'\u1D22'}, {U'A', U'\u0410'}, {U'B', U'\u0412'}, {U'C', U'\u0421'}, {U'D', U'\u13A0'},
      {U'E', U'\u0415'}, {U'F', U'\u03DC'}, {U'G', U'\u050C'}, {U'H', U'\u041D'}, {U'I', U'\u0406'},
      {U'J', U'\u0408'}, {U'K', U'\u041A'}, {U'L', U'\u13DE'}, {U'M', U'\u041C'}, {U'N', U'\u039D'},
      {U'O', U'\u041E'}, {U'P', U'\u0420'}, {U'Q', U'\u051A'}, {U'R', U'\u13A1'}, {U'S', U'\u0405'},
      {U'T', U'\u0422'}, {U'U', U'\u054D'}, {U'V', U'\u0474'}, {U'W', U'\u051C'}, {U'X', U'\u0425'},
      {U'Y', U'\u04AE'}, {U'Z', U'\u0396'},
  });
  return table;
}

HomoglyphTable HomoglyphTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open homoglyph table '{}'", path.string()));
  std::map<char32_t, char32_t> mapping;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(fmt::format("{}:{}: expected a tab", path.string(), line_no));
    const auto from = text::decode(std::string_view(line).substr(0, tab));
    const auto to = text::decode(std::string_view(line).substr(tab + 1));
    if (from.size() != 1 || to.size() != 1) {
      throw DataError(fmt::format("{}:{}: each side must be one codepoint", path.string(), line_no));
    }
    if (!mapping.emplace(from[0], to[0]).second) {
      throw DataError(fmt::format("{}:{}: duplicate source", path.string(), line_no));
    }
  }
  return HomoglyphTable(std::move(mapping));
}

std::string HomoglyphTable::restore(std::string_view s) const {
  auto cps = text::decode(s);
  for (auto& cp : cps) {
    auto it = inverse_.find(cp);
    if (it != inverse_.end()) cp = it->second;
  }
  return text::encode(cps);
}

namespace {

// One typo of `kind` (a mixture draw for typo_mixed) inside `w`; false when
// no applicable kind exists.
bool typo_word(std::u32string& w, EditKind kind, bool weighted, Rng& rng) {
  if (kind == EditKind::typo_mixed) {
    bool any = false;
    for (EditKind k : kMixtureKinds) any = any || applicable(k, w);
    if (!any) return false;
    do {
      kind = draw_typo_kind(rng);
    } while (!applicable(kind, w));
  }
  if (!applicable(kind, w)) return false;
  apply_typo(kind, w, weighted, rng);
  return true;
}

bool typo_applicable(EditKind kind, const std::u32string& w) {
  if (kind != EditKind::typo_mixed) return applicable(kind, w);
  for (EditKind k : kMixtureKinds) {
    if (applicable(k, w)) return true;
  }
  return false;
}

}  // namespace

EditResult apply_typo_attack(std::string_view s, const EditAttackConfig& config) {
  config.validate();
  if (!is_typo(config.kind)) throw UsageError(fmt::format("'{}' is not a typo attack", to_string(config.kind)));
  auto seg = text::segment(s);
  Rng rng(config.seed);
  EditResult r;
  for (auto& word : seg.words) {
    if (!rng.bernoulli(config.per_word_probability)) continue;
    auto w = text::decode(word);
    if (!typo_word(w, config.kind, config.letter_frequency_weighting, rng)) {
      ++r.skipped;
      continue;
    }
    word = text::encode(w);
    ++r.count;
  }
  r.text = seg.str();
  return r;
}

EditResult apply_typo_count(std::string_view s, EditKind kind, std::size_t n_edits, std::uint64_t seed,
                            bool letter_frequency_weighting) {
  if (!is_typo(kind)) throw UsageError(fmt::format("'{}' is not a typo attack", to_string(kind)));
  auto seg = text::segment(s);
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < seg.words.size(); ++i) {
    if (typo_applicable(kind, text::decode(seg.words[i]))) eligible.push_back(i);
  }
  Rng rng(seed);
  const std::size_t n = std::min(n_edits, eligible.size());
  for (std::size_t i = 0; i < n; ++i) std::swap(eligible[i], eligible[i + rng.below(eligible.size() - i)]);
  eligible.resize(n);
  std::sort(eligible.begin(), eligible.end());
  EditResult r;
  r.skipped = n_edits - n;
  for (std::size_t i : eligible) {
    auto w = text::decode(seg.words[i]);
    typo_word(w, kind, letter_frequency_weighting, rng);
    seg.words[i] = text::encode(w);
    ++r.count;
  }
  r.text = seg.str();
  return r;
}

EditResult apply_homoglyph_attack(std::string_view s, const EditAttackConfig& config, const HomoglyphTable& table) {
  config.validate();
  if (config.kind != EditKind::homoglyph) throw UsageError("config is not a homoglyph attack");
  auto seg = text::segment(s);
  Rng rng(config.seed);
  EditResult r;
  for (auto& word : seg.words) {
    if (!rng.bernoulli(config.per_word_probability)) continue;
    auto w = text::decode(word);
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (table.covers(w[i])) candidates.push_back(i);
    }
    if (candidates.empty()) {
      ++r.skipped;
      continue;
    }
    const std::size_t pos = candidates[rng.below(candidates.size())];
    w[pos] = table.at(w[pos]);
    word = text::encode(w);
    ++r.count;
  }
  r.text = seg.str();
  return r;
}

EditResult apply_format_attack(std::string_view s, const EditAttackConfig& config) {
  config.validate();
  static constexpr std::array<std::string_view, 3> kShift{"\n", "\r", "\v"};
  auto seg = text::segment(s);
  Rng rng(config.seed);
  EditResult r;
  if (config.kind == EditKind::format_zws) {
    for (std::size_t i = 0; i + 1 < seg.words.size(); ++i) {
      if (!rng.bernoulli(config.per_word_probability)) continue;
      seg.words[i] += "\u200B";
      ++r.count;
    }
  } else if (config.kind == EditKind::format_shift) {
    for (auto& word : seg.words) {
      if (!text::ends_sentence(word)) continue;
      if (!rng.bernoulli(config.per_word_probability)) continue;
      word += kShift[rng.below(kShift.size())];
      ++r.count;
    }
  } else {
    throw UsageError(fmt::format("'{}' is not a format attack", to_string(config.kind)));
  }
  r.text = seg.str();
  return r;
}

EditResult apply_edit_attack(std::string_view s, const EditAttackConfig& config, const HomoglyphTable& table) {
  if (is_typo(config.kind)) return apply_typo_attack(s, config);
  if (config.kind == EditKind::homoglyph) return apply_homoglyph_attack(s, config, table);
  return apply_format_attack(s, config);
}

std::string strip_zero_width(std::string_view s) {
  auto cps = text::decode(s);
  std::erase(cps, U'\u200B');
  return text::encode(cps);
}

}  // namespace mgt::attacks
