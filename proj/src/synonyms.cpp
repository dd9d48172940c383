#include "mgt/synonyms.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>

#include "mgt/error.hpp"
#include "mgt/rng.hpp"
#include "mgt/text.hpp"

namespace mgt::attacks {

namespace {

constexpr std::string_view kStopWords[] = {
    // pronouns
    "all", "another", "any", "anybody", "anyone", "anything", "both", "each", "either", "everybody",
    "everyone", "everything", "few", "he", "her", "hers", "herself", "him", "himself", "his",
    "i", "it", "its", "itself", "me", "mine", "my", "myself", "neither", "nobody",
    "none", "nothing", "one", "others", "ours", "ourselves", "our", "she", "somebody", "someone",
    "something", "that", "their", "theirs", "them", "themselves", "these", "they", "this", "those",
    "us", "we", "what", "whatever", "which", "whichever", "who", "whoever", "whom", "whose",
    "you", "your", "yours", "yourself", "yourselves",
    // prepositions
    "about", "above", "across", "after", "against", "along", "amid", "among", "around", "as",
    "at", "before", "behind", "below", "beneath", "beside", "besides", "between", "beyond", "by",
    "despite", "down", "during", "except", "for", "from", "in", "inside", "into", "near",
    "of", "off", "on", "onto", "outside", "over", "past", "since", "through", "throughout",
    "to", "toward", "under", "until", "up", "upon", "with", "within", "without",
};

bool has_space(std::string_view s) {
  for (char32_t cp : text::decode(s)) {
    if (text::is_space(cp)) return true;
  }
  return false;
}

}  // namespace

SynonymDictionary::SynonymDictionary(const std::map<std::string, std::vector<std::string>>& entries) {
  for (const auto& [head, syns] : entries) {
    const std::string key = text::ascii_lower(head);
    if (key.empty() || has_space(key)) {
      ++rejected_;
      continue;
    }
    std::vector<std::string> kept;
    for (const auto& s : syns) {
      if (s.empty() || has_space(s)) {
        ++rejected_;
        continue;
      }
      const std::string low = text::ascii_lower(s);
      if (low == key || std::find(kept.begin(), kept.end(), low) != kept.end()) continue;
      kept.push_back(low);
    }
    if (!kept.empty()) {
      auto& slot = entries_[key];
      for (auto& k : kept) {
        if (std::find(slot.begin(), slot.end(), k) == slot.end()) slot.push_back(std::move(k));
      }
    }
  }
}

SynonymDictionary SynonymDictionary::parse(std::istream& in, std::string_view source) {
  std::map<std::string, std::vector<std::string>> entries;
  std::string line;
  std::size_t line_no = 0;
  std::size_t rejected = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(fmt::format("{}:{}: expected a tab", source, line_no));
    const std::string head = line.substr(0, tab);
    if (has_space(head)) {
      ++rejected;
      continue;
    }
    auto& list = entries[head];
    std::string_view rest(line);
    rest.remove_prefix(tab + 1);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      std::string item(rest.substr(0, comma));
      // Surrounding blanks are formatting; inner blanks make a multiword entry.
      const auto b = item.find_first_not_of(' ');
      const auto e = item.find_last_not_of(' ');
      item = b == std::string::npos ? std::string() : item.substr(b, e - b + 1);
      if (!item.empty()) list.push_back(std::move(item));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
  }
  SynonymDictionary d(entries);
  d.rejected_ += rejected;
  return d;
}

SynonymDictionary SynonymDictionary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open dictionary '{}'", path.string()));
  return parse(in, path.string());
}

const std::vector<std::string>* SynonymDictionary::lookup(std::string_view word) const {
  auto it = entries_.find(text::ascii_lower(word));
  return it == entries_.end() ? nullptr : &it->second;
}

std::optional<std::string> SynonymDictionary::top(std::string_view word) const {
  const auto* list = lookup(word);
  if (!list || list->empty()) return std::nullopt;
  return match_case(word, list->front());
}

bool is_stop_word(std::string_view word) {
  const std::string low = text::ascii_lower(word);
  return std::find(std::begin(kStopWords), std::end(kStopWords), low) != std::end(kStopWords);
}

std::string match_case(std::string_view source, std::string_view word) {
  std::string out(word);
  if (!source.empty() && !out.empty() && source[0] >= 'A' && source[0] <= 'Z' && out[0] >= 'a' && out[0] <= 'z') {
    out[0] = static_cast<char>(out[0] - 32);
  }
  return out;
}

SubstitutionResult substitute_synonyms(std::string_view s, double rate, std::uint64_t seed,
                                       const SynonymDictionary& dictionary, bool random_choice) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw UsageError(fmt::format("rate {} is outside [0, 1]", rate));
  auto seg = text::segment(s);
  Rng rng(seed);
  SubstitutionResult r;
  for (std::size_t i = 0; i < seg.words.size(); ++i) {
    auto& word = seg.words[i];
    const auto parts = text::split_affixes(word);
    if (parts.core.empty() || is_stop_word(parts.core)) continue;
    ++r.eligible;
    if (!rng.bernoulli(rate)) continue;
    const auto* list = dictionary.lookup(parts.core);
    if (!list) {
      ++r.skipped;
      r.missing.push_back(i);
      continue;
    }
    const std::string& pick = random_choice ? (*list)[rng.below(list->size())] : list->front();
    word = std::string(parts.prefix) + match_case(parts.core, pick) + std::string(parts.suffix);
    ++r.count;
  }
  r.text = seg.str();
  return r;
}

std::string toy_paraphrase(std::string_view s, double lex_diversity, double order_diversity, std::uint64_t seed,
                           const SynonymDictionary& dictionary, const toylm::NGramModel* rewriter) {
  const double lex = std::clamp(lex_diversity / 100.0, 0.0, 1.0);
  const double order = std::clamp(order_diversity / 100.0, 0.0, 1.0);
  auto substituted = substitute_synonyms(s, lex, derive_seed(seed, "lex"), dictionary, true);
  if (rewriter && !substituted.missing.empty()) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    for (std::size_t i : substituted.missing) spans.emplace_back(i, i + 1);
    substituted.text = rewriter->mask_fill(substituted.text, spans, derive_seed(seed, "rewrite"));
  }
  const auto seg = text::segment(substituted.text);
  std::vector<std::string> sentences;
  for (const auto& range : text::sentences(seg)) {
    std::vector<std::string> words(seg.words.begin() + static_cast<std::ptrdiff_t>(range.first),
                                   seg.words.begin() + static_cast<std::ptrdiff_t>(range.last));
    sentences.push_back(text::join(words));
  }
  Rng rng(derive_seed(seed, "order"));
  for (std::size_t i = 0; i + 1 < sentences.size(); ++i) {
    if (rng.bernoulli(order)) {
      std::swap(sentences[i], sentences[i + 1]);
      ++i;
    }
  }
  return text::join(sentences);
}

}  // namespace mgt::attacks
