#include "mgt/budget.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "mgt/error.hpp"
#include "mgt/text.hpp"

namespace mgt::budget {

Accounting parse_accounting(std::string_view s) {
  if (s == "codepoint") return Accounting::codepoint;
  if (s == "byte") return Accounting::byte;
  throw UsageError(fmt::format("unknown accounting '{}' (expected codepoint or byte)", s));
}

std::string_view to_string(Accounting a) { return a == Accounting::byte ? "byte" : "codepoint"; }

namespace {

std::size_t width(char32_t cp, Accounting accounting) {
  return accounting == Accounting::byte && cp >= 0x80 ? 2 : 1;
}

}  // namespace

std::size_t edit_distance(std::u32string_view a, std::u32string_view b, Accounting accounting) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  prev[0] = 0;
  for (std::size_t j = 0; j < b.size(); ++j) prev[j + 1] = prev[j] + width(b[j], accounting);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t wa = width(a[i], accounting);
    cur[0] = prev[0] + wa;
    for (std::size_t j = 0; j < b.size(); ++j) {
      const std::size_t wb = width(b[j], accounting);
      const std::size_t sub = a[i] == b[j] ? 0 : std::max(wa, wb);
      cur[j + 1] = std::min({prev[j] + sub, prev[j + 1] + wa, cur[j] + wb});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::size_t edit_distance(std::string_view a, std::string_view b, Accounting accounting) {
  return edit_distance(text::decode(a), text::decode(b), accounting);
}

double jaro(std::u32string_view a, std::u32string_view b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  const std::size_t longest = std::max(a.size(), b.size());
  const std::size_t window = longest / 2 > 0 ? longest / 2 - 1 : 0;
  std::vector<bool> a_hit(a.size(), false);
  std::vector<bool> b_hit(b.size(), false);
  std::size_t m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t lo = i > window ? i - window : 0;
    const std::size_t hi = std::min(b.size(), i + window + 1);
    for (std::size_t j = lo; j < hi; ++j) {
      if (b_hit[j] || a[i] != b[j]) continue;
      a_hit[i] = b_hit[j] = true;
      ++m;
      break;
    }
  }
  if (m == 0) return 0.0;
  std::size_t half_transpositions = 0;
  std::size_t k = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a_hit[i]) continue;
    while (!b_hit[k]) ++k;
    if (a[i] != b[k]) ++half_transpositions;
    ++k;
  }
  const double md = static_cast<double>(m);
  const double t = static_cast<double>(half_transpositions / 2);
  return (md / static_cast<double>(a.size()) + md / static_cast<double>(b.size()) + (md - t) / md) / 3.0;
}

double jaro(std::string_view a, std::string_view b) { return jaro(text::decode(a), text::decode(b)); }

namespace {

std::map<std::u32string, double> grams(std::u32string_view s, std::size_t n) {
  std::map<std::u32string, double> out;
  if (s.empty()) return out;
  if (s.size() < n) {
    out[std::u32string(s)] = 1.0;
    return out;
  }
  for (std::size_t i = 0; i + n <= s.size(); ++i) out[std::u32string(s.substr(i, n))] += 1.0;
  return out;
}

}  // namespace

double ngram_cosine(std::string_view a, std::string_view b, std::size_t n) {
  if (n == 0) throw UsageError("n-gram size must be at least 1");
  const auto ga = grams(text::decode(a), n);
  const auto gb = grams(text::decode(b), n);
  if (ga.empty() && gb.empty()) return 1.0;
  if (ga.empty() || gb.empty()) return 0.0;
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (const auto& [g, c] : ga) {
    na += c * c;
    auto it = gb.find(g);
    if (it != gb.end()) dot += c * it->second;
  }
  for (const auto& [g, c] : gb) nb += c * c;
  return std::clamp(dot / std::sqrt(na * nb), 0.0, 1.0);
}

double perplexity(std::span<const double> logprobs) {
  if (logprobs.empty()) throw DataError("perplexity of an empty token sequence");
  const double mean = std::accumulate(logprobs.begin(), logprobs.end(), 0.0) / static_cast<double>(logprobs.size());
  return std::exp(-mean);
}

BudgetReport measure(std::string_view original, std::string_view attacked, Accounting accounting) {
  const auto a = text::decode(original);
  const auto b = text::decode(attacked);
  BudgetReport r;
  r.accounting = accounting;
  r.edit_distance = edit_distance(a, b, accounting);
  r.jaro = jaro(a, b);
  r.ngram_cosine = ngram_cosine(original, attacked);
  return r;
}

}  // namespace mgt::budget
