#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace mgt::budget {

/// codepoint: every codepoint edit costs 1. byte: ASCII codepoints weigh 1
/// and any other codepoint weighs 2, so inserting U+200B costs 2.
enum class Accounting { codepoint, byte };

Accounting parse_accounting(std::string_view s);
std::string_view to_string(Accounting a);

std::size_t edit_distance(std::u32string_view a, std::u32string_view b, Accounting accounting = Accounting::codepoint);
std::size_t edit_distance(std::string_view a, std::string_view b, Accounting accounting = Accounting::codepoint);

double jaro(std::u32string_view a, std::u32string_view b);
double jaro(std::string_view a, std::string_view b);

/// Cosine similarity of character n-gram count vectors. A non-empty text
/// shorter than n contributes itself as a single gram.
double ngram_cosine(std::string_view a, std::string_view b, std::size_t n = 3);

/// exp(-mean log-probability). Throws on an empty sequence.
double perplexity(std::span<const double> logprobs);

struct BudgetReport {
  std::size_t edit_distance = 0;
  double jaro = 1.0;
  double ngram_cosine = 1.0;
  std::optional<double> perplexity;
  Accounting accounting = Accounting::codepoint;
};

BudgetReport measure(std::string_view original, std::string_view attacked, Accounting accounting);

}  // namespace mgt::budget
