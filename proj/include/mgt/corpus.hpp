#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mgt::corpus {

enum class Label { HWT, MGT };
enum class Split { train, eval, test };

std::string_view to_string(Label label);
std::string_view to_string(Split split);
Label parse_label(std::string_view s);
Split parse_split(std::string_view s);

struct Document {
  std::string id;
  std::string text;
  Label label = Label::HWT;
  std::string generator_tag;
  std::string prompt;

  bool operator==(const Document&) const = default;
};

struct Dataset {
  Split split = Split::test;
  std::vector<Document> documents;

  std::size_t count(Label label) const;
  bool balanced() const { return count(Label::HWT) == count(Label::MGT); }
  std::vector<Document> with_label(Label label) const;
};

/// Parses one JSON-lines record. `line_no` is 1-based and only used in errors.
Document parse_record(std::string_view line, std::size_t line_no);
std::string to_record(const Document& doc);

/// Loads a line-delimited dataset, validating every record and id uniqueness.
Dataset load_dataset(const std::filesystem::path& path, Split expected_split);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
void validate(const Dataset& dataset);

struct Prompt {
  std::string doc_id;
  std::string text;
  bool truncated = false;  // the source text had fewer than n_tokens words
};

/// One prompt per HWT document: its first `n_tokens` whitespace tokens joined by single spaces.
std::vector<Prompt> derive_prompts(const Dataset& dataset, std::size_t n_tokens);

/// Fraction of n-grams that repeat an earlier identical n-gram (seq-rep-n).
double repetition_score(std::string_view text, std::size_t n);

}  // namespace mgt::corpus
