#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mgt/sweep.hpp"
#include "mgt/watermark.hpp"

namespace mgt::commands {

struct RunConfig {
  std::filesystem::path train = std::filesystem::path(MGT_DATA_DIR) / "news_train.jsonl";
  std::filesystem::path test = std::filesystem::path(MGT_DATA_DIR) / "news_test.jsonl";
  std::filesystem::path model;  // n-gram dump; trained from `train` when empty
  std::filesystem::path dictionary = std::filesystem::path(MGT_DATA_DIR) / "synonyms.tsv";
  std::filesystem::path homoglyphs;  // builtin table when empty
  std::filesystem::path out = "out";
  int order = 3;
  double alpha = 1e-3;
  std::size_t max_docs = 0;  // 0 = every human-written test document

  std::string backend_cmd;  // builtin backend when empty
  std::string paraphraser = "toy";

  std::vector<std::string> attacks;
  std::vector<std::string> detectors;

  bool watermark = false;  // also generate the watermarked set
  watermark::WatermarkConfig wm;

  std::string cogen = "none";  // generate: none, typo or emoji
  double emoji_probability = 0.5;

  bool fused = false;
  std::string plot_metric = "edit_distance";
  std::string patch_attack = "typo_mixed=0.1";
  std::vector<std::string> patch_detectors = {"detectgpt-10d"};
  std::filesystem::path cells;  // leaderboard input; <out>/cells.csv when empty

  sweep::Settings settings;
};

std::vector<std::string> default_attacks();
std::vector<std::string> default_detectors();

/// Rejects unknown attacks, detectors and malformed values early.
void validate(const RunConfig& config);

void cmd_generate(const RunConfig& config, std::ostream& log);
void cmd_attack(const RunConfig& config, std::ostream& log);
void cmd_detect(const RunConfig& config, std::ostream& log);
void cmd_eval(const RunConfig& config, std::ostream& log);
void cmd_patch_compare(const RunConfig& config, std::ostream& log);
void cmd_leaderboard(const RunConfig& config, std::ostream& out, std::ostream& log);
void cmd_serve(const RunConfig& config, std::istream& in, std::ostream& out);
/// Records the transcript from the builtin backend, or checks the configured
/// backend against it. Returns the number of mismatches.
std::size_t cmd_conformance(const RunConfig& config, const std::filesystem::path& transcript, bool record_mode,
                            bool strict, std::ostream& log);

}  // namespace mgt::commands
