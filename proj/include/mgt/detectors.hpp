#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mgt/toylm.hpp"

namespace mgt::detectors {

// Every score here has machine-positive polarity: higher means more
// machine-like.

double gltr(std::span<const toylm::TokenScore> scores);
double rank_detector(std::span<const toylm::TokenScore> scores);
double logrank_detector(std::span<const toylm::TokenScore> scores);
double entropy_detector(std::span<const toylm::TokenScore> scores);

enum class GptMode { d, z };

struct DetectGptConfig {
  std::size_t n_perturbations = 10;
  GptMode mode = GptMode::d;
  double mask_ratio = 0.15;
  std::size_t span_len = 2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PatchConfig {
  double k_percent = 0.05;  // fraction in [0, 0.5]

  void validate() const;
};

inline constexpr double kStdevFloor = 1e-6;

/// Score from the original's mean log-probability and those of the
/// perturbations. z mode divides by the sample standard deviation.
double detect_gpt_statistic(double original, std::span<const double> perturbed, GptMode mode);

/// Positions (into the scored suffix) excluded by the patch: the
/// ceil(k * m) lowest log-probabilities, ties broken by position.
std::vector<bool> patch_mask(std::span<const double> logprobs, double k_percent);

double detect_gpt(std::string_view text, const toylm::NGramModel& model, const DetectGptConfig& config,
                  const std::optional<PatchConfig>& patch = std::nullopt);

enum class Family { gltr, rank, logrank, entropy, detectgpt, watermark };

/// Parsed detector name. Accepted forms: gltr, rank, logrank, entropy,
/// watermark, detectgpt-<N><d|z> with an optional "+patch" suffix.
struct DetectorSpec {
  Family family = Family::gltr;
  std::size_t n_perturbations = 10;
  GptMode mode = GptMode::d;
  bool patched = false;

  static DetectorSpec parse(std::string_view name);
  std::string name() const;
  bool metric() const { return family != Family::detectgpt && family != Family::watermark; }
};

/// Metric detector score from one score response.
double metric_score(const DetectorSpec& spec, const toylm::ScoreResult& scores);

enum class Polarity { higher_is_machine, lower_is_machine };

struct ExternalScores {
  std::string detector;
  Polarity polarity = Polarity::higher_is_machine;
  std::map<std::string, double> scores;  // machine-positive after ingestion
};

/// Reads "# detector=<name> polarity=<...>" followed by "doc_id<TAB>score"
/// lines. Scores declared lower_is_machine are negated. When `known_ids` is
/// given, any other id is an error.
ExternalScores ingest_external_scores(const std::filesystem::path& path,
                                      const std::set<std::string>* known_ids = nullptr);
void write_scores(const std::filesystem::path& path, std::string_view detector,
                  const std::vector<std::pair<std::string, double>>& scores);

}  // namespace mgt::detectors
