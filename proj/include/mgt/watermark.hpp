#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mgt/toylm.hpp"

namespace mgt::watermark {

enum class Seeding { prev_token, self_hash };

Seeding parse_seeding(std::string_view s);
std::string_view to_string(Seeding s);

struct WatermarkConfig {
  double gamma = 0.25;
  double delta = 4.0;
  std::uint64_t key = 0;
  double z_threshold = 4.0;
  Seeding seeding = Seeding::prev_token;
  std::size_t window = 4;  // self_hash: tokens hashed, candidate included

  void validate(std::size_t vocab_size) const;
  /// Previous tokens needed before a position can be scored.
  std::size_t context_width() const { return seeding == Seeding::prev_token ? 1 : window - 1; }
};

/// Keyed green/red partition of [0, V). The partition for a seed is a
/// keyed Feistel permutation of the ids; the green list is every id whose
/// image falls below floor(gamma * V).
class GreenList {
 public:
  GreenList(const WatermarkConfig& config, std::size_t vocab_size);

  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t green_size() const { return green_size_; }
  const WatermarkConfig& config() const { return config_; }

  /// Image of `token` under the permutation selected by `seed`.
  std::uint64_t permute(std::uint64_t seed, std::uint64_t token) const;
  bool is_green_for_seed(std::uint64_t seed, toylm::TokenId token) const {
    return permute(seed, token) < green_size_;
  }
  /// Green membership of `token` following `context` (the most recent ids,
  /// at least context_width() of them).
  bool is_green(std::span<const toylm::TokenId> context, toylm::TokenId token) const;

  /// Adds delta to every green logit; usable as a toylm logits hook.
  void bias(std::span<const toylm::TokenId> history, std::span<double> logits) const;

 private:
  std::uint64_t token_hash(toylm::TokenId t) const;

  WatermarkConfig config_;
  std::size_t vocab_size_;
  std::size_t green_size_;
  unsigned half_bits_;
};

struct Verdict {
  std::size_t T = 0;
  std::size_t green_count = 0;
  double z = 0.0;
  bool detected = false;
};

/// One-proportion z statistic. Throws when T < 2.
double z_score(std::size_t T, std::size_t green_count, double gamma);

/// Incremental detector state; folding every token reproduces detect().
struct StreamState {
  std::size_t T = 0;
  std::size_t green_count = 0;
  std::vector<toylm::TokenId> recent;

  std::string serialize() const;
  static StreamState deserialize(std::string_view s);
  bool operator==(const StreamState&) const = default;
};

StreamState score_stream(const GreenList& greens, StreamState state, toylm::TokenId token);
Verdict finish(const GreenList& greens, const StreamState& state);

Verdict detect_ids(const GreenList& greens, std::span<const toylm::TokenId> ids);
Verdict detect(std::string_view text, const GreenList& greens, const toylm::Vocabulary& vocab);

/// Watermarked generation: the green bias is installed as the logits hook.
/// `extras_in_hash_chain` decides whether tokens appended by a step hook
/// (co-generated emoji) take part in later green-list seeds.
toylm::GenerationResult generate(const toylm::NGramModel& model, std::string_view prompt, const GreenList& greens,
                                 const toylm::SamplingConfig& sampling, std::uint64_t seed,
                                 toylm::StepHook step_hook = {}, bool extras_in_hash_chain = true);

}  // namespace mgt::watermark
