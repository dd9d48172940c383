#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mgt/rng.hpp"

namespace mgt::toylm {

using TokenId = std::uint32_t;

inline constexpr std::string_view kBos = "<bos>";
inline constexpr std::string_view kEos = "<eos>";
inline constexpr std::string_view kUnk = "<unk>";

/// Whitespace tokenizer. Line-break characters are kept as tokens of their
/// own so that layout edits stay visible to the model.
std::vector<std::string> tokenize(std::string_view text);
std::string detokenize(const std::vector<std::string>& tokens);

class Vocabulary {
 public:
  Vocabulary() = default;
  /// Sorts and deduplicates `tokens`; reserved tokens are always added.
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  bool contains(std::string_view token) const;
  /// Id of `token`, or the id of <unk> when it is out of vocabulary.
  TokenId id(std::string_view token) const;
  std::vector<TokenId> ids(const std::vector<std::string>& tokens) const;

  TokenId bos() const { return bos_; }
  TokenId eos() const { return eos_; }
  TokenId unk() const { return unk_; }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
  TokenId bos_ = 0;
  TokenId eos_ = 0;
  TokenId unk_ = 0;
};

struct TokenScore {
  std::string token;
  double logprob = 0.0;
  std::uint64_t rank = 1;
  double entropy = 0.0;

  bool operator==(const TokenScore&) const = default;
};

struct ScoreResult {
  std::vector<TokenScore> tokens;
  bool flagged = false;  // text shorter than the model order
};

struct SamplingConfig {
  double temperature = 1.0;
  double top_p = 0.96;
  std::size_t max_tokens = 200;
  std::size_t min_tokens = 0;  // <eos> is masked until this many tokens were sampled

  void validate() const;
};

/// Passed to the step hook right after a token is sampled. The hook may
/// rewrite `token` and append `extra` tokens; both enter the context.
struct StepEvent {
  std::size_t step = 0;
  std::string token;
  std::vector<std::string> extra;
};
using StepHook = std::function<void(StepEvent&)>;

/// Called with the generation history (prompt ids followed by emitted ids)
/// and the next-token log-probabilities, before masking and temperature.
using LogitsHook = std::function<void(std::span<const TokenId> history, std::span<double> logits)>;

struct GenerateOptions {
  SamplingConfig sampling;
  std::uint64_t seed = 0;
  StepHook step_hook;
  LogitsHook logits_hook;
  /// When false, tokens appended by the step hook feed the model context but
  /// are left out of the history handed to the logits hook.
  bool extras_in_hook_history = true;
};

struct GenerationResult {
  std::string text;  // continuation only
  std::vector<std::string> tokens;
  std::size_t sampled = 0;
  bool flagged = false;  // prompt had no in-vocabulary token
};

/// Softmax of `logits / temperature`. Entries equal to -inf get zero mass.
std::vector<double> softmax(std::span<const double> logits, double temperature = 1.0);

/// Word-level n-gram model with additive smoothing. Contexts never seen in
/// training back off to their longest observed suffix, so every
/// conditional distribution is a proper smoothed distribution.
class NGramModel {
 public:
  /// Per-context counts with entries sorted by token id.
  struct Counts {
    std::vector<TokenId> ids;
    std::vector<std::uint32_t> counts;
    std::uint64_t total = 0;

    std::uint32_t count(TokenId id) const;
  };

  static NGramModel train(const std::vector<std::vector<std::string>>& corpus, int order, double alpha);
  static NGramModel train_texts(const std::vector<std::string>& texts, int order, double alpha);

  int order() const { return order_; }
  double alpha() const { return alpha_; }
  const Vocabulary& vocab() const { return vocab_; }

  /// Counts used for the next token after `history`, after backoff.
  const Counts& resolve(std::span<const TokenId> history) const;
  double prob(std::span<const TokenId> history, TokenId token) const;
  double logprob(std::span<const TokenId> history, TokenId token) const;
  /// Log-probabilities over the full vocabulary.
  void log_probs(std::span<const TokenId> history, std::vector<double>& out) const;
  double entropy(std::span<const TokenId> history) const;
  std::uint64_t rank(std::span<const TokenId> history, TokenId token) const;

  ScoreResult score(std::string_view text) const;
  /// Log-probabilities of ids[i] for i >= order-1; the cheap path used by DetectGPT.
  std::vector<double> token_logprobs(std::span<const TokenId> ids) const;

  /// Draws one token from the history's distribution (temperature 1, no
  /// truncation), never returning <bos>, <eos> or <unk>.
  TokenId sample_fill(std::span<const TokenId> history, Rng& rng) const;

  GenerationResult generate(std::string_view prompt, const GenerateOptions& options) const;

  /// Resamples every id inside the half-open spans, left to right, each
  /// conditioned on the already-filled left context.
  std::vector<TokenId> mask_fill_ids(std::vector<TokenId> ids,
                                     const std::vector<std::pair<std::size_t, std::size_t>>& spans,
                                     std::uint64_t seed) const;
  /// Text-level fill over whitespace words; the whitespace layout is kept.
  std::string mask_fill(std::string_view text, const std::vector<std::pair<std::size_t, std::size_t>>& spans,
                        std::uint64_t seed) const;

  void save(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;
  static NGramModel load(std::istream& in);
  static NGramModel load(const std::filesystem::path& path);

  /// Full-order n-gram counts (left-padded with <bos>), sorted.
  const std::vector<std::pair<std::vector<TokenId>, std::uint32_t>>& ngrams() const { return ngrams_; }

 private:
  NGramModel() = default;
  void build_tables();
  static std::string key(std::span<const TokenId> context);

  int order_ = 3;
  double alpha_ = 1.0;
  Vocabulary vocab_;
  std::vector<std::pair<std::vector<TokenId>, std::uint32_t>> ngrams_;
  std::unordered_map<std::string, Counts> table_;
};

/// Validates that spans are non-empty, disjoint and inside [0, n).
void check_spans(const std::vector<std::pair<std::size_t, std::size_t>>& spans, std::size_t n);

/// Places up to `count` disjoint spans of `span_len` positions, each made of
/// eligible positions only, by repeated uniform choice among the remaining
/// admissible starts. Returned sorted by start.
std::vector<std::pair<std::size_t, std::size_t>> choose_spans(const std::vector<bool>& eligible, std::size_t count,
                                                              std::size_t span_len, Rng& rng);

}  // namespace mgt::toylm
