#include "mgt/watermark.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mgt/error.hpp"
#include "mgt/rng.hpp"

namespace mgt::watermark {

Seeding parse_seeding(std::string_view s) {
  if (s == "prev_token") return Seeding::prev_token;
  if (s == "self_hash") return Seeding::self_hash;
  throw UsageError(fmt::format("unknown watermark seeding '{}'", s));
}

std::string_view to_string(Seeding s) { return s == Seeding::prev_token ? "prev_token" : "self_hash"; }

void WatermarkConfig::validate(std::size_t vocab_size) const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw UsageError(fmt::format("gamma {} is outside (0, 1)", gamma));
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw UsageError("delta must be a non-negative number");
  if (seeding == Seeding::self_hash && window < 1) throw UsageError("self_hash window must be at least 1");
  if (std::floor(gamma * static_cast<double>(vocab_size)) < 1.0) {
    throw UsageError(fmt::format("gamma {} leaves an empty green list for {} tokens", gamma, vocab_size));
  }
}

GreenList::GreenList(const WatermarkConfig& config, std::size_t vocab_size)
    : config_(config), vocab_size_(vocab_size) {
  config_.validate(vocab_size);
  green_size_ = static_cast<std::size_t>(std::floor(config_.gamma * static_cast<double>(vocab_size)));
  unsigned bits = 2;
  while ((std::uint64_t{1} << bits) < vocab_size) ++bits;
  half_bits_ = (bits + 1) / 2;
}

std::uint64_t GreenList::permute(std::uint64_t seed, std::uint64_t token) const {
  const std::uint64_t mask = (std::uint64_t{1} << half_bits_) - 1;
  std::uint64_t x = token;
  // Cycle-walking keeps the image inside [0, V) while staying a bijection.
  do {
    std::uint64_t l = x >> half_bits_;
    std::uint64_t r = x & mask;
    for (std::uint64_t round = 0; round < 4; ++round) {
      const std::uint64_t f = mix64(seed ^ mix64(r + (round << 56))) & mask;
      const std::uint64_t nl = r;
      r = l ^ f;
      l = nl;
    }
    x = (l << half_bits_) | r;
  } while (x >= vocab_size_);
  return x;
}

std::uint64_t GreenList::token_hash(toylm::TokenId t) const { return mix64(config_.key ^ mix64(t + 0x5bd1e995ULL)); }

bool GreenList::is_green(std::span<const toylm::TokenId> context, toylm::TokenId token) const {
  if (config_.seeding == Seeding::prev_token) {
    const toylm::TokenId prev = context.empty() ? 0 : context.back();
    return is_green_for_seed(mix64(config_.key + token_hash(prev)), token);
  }
  std::uint64_t m = token_hash(token);
  const std::size_t w = std::min(context.size(), config_.window - 1);
  for (std::size_t i = context.size() - w; i < context.size(); ++i) m = std::min(m, token_hash(context[i]));
  return is_green_for_seed(mix64(config_.key + m), token);
}

void GreenList::bias(std::span<const toylm::TokenId> history, std::span<double> logits) const {
  if (config_.delta == 0.0) return;
  if (config_.seeding == Seeding::prev_token) {
    const toylm::TokenId prev = history.empty() ? 0 : history.back();
    const std::uint64_t seed = mix64(config_.key + token_hash(prev));
    for (std::size_t v = 0; v < logits.size(); ++v) {
      if (is_green_for_seed(seed, static_cast<toylm::TokenId>(v))) logits[v] += config_.delta;
    }
    return;
  }
  std::uint64_t m_ctx = ~std::uint64_t{0};
  const std::size_t w = std::min(history.size(), config_.window - 1);
  for (std::size_t i = history.size() - w; i < history.size(); ++i) m_ctx = std::min(m_ctx, token_hash(history[i]));
  const std::uint64_t shared = mix64(config_.key + m_ctx);
  for (std::size_t v = 0; v < logits.size(); ++v) {
    const std::uint64_t h = token_hash(static_cast<toylm::TokenId>(v));
    const std::uint64_t seed = h < m_ctx ? mix64(config_.key + h) : shared;
    if (is_green_for_seed(seed, static_cast<toylm::TokenId>(v))) logits[v] += config_.delta;
  }
}

double z_score(std::size_t T, std::size_t green_count, double gamma) {
  if (T < 2) throw DataError(fmt::format("watermark verdict needs at least 2 scored tokens, got {}", T));
  const double t = static_cast<double>(T);
  return (static_cast<double>(green_count) - gamma * t) / std::sqrt(t * gamma * (1.0 - gamma));
}

StreamState score_stream(const GreenList& greens, StreamState state, toylm::TokenId token) {
  const std::size_t width = greens.config().context_width();
  if (state.recent.size() >= width) {
    ++state.T;
    if (greens.is_green(state.recent, token)) ++state.green_count;
  }
  state.recent.push_back(token);
  if (state.recent.size() > width) state.recent.erase(state.recent.begin());
  return state;
}

Verdict finish(const GreenList& greens, const StreamState& state) {
  Verdict v;
  v.T = state.T;
  v.green_count = state.green_count;
  v.z = z_score(state.T, state.green_count, greens.config().gamma);
  v.detected = v.z >= greens.config().z_threshold;
  return v;
}

std::string StreamState::serialize() const {
  std::string out = fmt::format("{} {} {}", T, green_count, recent.size());
  for (auto id : recent) out += fmt::format(" {}", id);
  return out;
}

StreamState StreamState::deserialize(std::string_view s) {
  std::istringstream in{std::string(s)};
  StreamState st;
  std::size_t n = 0;
  if (!(in >> st.T >> st.green_count >> n) || st.green_count > st.T) throw DataError("bad watermark stream state");
  st.recent.resize(n);
  for (auto& id : st.recent) {
    if (!(in >> id)) throw DataError("bad watermark stream state");
  }
  return st;
}

Verdict detect_ids(const GreenList& greens, std::span<const toylm::TokenId> ids) {
  StreamState st;
  for (auto id : ids) st = score_stream(greens, std::move(st), id);
  return finish(greens, st);
}

Verdict detect(std::string_view text, const GreenList& greens, const toylm::Vocabulary& vocab) {
  if (vocab.size() != greens.vocab_size()) throw UsageError("watermark vocabulary size mismatch");
  const auto ids = vocab.ids(toylm::tokenize(text));
  return detect_ids(greens, ids);
}

toylm::GenerationResult generate(const toylm::NGramModel& model, std::string_view prompt, const GreenList& greens,
                                 const toylm::SamplingConfig& sampling, std::uint64_t seed, toylm::StepHook step_hook,
                                 bool extras_in_hash_chain) {
  if (model.vocab().size() != greens.vocab_size()) throw UsageError("watermark vocabulary size mismatch");
  toylm::GenerateOptions o;
  o.sampling = sampling;
  o.seed = seed;
  o.step_hook = std::move(step_hook);
  o.logits_hook = [&greens](std::span<const toylm::TokenId> h, std::span<double> logits) { greens.bias(h, logits); };
  o.extras_in_hook_history = extras_in_hash_chain;
  return model.generate(prompt, o);
}

}  // namespace mgt::watermark
