#include "mgt/toylm.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "mgt/error.hpp"
#include "mgt/text.hpp"

namespace mgt::toylm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::string_view kDumpMagic = "mgtstress-ngram";
constexpr int kDumpVersion = 1;

std::vector<TokenId> padded_history(std::span<const TokenId> ids, std::size_t end, std::size_t width, TokenId bos) {
  std::vector<TokenId> h(width, bos);
  const std::size_t take = std::min(end, width);
  std::copy(ids.begin() + static_cast<std::ptrdiff_t>(end - take), ids.begin() + static_cast<std::ptrdiff_t>(end),
            h.begin() + static_cast<std::ptrdiff_t>(width - take));
  return h;
}

// Draws from logits/temperature restricted to the nucleus of mass top_p.
// The nucleus is built in descending probability order with ties broken by id.
TokenId sample_nucleus(const std::vector<double>& logits, double temperature, double top_p, Rng& rng) {
  double peak = kNegInf;
  for (double l : logits) peak = std::max(peak, l);
  if (peak == kNegInf) throw UsageError("every token is masked");
  std::vector<double> w(logits.size(), 0.0);
  std::vector<TokenId> live;
  live.reserve(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (logits[i] == kNegInf) continue;
    w[i] = std::exp((logits[i] - peak) / temperature);
    total += w[i];
    live.push_back(static_cast<TokenId>(i));
  }
  if (top_p >= 1.0) {
    const std::size_t pick = rng.weighted(w);
    return static_cast<TokenId>(pick);
  }
  auto by_mass = [&w](TokenId a, TokenId b) { return w[a] != w[b] ? w[a] > w[b] : a < b; };
  const double target = top_p * total;
  std::size_t k = std::min<std::size_t>(64, live.size());
  std::size_t kept = live.size();
  for (;;) {
    std::partial_sort(live.begin(), live.begin() + static_cast<std::ptrdiff_t>(k), live.end(), by_mass);
    double acc = 0.0;
    bool found = false;
    for (std::size_t j = 0; j < k; ++j) {
      acc += w[live[j]];
      if (acc >= target) {
        kept = j + 1;
        found = true;
        break;
      }
    }
    if (found || k == live.size()) break;
    k = std::min(live.size(), k * 8);
  }
  double kept_total = 0.0;
  for (std::size_t j = 0; j < kept; ++j) kept_total += w[live[j]];
  const double u = rng.uniform() * kept_total;
  double acc = 0.0;
  for (std::size_t j = 0; j < kept; ++j) {
    acc += w[live[j]];
    if (u < acc) return live[j];
  }
  return live[kept - 1];
}

}  // namespace

std::vector<std::string> tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char32_t cp : text::decode(s)) {
    if (text::is_space(cp)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
      if (text::is_line_break(cp)) {
        std::string lb;
        text::append_utf8(lb, cp);
        out.push_back(std::move(lb));
      }
    } else {
      text::append_utf8(cur, cp);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::string detokenize(const std::vector<std::string>& tokens) { return text::join(tokens, " "); }

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  tokens.emplace_back(kBos);
  tokens.emplace_back(kEos);
  tokens.emplace_back(kUnk);
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  tokens_ = std::move(tokens);
  index_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], static_cast<TokenId>(i));
  bos_ = index_.at(std::string(kBos));
  eos_ = index_.at(std::string(kEos));
  unk_ = index_.at(std::string(kUnk));
}

bool Vocabulary::contains(std::string_view token) const { return index_.count(std::string(token)) != 0; }

TokenId Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? unk_ : it->second;
}

std::vector<TokenId> Vocabulary::ids(const std::vector<std::string>& tokens) const {
  std::vector<TokenId> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

void SamplingConfig::validate() const {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw UsageError("temperature must be positive");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw UsageError("top_p must be in (0, 1]");
}

std::vector<double> softmax(std::span<const double> logits, double temperature) {
  if (!(temperature > 0.0)) throw UsageError("temperature must be positive");
  double peak = kNegInf;
  for (double l : logits) peak = std::max(peak, l);
  std::vector<double> p(logits.size(), 0.0);
  if (peak == kNegInf) return p;
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (logits[i] == kNegInf) continue;
    p[i] = std::exp((logits[i] - peak) / temperature);
    total += p[i];
  }
  for (double& x : p) x /= total;
  return p;
}

std::uint32_t NGramModel::Counts::count(TokenId id) const {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) return 0;
  return counts[static_cast<std::size_t>(it - ids.begin())];
}

std::string NGramModel::key(std::span<const TokenId> context) {
  std::string k(context.size() * sizeof(TokenId), '\0');
  for (std::size_t i = 0; i < context.size(); ++i) {
    for (std::size_t b = 0; b < sizeof(TokenId); ++b) {
      k[i * sizeof(TokenId) + b] = static_cast<char>((context[i] >> (8 * b)) & 0xFF);
    }
  }
  return k;
}

NGramModel NGramModel::train(const std::vector<std::vector<std::string>>& corpus, int order, double alpha) {
  if (order < 2) throw UsageError("model order must be at least 2");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw UsageError("smoothing constant must be positive");
  std::vector<std::string> types;
  for (const auto& doc : corpus) types.insert(types.end(), doc.begin(), doc.end());
  if (types.empty()) throw DataError("cannot train on an empty corpus");

  NGramModel m;
  m.order_ = order;
  m.alpha_ = alpha;
  m.vocab_ = Vocabulary(std::move(types));

  const auto width = static_cast<std::size_t>(order - 1);
  std::map<std::vector<TokenId>, std::uint32_t> counts;
  for (const auto& doc : corpus) {
    std::vector<TokenId> seq(width, m.vocab_.bos());
    for (const auto& t : doc) seq.push_back(m.vocab_.id(t));
    seq.push_back(m.vocab_.eos());
    for (std::size_t i = width; i < seq.size(); ++i) {
      std::vector<TokenId> gram(seq.begin() + static_cast<std::ptrdiff_t>(i - width),
                                seq.begin() + static_cast<std::ptrdiff_t>(i + 1));
      ++counts[std::move(gram)];
    }
  }
  m.ngrams_.assign(counts.begin(), counts.end());
  m.build_tables();
  return m;
}

NGramModel NGramModel::train_texts(const std::vector<std::string>& texts, int order, double alpha) {
  std::vector<std::vector<std::string>> corpus;
  corpus.reserve(texts.size());
  for (const auto& t : texts) corpus.push_back(tokenize(t));
  return train(corpus, order, alpha);
}

void NGramModel::build_tables() {
  const auto width = static_cast<std::size_t>(order_ - 1);
  std::unordered_map<std::string, std::map<TokenId, std::uint64_t>> acc;
  for (const auto& [gram, c] : ngrams_) {
    const TokenId next = gram.back();
    std::span<const TokenId> ctx(gram.data(), width);
    for (std::size_t len = 0; len <= width; ++len) {
      acc[key(ctx.subspan(width - len))][next] += c;
    }
  }
  table_.clear();
  table_.reserve(acc.size());
  for (auto& [k, entries] : acc) {
    Counts c;
    for (const auto& [id, n] : entries) {
      c.ids.push_back(id);
      c.counts.push_back(static_cast<std::uint32_t>(n));
      c.total += n;
    }
    table_.emplace(k, std::move(c));
  }
}

const NGramModel::Counts& NGramModel::resolve(std::span<const TokenId> history) const {
  const auto width = static_cast<std::size_t>(order_ - 1);
  std::vector<TokenId> ctx = padded_history(history, history.size(), width, vocab_.bos());
  std::span<const TokenId> view(ctx);
  for (std::size_t len = width + 1; len-- > 0;) {
    auto it = table_.find(key(view.subspan(width - len)));
    if (it != table_.end()) return it->second;
  }
  throw DataError("model has no unigram table");
}

double NGramModel::prob(std::span<const TokenId> history, TokenId token) const {
  const Counts& c = resolve(history);
  const double z = static_cast<double>(c.total) + alpha_ * static_cast<double>(vocab_.size());
  return (static_cast<double>(c.count(token)) + alpha_) / z;
}

double NGramModel::logprob(std::span<const TokenId> history, TokenId token) const {
  const Counts& c = resolve(history);
  const double z = static_cast<double>(c.total) + alpha_ * static_cast<double>(vocab_.size());
  return std::log(static_cast<double>(c.count(token)) + alpha_) - std::log(z);
}

void NGramModel::log_probs(std::span<const TokenId> history, std::vector<double>& out) const {
  const Counts& c = resolve(history);
  const double log_z = std::log(static_cast<double>(c.total) + alpha_ * static_cast<double>(vocab_.size()));
  out.assign(vocab_.size(), std::log(alpha_) - log_z);
  for (std::size_t i = 0; i < c.ids.size(); ++i) {
    out[c.ids[i]] = std::log(static_cast<double>(c.counts[i]) + alpha_) - log_z;
  }
}

double NGramModel::entropy(std::span<const TokenId> history) const {
  const Counts& c = resolve(history);
  const double z = static_cast<double>(c.total) + alpha_ * static_cast<double>(vocab_.size());
  double h = 0.0;
  for (std::uint32_t n : c.counts) {
    const double p = (static_cast<double>(n) + alpha_) / z;
    h -= p * std::log(p);
  }
  const double unseen = static_cast<double>(vocab_.size() - c.ids.size());
  const double p0 = alpha_ / z;
  h -= unseen * p0 * std::log(p0);
  return h;
}

std::uint64_t NGramModel::rank(std::span<const TokenId> history, TokenId token) const {
  const Counts& c = resolve(history);
  const std::uint32_t n = c.count(token);
  if (n == 0) {
    const auto seen_below = static_cast<std::uint64_t>(
        std::lower_bound(c.ids.begin(), c.ids.end(), token) - c.ids.begin());
    return 1 + c.ids.size() + (token - seen_below);
  }
  std::uint64_t higher = 0;
  for (std::size_t i = 0; i < c.ids.size(); ++i) {
    if (c.counts[i] > n || (c.counts[i] == n && c.ids[i] < token)) ++higher;
  }
  return 1 + higher;
}

ScoreResult NGramModel::score(std::string_view s) const {
  ScoreResult r;
  const auto tokens = tokenize(s);
  const auto width = static_cast<std::size_t>(order_ - 1);
  if (tokens.size() < static_cast<std::size_t>(order_)) {
    r.flagged = true;
    return r;
  }
  const auto ids = vocab_.ids(tokens);
  std::span<const TokenId> all(ids);
  r.tokens.reserve(ids.size() - width);
  for (std::size_t i = width; i < ids.size(); ++i) {
    auto h = all.subspan(i - width, width);
    TokenScore ts;
    ts.token = vocab_.token(ids[i]);
    ts.logprob = logprob(h, ids[i]);
    ts.rank = rank(h, ids[i]);
    ts.entropy = entropy(h);
    r.tokens.push_back(std::move(ts));
  }
  return r;
}

std::vector<double> NGramModel::token_logprobs(std::span<const TokenId> ids) const {
  const auto width = static_cast<std::size_t>(order_ - 1);
  std::vector<double> out;
  for (std::size_t i = width; i < ids.size(); ++i) out.push_back(logprob(ids.subspan(i - width, width), ids[i]));
  return out;
}

TokenId NGramModel::sample_fill(std::span<const TokenId> history, Rng& rng) const {
  const Counts& c = resolve(history);
  std::vector<double> w(vocab_.size(), alpha_);
  for (std::size_t i = 0; i < c.ids.size(); ++i) w[c.ids[i]] = static_cast<double>(c.counts[i]) + alpha_;
  w[vocab_.bos()] = 0.0;
  w[vocab_.eos()] = 0.0;
  w[vocab_.unk()] = 0.0;
  return static_cast<TokenId>(rng.weighted(w));
}

GenerationResult NGramModel::generate(std::string_view prompt, const GenerateOptions& options) const {
  options.sampling.validate();
  GenerationResult r;
  const auto width = static_cast<std::size_t>(order_ - 1);
  const auto prompt_ids = vocab_.ids(tokenize(prompt));
  r.flagged = std::none_of(prompt_ids.begin(), prompt_ids.end(), [this](TokenId t) { return t != vocab_.unk(); });

  std::vector<TokenId> history(width, vocab_.bos());
  if (!r.flagged) history.insert(history.end(), prompt_ids.begin(), prompt_ids.end());
  std::vector<TokenId> hook_history = history;

  Rng rng(options.seed);
  std::vector<double> logits;
  for (std::size_t step = 0; step < options.sampling.max_tokens; ++step) {
    log_probs(history, logits);
    if (options.logits_hook) options.logits_hook(hook_history, logits);
    logits[vocab_.bos()] = kNegInf;
    logits[vocab_.unk()] = kNegInf;
    if (step < options.sampling.min_tokens) logits[vocab_.eos()] = kNegInf;
    const TokenId next = sample_nucleus(logits, options.sampling.temperature, options.sampling.top_p, rng);
    if (next == vocab_.eos()) break;
    ++r.sampled;
    StepEvent ev;
    ev.step = step;
    ev.token = vocab_.token(next);
    if (options.step_hook) options.step_hook(ev);
    if (!ev.token.empty()) {
      const TokenId id = vocab_.id(ev.token);
      history.push_back(id);
      hook_history.push_back(id);
      r.tokens.push_back(std::move(ev.token));
    }
    for (auto& extra : ev.extra) {
      if (extra.empty()) continue;
      const TokenId id = vocab_.id(extra);
      history.push_back(id);
      if (options.extras_in_hook_history) hook_history.push_back(id);
      r.tokens.push_back(std::move(extra));
    }
  }
  r.text = detokenize(r.tokens);
  return r;
}

void check_spans(const std::vector<std::pair<std::size_t, std::size_t>>& spans, std::size_t n) {
  auto sorted = spans;
  std::sort(sorted.begin(), sorted.end());
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto [b, e] = sorted[i];
    if (b >= e) throw UsageError(fmt::format("empty or reversed span [{}, {})", b, e));
    if (e > n) throw UsageError(fmt::format("span [{}, {}) exceeds length {}", b, e, n));
    if (i > 0 && b < prev_end) throw UsageError(fmt::format("span [{}, {}) overlaps its predecessor", b, e));
    prev_end = e;
  }
}

std::vector<std::pair<std::size_t, std::size_t>> choose_spans(const std::vector<bool>& eligible, std::size_t count,
                                                              std::size_t span_len, Rng& rng) {
  if (span_len == 0) throw UsageError("span length must be at least 1");
  std::vector<std::size_t> starts;
  std::size_t run = 0;
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    run = eligible[i] ? run + 1 : 0;
    if (run >= span_len) starts.push_back(i + 1 - span_len);
  }
  std::vector<std::pair<std::size_t, std::size_t>> spans;
  while (spans.size() < count && !starts.empty()) {
    const std::size_t s = starts[rng.below(starts.size())];
    spans.emplace_back(s, s + span_len);
    std::erase_if(starts, [&](std::size_t c) { return c + span_len > s && c < s + span_len; });
  }
  std::sort(spans.begin(), spans.end());
  return spans;
}

std::vector<TokenId> NGramModel::mask_fill_ids(std::vector<TokenId> ids,
                                               const std::vector<std::pair<std::size_t, std::size_t>>& spans,
                                               std::uint64_t seed) const {
  check_spans(spans, ids.size());
  auto sorted = spans;
  std::sort(sorted.begin(), sorted.end());
  const auto width = static_cast<std::size_t>(order_ - 1);
  Rng rng(seed);
  for (const auto& [b, e] : sorted) {
    for (std::size_t i = b; i < e; ++i) {
      const auto h = padded_history(ids, i, width, vocab_.bos());
      ids[i] = sample_fill(h, rng);
    }
  }
  return ids;
}

std::string NGramModel::mask_fill(std::string_view s, const std::vector<std::pair<std::size_t, std::size_t>>& spans,
                                  std::uint64_t seed) const {
  auto seg = text::segment(s);
  const auto ids = vocab_.ids(seg.words);
  const auto filled = mask_fill_ids(ids, spans, seed);
  for (const auto& [b, e] : spans) {
    for (std::size_t i = b; i < e; ++i) seg.words[i] = vocab_.token(filled[i]);
  }
  return seg.str();
}

void NGramModel::save(std::ostream& out) const {
  out << kDumpMagic << ' ' << kDumpVersion << '\n';
  out << "order " << order_ << '\n';
  out << "alpha " << fmt::format("{:a}", alpha_) << '\n';
  out << "vocab " << vocab_.size() << '\n';
  for (const auto& t : vocab_.tokens()) out << nlohmann::json(t).dump() << '\n';
  out << "ngrams " << ngrams_.size() << '\n';
  for (const auto& [gram, c] : ngrams_) {
    for (TokenId id : gram) out << id << ' ';
    out << c << '\n';
  }
}

void NGramModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write model '{}'", path.string()));
  save(out);
}

NGramModel NGramModel::load(std::istream& in) {
  auto fail = [](std::string_view what) { return DataError(fmt::format("bad model dump: {}", what)); };
  std::string line;
  if (!std::getline(in, line) || line != fmt::format("{} {}", kDumpMagic, kDumpVersion)) throw fail("header");
  NGramModel m;
  std::string word;
  std::string alpha_text;
  std::size_t v = 0;
  std::size_t n = 0;
  if (!(in >> word >> m.order_) || word != "order" || m.order_ < 2) throw fail("order");
  if (!(in >> word >> alpha_text) || word != "alpha") throw fail("alpha");
  m.alpha_ = std::strtod(alpha_text.c_str(), nullptr);
  if (!(m.alpha_ > 0.0)) throw fail("alpha");
  if (!(in >> word >> v) || word != "vocab") throw fail("vocab");
  std::getline(in, line);
  std::vector<std::string> tokens;
  tokens.reserve(v);
  for (std::size_t i = 0; i < v; ++i) {
    if (!std::getline(in, line)) throw fail("truncated vocabulary");
    try {
      tokens.push_back(nlohmann::json::parse(line).get<std::string>());
    } catch (const nlohmann::json::exception&) {
      throw fail(fmt::format("vocabulary entry {}", i));
    }
  }
  m.vocab_ = Vocabulary(tokens);
  if (m.vocab_.tokens() != tokens) throw fail("vocabulary is not sorted");
  if (!(in >> word >> n) || word != "ngrams") throw fail("ngrams");
  m.ngrams_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<TokenId> gram(static_cast<std::size_t>(m.order_));
    std::uint32_t c = 0;
    for (auto& id : gram) {
      if (!(in >> id) || id >= v) throw fail(fmt::format("n-gram {}", i));
    }
    if (!(in >> c) || c == 0) throw fail(fmt::format("n-gram count {}", i));
    m.ngrams_.emplace_back(std::move(gram), c);
  }
  m.build_tables();
  return m;
}

NGramModel NGramModel::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open model '{}'", path.string()));
  return load(in);
}

}  // namespace mgt::toylm
