#include "mgt/detectors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "mgt/error.hpp"
#include "mgt/rng.hpp"

namespace mgt::detectors {
namespace {

template <class F>
double mean_of(std::span<const toylm::TokenScore> scores, std::string_view what, F f) {
  if (scores.empty()) throw DataError(fmt::format("{}: no scored tokens", what));
  double sum = 0.0;
  for (const auto& s : scores) sum += f(s);
  return sum / static_cast<double>(scores.size());
}

double masked_mean(std::span<const double> v, const std::vector<bool>& excluded) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (excluded[i]) continue;
    sum += v[i];
    ++n;
  }
  if (n == 0) throw DataError("detectgpt: every scored token was excluded");
  return sum / static_cast<double>(n);
}

}  // namespace

double gltr(std::span<const toylm::TokenScore> scores) {
  return mean_of(scores, "gltr", [](const auto& s) { return s.logprob; });
}

double rank_detector(std::span<const toylm::TokenScore> scores) {
  return -mean_of(scores, "rank", [](const auto& s) { return static_cast<double>(s.rank); });
}

double logrank_detector(std::span<const toylm::TokenScore> scores) {
  return -mean_of(scores, "logrank", [](const auto& s) { return std::log(static_cast<double>(s.rank)); });
}

double entropy_detector(std::span<const toylm::TokenScore> scores) {
  return -mean_of(scores, "entropy", [](const auto& s) { return s.entropy; });
}

void DetectGptConfig::validate() const {
  if (n_perturbations < 1) throw UsageError("detectgpt needs at least one perturbation");
  if (mode == GptMode::z && n_perturbations < 2) throw UsageError("detectgpt z mode needs at least two perturbations");
  if (!(mask_ratio >= 0.0 && mask_ratio <= 1.0)) throw UsageError("detectgpt mask ratio must be in [0, 1]");
  if (span_len < 1) throw UsageError("detectgpt span length must be at least 1");
}

void PatchConfig::validate() const {
  if (!(k_percent >= 0.0 && k_percent <= 0.5)) throw UsageError(fmt::format("patch fraction {} is outside [0, 0.5]", k_percent));
}

double detect_gpt_statistic(double original, std::span<const double> perturbed, GptMode mode) {
  if (perturbed.empty()) throw UsageError("detectgpt needs at least one perturbation");
  const double n = static_cast<double>(perturbed.size());
  const double mu = std::accumulate(perturbed.begin(), perturbed.end(), 0.0) / n;
  const double d = original - mu;
  if (mode == GptMode::d) return d;
  if (perturbed.size() < 2) throw UsageError("detectgpt z mode needs at least two perturbations");
  double ss = 0.0;
  for (double v : perturbed) ss += (v - mu) * (v - mu);
  return d / std::max(std::sqrt(ss / (n - 1.0)), kStdevFloor);
}

std::vector<bool> patch_mask(std::span<const double> logprobs, double k_percent) {
  const std::size_t m = logprobs.size();
  std::vector<bool> out(m, false);
  const auto k = static_cast<std::size_t>(std::ceil(k_percent * static_cast<double>(m) - 1e-9));
  if (k == 0) return out;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return logprobs[a] < logprobs[b]; });
  for (std::size_t i = 0; i < std::min(k, m); ++i) out[order[i]] = true;
  return out;
}

double detect_gpt(std::string_view text, const toylm::NGramModel& model, const DetectGptConfig& config,
                  const std::optional<PatchConfig>& patch) {
  config.validate();
  if (patch) patch->validate();
  const auto ids = model.vocab().ids(toylm::tokenize(text));
  const auto width = static_cast<std::size_t>(model.order() - 1);
  if (ids.size() <= width) throw DataError("detectgpt: text is shorter than the model context");
  const auto lp = model.token_logprobs(ids);
  const auto excluded = patch ? patch_mask(lp, patch->k_percent) : std::vector<bool>(lp.size(), false);

  std::vector<bool> eligible(ids.size(), true);
  for (std::size_t i = 0; i < excluded.size(); ++i) {
    if (excluded[i]) eligible[i + width] = false;
  }
  std::size_t n_spans = 0;
  if (config.mask_ratio > 0.0) {
    const double want = config.mask_ratio * static_cast<double>(ids.size()) / static_cast<double>(config.span_len);
    n_spans = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(want)));
  }

  const double original = masked_mean(lp, excluded);
  std::vector<double> perturbed;
  perturbed.reserve(config.n_perturbations);
  for (std::size_t j = 0; j < config.n_perturbations; ++j) {
    Rng rng(derive_seed(config.seed, 2 * j));
    const auto spans = toylm::choose_spans(eligible, n_spans, config.span_len, rng);
    if (n_spans > 0 && spans.empty()) throw DataError("detectgpt: text too short to place a mask span");
    const auto filled = model.mask_fill_ids(ids, spans, derive_seed(config.seed, 2 * j + 1));
    perturbed.push_back(masked_mean(model.token_logprobs(filled), excluded));
  }
  return detect_gpt_statistic(original, perturbed, config.mode);
}

DetectorSpec DetectorSpec::parse(std::string_view name) {
  DetectorSpec s;
  if (name == "gltr") return s;
  if (name == "rank") { s.family = Family::rank; return s; }
  if (name == "logrank") { s.family = Family::logrank; return s; }
  if (name == "entropy") { s.family = Family::entropy; return s; }
  if (name == "watermark") { s.family = Family::watermark; return s; }
  constexpr std::string_view prefix = "detectgpt-";
  constexpr std::string_view suffix = "+patch";
  if (name.starts_with(prefix)) {
    std::string_view rest = name.substr(prefix.size());
    if (rest.ends_with(suffix)) {
      s.patched = true;
      rest.remove_suffix(suffix.size());
    }
    std::size_t n = 0;
    const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), n);
    const std::string_view mode(ptr, static_cast<std::size_t>(rest.data() + rest.size() - ptr));
    if (ec == std::errc() && n >= 1 && (mode == "d" || mode == "z")) {
      s.family = Family::detectgpt;
      s.n_perturbations = n;
      s.mode = mode == "d" ? GptMode::d : GptMode::z;
      if (s.mode == GptMode::z && n < 2) throw UsageError("detectgpt z mode needs at least two perturbations");
      return s;
    }
  }
  throw UsageError(fmt::format("unknown detector '{}'", name));
}

std::string DetectorSpec::name() const {
  switch (family) {
    case Family::gltr: return "gltr";
    case Family::rank: return "rank";
    case Family::logrank: return "logrank";
    case Family::entropy: return "entropy";
    case Family::watermark: return "watermark";
    case Family::detectgpt:
      return fmt::format("detectgpt-{}{}{}", n_perturbations, mode == GptMode::d ? "d" : "z", patched ? "+patch" : "");
  }
  return {};
}

double metric_score(const DetectorSpec& spec, const toylm::ScoreResult& scores) {
  switch (spec.family) {
    case Family::gltr: return gltr(scores.tokens);
    case Family::rank: return rank_detector(scores.tokens);
    case Family::logrank: return logrank_detector(scores.tokens);
    case Family::entropy: return entropy_detector(scores.tokens);
    default: throw UsageError(fmt::format("{} is not a metric detector", spec.name()));
  }
}

ExternalScores ingest_external_scores(const std::filesystem::path& path, const std::set<std::string>* known_ids) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open score file {}", path.string()));
  ExternalScores out;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header) {
      if (!line.starts_with("#")) throw DataError(fmt::format("{}:{}: missing '# detector=... polarity=...' header", path.string(), line_no));
      std::optional<Polarity> polarity;
      std::size_t pos = 1;
      while (pos < line.size()) {
        while (pos < line.size() && line[pos] == ' ') ++pos;
        const std::size_t end = std::min(line.find(' ', pos), line.size());
        const std::string field = line.substr(pos, end - pos);
        pos = end;
        if (field.starts_with("detector=")) out.detector = field.substr(9);
        else if (field == "polarity=higher_is_machine") polarity = Polarity::higher_is_machine;
        else if (field == "polarity=lower_is_machine") polarity = Polarity::lower_is_machine;
        else if (field.starts_with("polarity=")) throw DataError(fmt::format("{}:{}: unknown polarity '{}'", path.string(), line_no, field.substr(9)));
      }
      if (!polarity) throw DataError(fmt::format("{}:{}: header does not declare a polarity", path.string(), line_no));
      if (out.detector.empty()) throw DataError(fmt::format("{}:{}: header does not name the detector", path.string(), line_no));
      out.polarity = *polarity;
      have_header = true;
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(fmt::format("{}:{}: expected doc_id<TAB>score", path.string(), line_no));
    std::string id = line.substr(0, tab);
    const std::string value = line.substr(tab + 1);
    double score = 0.0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), score);
    if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(score)) {
      throw DataError(fmt::format("{}:{}: bad score '{}'", path.string(), line_no, value));
    }
    if (known_ids && !known_ids->contains(id)) throw DataError(fmt::format("{}:{}: unknown document id '{}'", path.string(), line_no, id));
    if (out.polarity == Polarity::lower_is_machine) score = -score;
    if (!out.scores.emplace(std::move(id), score).second) throw DataError(fmt::format("{}:{}: duplicate document id", path.string(), line_no));
  }
  return out;
}

void write_scores(const std::filesystem::path& path, std::string_view detector,
                  const std::vector<std::pair<std::string, double>>& scores) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write {}", path.string()));
  out << fmt::format("# detector={} polarity=higher_is_machine\n", detector);
  for (const auto& [id, s] : scores) out << fmt::format("{}\t{}\n", id, s);
  if (!out) throw DataError(fmt::format("failed writing {}", path.string()));
}

}  // namespace mgt::detectors
