#include "mgt/eval.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "mgt/error.hpp"

namespace mgt::eval {
namespace {

void require_classes(std::span<const double> pos, std::span<const double> neg) {
  if (pos.empty() || neg.empty()) throw DataError("AUC needs at least one positive and one negative score");
}

std::size_t count_at_least(const std::vector<double>& sorted, double t) {
  return static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), t));
}

}  // namespace

double roc_auc(std::span<const double> pos, std::span<const double> neg) {
  require_classes(pos, neg);
  std::vector<double> n(neg.begin(), neg.end());
  std::sort(n.begin(), n.end());
  // Twice the pair count, kept integral so the result is exact.
  std::uint64_t twice = 0;
  for (double p : pos) {
    const auto lo = std::lower_bound(n.begin(), n.end(), p);
    const auto hi = std::upper_bound(lo, n.end(), p);
    twice += 2 * static_cast<std::uint64_t>(lo - n.begin()) + static_cast<std::uint64_t>(hi - lo);
  }
  return static_cast<double>(twice) / (2.0 * static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

double roc_auc_trapezoid(std::span<const double> pos, std::span<const double> neg) {
  require_classes(pos, neg);
  std::vector<double> thresholds(pos.begin(), pos.end());
  thresholds.insert(thresholds.end(), neg.begin(), neg.end());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  std::vector<double> p(pos.begin(), pos.end()), n(neg.begin(), neg.end());
  std::sort(p.begin(), p.end());
  std::sort(n.begin(), n.end());
  const double np = static_cast<double>(p.size()), nn = static_cast<double>(n.size());
  double area = 0.0, prev_tpr = 0.0, prev_fpr = 0.0;
  for (double t : thresholds) {
    const double tpr = static_cast<double>(count_at_least(p, t)) / np;
    const double fpr = static_cast<double>(count_at_least(n, t)) / nn;
    area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
    prev_tpr = tpr;
    prev_fpr = fpr;
  }
  return area;
}

double tpr_at_fpr(std::span<const double> pos, std::span<const double> neg, double fpr_target) {
  require_classes(pos, neg);
  if (!(fpr_target > 0.0 && fpr_target < 1.0)) throw UsageError(fmt::format("FPR target {} is outside (0, 1)", fpr_target));
  std::vector<double> p(pos.begin(), pos.end()), n(neg.begin(), neg.end());
  std::sort(p.begin(), p.end());
  std::sort(n.begin(), n.end());
  std::vector<double> thresholds = p;
  thresholds.insert(thresholds.end(), n.begin(), n.end());
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  const double allowed = fpr_target * static_cast<double>(n.size()) + 1e-9;
  // FPR is non-increasing in t, so the first admissible threshold is the smallest.
  for (double t : thresholds) {
    if (static_cast<double>(count_at_least(n, t)) <= allowed) {
      return static_cast<double>(count_at_least(p, t)) / static_cast<double>(p.size());
    }
  }
  return 0.0;
}

EvalResult evaluate(std::span<const double> pos, std::span<const double> neg, std::optional<double> threshold) {
  EvalResult r;
  r.auc_roc = roc_auc(pos, neg);
  for (double f : kFprTargets) r.tpr_at_fpr[f] = tpr_at_fpr(pos, neg, f);
  r.n_pos = pos.size();
  r.n_neg = neg.size();
  if (threshold) {
    std::size_t correct = 0;
    for (double s : pos) correct += s >= *threshold;
    for (double s : neg) correct += s < *threshold;
    r.accuracy = static_cast<double>(correct) / static_cast<double>(pos.size() + neg.size());
  }
  return r;
}

namespace {

constexpr std::string_view kHeader =
    "detector,category,attack,level,status,n_pos,n_neg,auc,tpr_at_fpr_5,tpr_at_fpr_10,tpr_at_fpr_20,accuracy,"
    "relative_auc,edit_distance_mean,edit_distance_median,jaro_mean,ngram_cosine_mean,perplexity_mean";

std::string fixed(std::optional<double> v) { return v ? fmt::format("{:.6f}", *v) : std::string(); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::optional<double> parse_number(const std::string& s, std::size_t line_no) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw DataError(fmt::format("cells line {}: bad number '{}'", line_no, s));
  return v;
}

}  // namespace

void write_cells_csv(std::ostream& out, const std::vector<SweepCell>& cells) {
  out << kHeader << '\n';
  for (const auto& c : cells) {
    std::vector<std::string> f;
    f.push_back(c.detector);
    f.push_back(c.category);
    f.push_back(c.attack);
    f.push_back(fmt::format("{}", c.level));
    f.push_back(c.complete ? "complete" : "incomplete");
    f.push_back(c.result ? fmt::format("{}", c.result->n_pos) : "0");
    f.push_back(c.result ? fmt::format("{}", c.result->n_neg) : "0");
    if (c.result) {
      f.push_back(fixed(c.result->auc_roc));
      for (double t : kFprTargets) f.push_back(fixed(c.result->tpr_at_fpr.at(t)));
      f.push_back(fixed(c.result->accuracy));
    } else {
      for (int i = 0; i < 5; ++i) f.emplace_back();
    }
    f.push_back(fixed(c.relative_auc));
    if (c.budget) {
      f.push_back(fixed(c.budget->edit_distance_mean));
      f.push_back(fixed(c.budget->edit_distance_median));
      f.push_back(fixed(c.budget->jaro_mean));
      f.push_back(fixed(c.budget->ngram_cosine_mean));
      f.push_back(fixed(c.budget->perplexity_mean));
    } else {
      for (int i = 0; i < 5; ++i) f.emplace_back();
    }
    std::string line;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (i) line += ',';
      line += f[i];
    }
    out << line << '\n';
  }
}

std::vector<SweepCell> read_cells_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw DataError("cells file does not start with the expected header");
  std::vector<SweepCell> cells;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 18) throw DataError(fmt::format("cells line {}: expected 18 fields, got {}", line_no, f.size()));
    SweepCell c;
    c.detector = f[0];
    c.category = f[1];
    c.attack = f[2];
    c.level = parse_number(f[3], line_no).value_or(0.0);
    if (f[4] != "complete" && f[4] != "incomplete") throw DataError(fmt::format("cells line {}: bad status '{}'", line_no, f[4]));
    c.complete = f[4] == "complete";
    if (auto auc = parse_number(f[7], line_no)) {
      EvalResult r;
      r.n_pos = static_cast<std::size_t>(parse_number(f[5], line_no).value_or(0));
      r.n_neg = static_cast<std::size_t>(parse_number(f[6], line_no).value_or(0));
      r.auc_roc = *auc;
      for (std::size_t i = 0; i < 3; ++i) r.tpr_at_fpr[kFprTargets[i]] = parse_number(f[8 + i], line_no).value_or(0.0);
      r.accuracy = parse_number(f[11], line_no);
      c.result = r;
    }
    c.relative_auc = parse_number(f[12], line_no);
    if (auto ed = parse_number(f[13], line_no)) {
      BudgetStats b;
      b.edit_distance_mean = *ed;
      b.edit_distance_median = parse_number(f[14], line_no).value_or(0.0);
      b.jaro_mean = parse_number(f[15], line_no).value_or(0.0);
      b.ngram_cosine_mean = parse_number(f[16], line_no).value_or(0.0);
      b.perplexity_mean = parse_number(f[17], line_no);
      c.budget = b;
    }
    cells.push_back(std::move(c));
  }
  return cells;
}

std::vector<LeaderboardRow> build_leaderboard(const std::vector<SweepCell>& cells, std::vector<std::string>* warnings) {
  std::vector<std::string> detectors;
  std::map<std::string, std::map<std::string, std::vector<double>>> values;
  for (const auto& c : cells) {
    if (std::find(detectors.begin(), detectors.end(), c.detector) == detectors.end()) detectors.push_back(c.detector);
    const bool known = std::find(std::begin(kCategories), std::end(kCategories), c.category) != std::end(kCategories);
    if (!known || !c.complete || !c.relative_auc) continue;
    values[c.detector][c.category].push_back(*c.relative_auc);
  }
  std::vector<LeaderboardRow> rows;
  for (const auto& d : detectors) {
    auto it = values.find(d);
    if (it == values.end()) {
      if (warnings) warnings->push_back(fmt::format("detector '{}' has no attack cell with a relative AUC; left off the leaderboard", d));
      continue;
    }
    LeaderboardRow row;
    row.detector = d;
    double sum = 0.0;
    for (auto cat : kCategories) {
      auto v = it->second.find(std::string(cat));
      if (v == it->second.end()) continue;
      double s = 0.0;
      for (double x : v->second) s += x;
      const double mean = s / static_cast<double>(v->second.size());
      row.category_means[std::string(cat)] = mean;
      sum += mean;
    }
    row.overall = sum / static_cast<double>(row.category_means.size());
    rows.push_back(std::move(row));
  }
  std::sort(rows.begin(), rows.end(), [](const LeaderboardRow& a, const LeaderboardRow& b) {
    if (a.overall != b.overall) return a.overall > b.overall;
    return a.detector < b.detector;
  });
  return rows;
}

void write_leaderboard(std::ostream& out, const std::vector<LeaderboardRow>& rows) {
  out << "# relative AUC ROC (%): category = unweighted mean over its attack cells and budget levels;"
         " overall = unweighted mean of the available categories\n";
  out << "rank,detector";
  for (auto cat : kCategories) out << ',' << cat;
  out << ",overall\n";
  std::size_t rank = 0;
  for (const auto& r : rows) {
    out << ++rank << ',' << r.detector;
    for (auto cat : kCategories) {
      auto it = r.category_means.find(std::string(cat));
      out << ',' << (it == r.category_means.end() ? std::string("-") : fmt::format("{:.2f}", it->second));
    }
    out << ',' << fmt::format("{:.2f}", r.overall) << '\n';
  }
}

PlotMetric parse_plot_metric(std::string_view s) {
  if (s == "edit_distance") return PlotMetric::edit_distance;
  if (s == "jaro") return PlotMetric::jaro;
  if (s == "ngram_cosine") return PlotMetric::ngram_cosine;
  if (s == "perplexity") return PlotMetric::perplexity;
  throw UsageError(fmt::format("unknown plot metric '{}'", s));
}

std::string_view to_string(PlotMetric m) {
  switch (m) {
    case PlotMetric::edit_distance: return "edit_distance";
    case PlotMetric::jaro: return "jaro";
    case PlotMetric::ngram_cosine: return "ngram_cosine";
    case PlotMetric::perplexity: return "perplexity";
  }
  return "?";
}

void write_plot_data(std::ostream& out, const std::vector<SweepCell>& cells, PlotMetric metric) {
  out << "detector,attack,level,budget_metric,x,y_relative_auc\n";
  for (const auto& c : cells) {
    if (!c.budget || !c.relative_auc) continue;
    std::optional<double> x;
    switch (metric) {
      case PlotMetric::edit_distance: x = c.budget->edit_distance_mean; break;
      case PlotMetric::jaro: x = c.budget->jaro_mean; break;
      case PlotMetric::ngram_cosine: x = c.budget->ngram_cosine_mean; break;
      case PlotMetric::perplexity: x = c.budget->perplexity_mean; break;
    }
    if (!x) continue;
    out << fmt::format("{},{},{},{},{:.6f},{:.6f}\n", c.detector, c.attack, c.level, to_string(metric), *x, *c.relative_auc);
  }
}

}  // namespace mgt::eval
