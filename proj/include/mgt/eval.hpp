#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mgt::eval {

/// Fraction of (pos, neg) pairs with pos > neg, ties counted 0.5.
double roc_auc(std::span<const double> pos, std::span<const double> neg);
/// Trapezoidal area under the enumerated ROC curve; a second implementation.
double roc_auc_trapezoid(std::span<const double> pos, std::span<const double> neg);
/// TPR at the smallest threshold t whose FPR (score >= t counts as machine)
/// does not exceed `fpr_target`. No interpolation.
double tpr_at_fpr(std::span<const double> pos, std::span<const double> neg, double fpr_target);

inline constexpr double kFprTargets[] = {0.05, 0.10, 0.20};

struct EvalResult {
  double auc_roc = 0.0;
  std::map<double, double> tpr_at_fpr;  // keyed by kFprTargets
  std::optional<double> accuracy;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
};

EvalResult evaluate(std::span<const double> pos, std::span<const double> neg,
                    std::optional<double> threshold = std::nullopt);

struct BudgetStats {
  double edit_distance_mean = 0.0;
  double edit_distance_median = 0.0;
  double jaro_mean = 1.0;
  double ngram_cosine_mean = 1.0;
  std::optional<double> perplexity_mean;
};

struct SweepCell {
  std::string detector;
  std::string category;  // Edit, Para, Prompt, CoGen; "-" for the baseline
  std::string attack;    // "none" for the baseline
  double level = 0.0;
  bool complete = true;
  std::optional<EvalResult> result;  // absent when a class had no scores
  std::optional<double> relative_auc;
  std::optional<BudgetStats> budget;
};

inline constexpr std::string_view kCategories[] = {"Edit", "Para", "Prompt", "CoGen"};

void write_cells_csv(std::ostream& out, const std::vector<SweepCell>& cells);
std::vector<SweepCell> read_cells_csv(std::istream& in);

struct LeaderboardRow {
  std::string detector;
  std::map<std::string, double> category_means;  // only categories with cells
  double overall = 0.0;
};

/// Rows ranked by overall mean, descending, ties by detector name. Detectors
/// without usable cells are dropped and reported in `warnings`.
std::vector<LeaderboardRow> build_leaderboard(const std::vector<SweepCell>& cells,
                                              std::vector<std::string>* warnings = nullptr);
void write_leaderboard(std::ostream& out, const std::vector<LeaderboardRow>& rows);

enum class PlotMetric { edit_distance, jaro, ngram_cosine, perplexity };
PlotMetric parse_plot_metric(std::string_view s);
std::string_view to_string(PlotMetric m);

/// x = measured budget mean of the chosen metric, y = relative AUC.
void write_plot_data(std::ostream& out, const std::vector<SweepCell>& cells, PlotMetric metric);

}  // namespace mgt::eval
