#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mgt/attacks_cogen.hpp"
#include "mgt/attacks_edit.hpp"
#include "mgt/attacks_para.hpp"
#include "mgt/backend.hpp"
#include "mgt/budget.hpp"
#include "mgt/corpus.hpp"
#include "mgt/detectors.hpp"
#include "mgt/eval.hpp"
#include "mgt/synonyms.hpp"
#include "mgt/toylm.hpp"
#include "mgt/watermark.hpp"

namespace mgt::sweep {

enum class AttackFamily { identity, edit, para, icl, prompt_para, cs, cogen_typo, cogen_emoji };

struct AttackSpec {
  std::string name;
  AttackFamily family = AttackFamily::identity;
  attacks::EditKind edit_kind = attacks::EditKind::typo_mixed;
  attacks::ParaKind para_kind = attacks::ParaKind::syn_free;

  static AttackSpec parse(std::string_view name);
  /// Edit, Para, Prompt, CoGen, or Control for the identity attack.
  std::string_view category() const;
  /// Regenerates the text from its prompt instead of editing it.
  bool generative() const;
};

const std::vector<std::string>& attack_names();

struct AttackGrid {
  AttackSpec attack;
  std::vector<double> levels;
};

/// "name=l1,l2,..."; a bare name gets level 1 (prompt and typo
/// co-generation attacks have a single level).
AttackGrid parse_grid(std::string_view s);
std::string cell_key(const AttackSpec& attack, double level);

struct Settings {
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  budget::Accounting accounting = budget::Accounting::codepoint;
  toylm::SamplingConfig sampling{1.0, 0.96, 100, 60};
  std::size_t prompt_tokens = 20;
  // Paraphrasing.
  std::size_t span_len = 2;
  double lex_diversity = 100.0;
  double order_diversity = 100.0;
  // Editing.
  bool letter_frequency_weighting = true;
  // Prompting and co-generation.
  attacks::SubstitutionRule cs_rule = attacks::SubstitutionRule::parse("a:z");
  attacks::SubstitutionRule cogen_rule = attacks::SubstitutionRule::parse("c:k");
  std::vector<char32_t> emoji_list = attacks::default_emoji();
  bool emoji_in_hash_chain = true;
  // Detection.
  double mask_ratio = 0.15;
  std::size_t mask_span_len = 2;
  detectors::PatchConfig patch;
  std::optional<double> threshold;
};

struct Context {
  const toylm::NGramModel& model;
  const attacks::SynonymDictionary& dictionary;
  const attacks::HomoglyphTable& homoglyphs;
  backend::BackendFactory factory;
  bool external = false;                     // generation goes through the backend
  std::vector<corpus::Document> icl_pool;    // human-written positive examples
  const watermark::GreenList* greens = nullptr;
  Settings settings;
};

/// Runs fn(i, backend) for i in [0, n) on `workers` threads, each with its
/// own backend handle.
void parallel_for(std::size_t n, std::size_t workers, const backend::BackendFactory& factory,
                  const std::function<void(std::size_t, backend::Backend&)>& fn);

std::uint64_t generation_seed(std::uint64_t seed, std::string_view mgt_id);
std::string mgt_id(std::string_view source_id);
/// Prompt followed by its continuation.
std::string compose(std::string_view prompt, std::string_view continuation);

std::vector<corpus::Document> generate_set(const Context& ctx, const std::vector<corpus::Prompt>& prompts,
                                           bool watermarked);

struct Outcome {
  std::optional<std::string> text;
  std::string error;
};

Outcome attack_document(const Context& ctx, backend::Backend& backend, const AttackSpec& attack, double level,
                        const std::vector<corpus::Document>& mgts, std::size_t index, bool watermarked);
std::vector<Outcome> attack_set(const Context& ctx, const AttackSpec& attack, double level,
                                const std::vector<corpus::Document>& mgts, bool watermarked);

struct ScoreOutcome {
  std::optional<double> score;
  std::string error;
};

/// Scores texts (nullopt entries are skipped) under every detector;
/// result[d][i]. Metric detectors share one score request per text.
std::vector<std::vector<ScoreOutcome>> score_texts(const Context& ctx,
                                                   const std::vector<detectors::DetectorSpec>& detectors,
                                                   const std::vector<std::string>& ids,
                                                   const std::vector<std::optional<std::string>>& texts);

/// Budget statistics over the successfully attacked documents.
std::optional<eval::BudgetStats> budget_stats(const Context& ctx, const std::vector<std::string>& originals,
                                              const std::vector<std::optional<std::string>>& attacked);

struct CellInput {
  std::string detector;
  std::string category;
  std::string attack;
  double level = 0.0;
  std::size_t attack_failures = 0;
  std::vector<ScoreOutcome> pos;  // one per MGT; missing when the attack failed
  std::vector<ScoreOutcome> neg;  // one per HWT
  std::optional<eval::BudgetStats> budget;
  std::optional<double> baseline_auc;
};

eval::SweepCell assemble_cell(const CellInput& in, std::optional<double> threshold);

/// One-shot pipeline. Cells are ordered by detector, then baseline, then
/// grid order and level order.
std::vector<eval::SweepCell> run_sweep(const Context& ctx, const std::vector<corpus::Document>& hwt,
                                       const std::vector<corpus::Document>& plain,
                                       const std::vector<corpus::Document>& watermarked,
                                       const std::vector<detectors::DetectorSpec>& detectors,
                                       const std::vector<AttackGrid>& grids);

}  // namespace mgt::sweep
