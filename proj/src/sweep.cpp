#include "mgt/sweep.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include "mgt/attacks_prompt.hpp"
#include "mgt/error.hpp"
#include "mgt/rng.hpp"

namespace mgt::sweep {
namespace {

struct AttackName {
  std::string_view name;
  AttackFamily family;
  attacks::EditKind edit;
  attacks::ParaKind para;
};

constexpr AttackName kAttacks[] = {
    {"identity", AttackFamily::identity, attacks::EditKind::typo_mixed, attacks::ParaKind::syn_free},
    {"typo_mixed", AttackFamily::edit, attacks::EditKind::typo_mixed, attacks::ParaKind::syn_free},
    {"typo_insert", AttackFamily::edit, attacks::EditKind::typo_insert, attacks::ParaKind::syn_free},
    {"typo_delete", AttackFamily::edit, attacks::EditKind::typo_delete, attacks::ParaKind::syn_free},
    {"typo_substitute", AttackFamily::edit, attacks::EditKind::typo_substitute, attacks::ParaKind::syn_free},
    {"typo_transpose", AttackFamily::edit, attacks::EditKind::typo_transpose, attacks::ParaKind::syn_free},
    {"homoglyph", AttackFamily::edit, attacks::EditKind::homoglyph, attacks::ParaKind::syn_free},
    {"format_zws", AttackFamily::edit, attacks::EditKind::format_zws, attacks::ParaKind::syn_free},
    {"format_shift", AttackFamily::edit, attacks::EditKind::format_shift, attacks::ParaKind::syn_free},
    {"syn_free", AttackFamily::para, attacks::EditKind::typo_mixed, attacks::ParaKind::syn_free},
    {"syn_model", AttackFamily::para, attacks::EditKind::typo_mixed, attacks::ParaKind::syn_model},
    {"span", AttackFamily::para, attacks::EditKind::typo_mixed, attacks::ParaKind::span},
    {"inner_sent", AttackFamily::para, attacks::EditKind::typo_mixed, attacks::ParaKind::inner_sent},
    {"inter_sent", AttackFamily::para, attacks::EditKind::typo_mixed, attacks::ParaKind::inter_sent},
    {"icl", AttackFamily::icl, attacks::EditKind::typo_mixed, attacks::ParaKind::syn_free},
    {"prompt_para", AttackFamily::prompt_para, attacks::EditKind::typo_mixed, attacks::ParaKind::syn_free},
    {"cs", AttackFamily::cs, attacks::EditKind::typo_mixed, attacks::ParaKind::syn_free},
    {"cogen_typo", AttackFamily::cogen_typo, attacks::EditKind::typo_mixed, attacks::ParaKind::syn_free},
    {"cogen_emoji", AttackFamily::cogen_emoji, attacks::EditKind::typo_mixed, attacks::ParaKind::syn_free},
};

std::string error_text(const std::exception& e) {
  std::string s = e.what();
  std::replace(s.begin(), s.end(), '\n', ' ');
  std::replace(s.begin(), s.end(), '\t', ' ');
  return s;
}

}  // namespace

AttackSpec AttackSpec::parse(std::string_view name) {
  for (const auto& a : kAttacks) {
    if (a.name == name) return AttackSpec{std::string(a.name), a.family, a.edit, a.para};
  }
  throw UsageError(fmt::format("unknown attack '{}'", name));
}

std::string_view AttackSpec::category() const {
  switch (family) {
    case AttackFamily::identity: return "Control";
    case AttackFamily::edit: return "Edit";
    case AttackFamily::para: return "Para";
    case AttackFamily::icl:
    case AttackFamily::prompt_para:
    case AttackFamily::cs: return "Prompt";
    case AttackFamily::cogen_typo:
    case AttackFamily::cogen_emoji: return "CoGen";
  }
  return "?";
}

bool AttackSpec::generative() const {
  return family == AttackFamily::icl || family == AttackFamily::prompt_para || family == AttackFamily::cs ||
         family == AttackFamily::cogen_typo || family == AttackFamily::cogen_emoji;
}

const std::vector<std::string>& attack_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& a : kAttacks) v.emplace_back(a.name);
    return v;
  }();
  return names;
}

AttackGrid parse_grid(std::string_view s) {
  AttackGrid g;
  const auto eq = s.find('=');
  g.attack = AttackSpec::parse(s.substr(0, eq));
  if (eq == std::string_view::npos) {
    g.levels = {1.0};
    return g;
  }
  std::string_view rest = s.substr(eq + 1);
  while (true) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size() || !std::isfinite(v)) {
      throw UsageError(fmt::format("bad budget level '{}' in '{}'", item, s));
    }
    if (v < 0.0 || v > 1.0) throw UsageError(fmt::format("budget level {} in '{}' is outside [0, 1]", v, s));
    if (std::find(g.levels.begin(), g.levels.end(), v) != g.levels.end()) {
      throw UsageError(fmt::format("duplicate budget level {} in '{}'", v, s));
    }
    g.levels.push_back(v);
    if (comma == std::string_view::npos) break;
    rest = rest.substr(comma + 1);
  }
  return g;
}

std::string cell_key(const AttackSpec& attack, double level) { return fmt::format("{}@{}", attack.name, level); }

void parallel_for(std::size_t n, std::size_t workers, const backend::BackendFactory& factory,
                  const std::function<void(std::size_t, backend::Backend&)>& fn) {
  if (n == 0) return;
  workers = std::max<std::size_t>(1, std::min(workers, n));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    try {
      auto backend = factory();
      for (std::size_t i = next++; i < n; i = next++) fn(i, *backend);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = n;
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);
}

std::uint64_t generation_seed(std::uint64_t seed, std::string_view id) { return derive_seed(seed, "gen", id); }

std::string mgt_id(std::string_view source_id) { return fmt::format("mgt-{}", source_id); }

std::string compose(std::string_view prompt, std::string_view continuation) {
  if (continuation.empty()) return std::string(prompt);
  if (prompt.empty()) return std::string(continuation);
  return fmt::format("{} {}", prompt, continuation);
}

namespace {

toylm::GenerateOptions base_options(const Context& ctx, std::string_view id, bool watermarked) {
  toylm::GenerateOptions o;
  o.sampling = ctx.settings.sampling;
  o.seed = generation_seed(ctx.settings.seed, id);
  if (watermarked) {
    if (!ctx.greens) throw UsageError("watermarked generation needs a watermark configuration");
    const watermark::GreenList* greens = ctx.greens;
    o.logits_hook = [greens](std::span<const toylm::TokenId> h, std::span<double> logits) { greens->bias(h, logits); };
  }
  return o;
}

std::string continue_prompt(const Context& ctx, backend::Backend& backend, std::string_view prompt,
                            std::string_view id, bool watermarked) {
  if (ctx.external) {
    if (watermarked) throw UsageError("watermarked generation needs the builtin backend");
    return backend.generate(prompt, ctx.settings.sampling, generation_seed(ctx.settings.seed, id)).text;
  }
  return ctx.model.generate(prompt, base_options(ctx, id, watermarked)).text;
}

}  // namespace

std::vector<corpus::Document> generate_set(const Context& ctx, const std::vector<corpus::Prompt>& prompts,
                                           bool watermarked) {
  std::vector<corpus::Document> out(prompts.size());
  parallel_for(prompts.size(), ctx.settings.workers, ctx.factory, [&](std::size_t i, backend::Backend& backend) {
    corpus::Document d;
    d.id = mgt_id(prompts[i].doc_id);
    d.label = corpus::Label::MGT;
    d.prompt = prompts[i].text;
    d.generator_tag = ctx.external ? "external" : (watermarked ? "toylm+wm" : "toylm");
    d.text = compose(d.prompt, continue_prompt(ctx, backend, d.prompt, d.id, watermarked));
    out[i] = std::move(d);
  });
  return out;
}

Outcome attack_document(const Context& ctx, backend::Backend& backend, const AttackSpec& attack, double level,
                        const std::vector<corpus::Document>& mgts, std::size_t index, bool watermarked) {
  const auto& doc = mgts.at(index);
  const auto& s = ctx.settings;
  const std::uint64_t seed = derive_seed(s.seed, cell_key(attack, level), doc.id);
  Outcome out;
  try {
    switch (attack.family) {
      case AttackFamily::identity:
        out.text = doc.text;
        return out;
      case AttackFamily::edit: {
        attacks::EditAttackConfig c;
        c.kind = attack.edit_kind;
        c.per_word_probability = level;
        c.seed = seed;
        c.letter_frequency_weighting = s.letter_frequency_weighting;
        out.text = attacks::apply_edit_attack(doc.text, c, ctx.homoglyphs).text;
        return out;
      }
      case AttackFamily::para: {
        attacks::ParaAttackConfig c;
        c.kind = attack.para_kind;
        c.rate = level;
        c.span_len = s.span_len;
        c.lex_diversity = s.lex_diversity;
        c.order_diversity = s.order_diversity;
        c.seed = seed;
        out.text = attacks::apply_para_attack(doc.text, c, ctx.dictionary, backend).text;
        return out;
      }
      default:
        break;
    }
    if (doc.prompt.empty()) throw DataError(fmt::format("document '{}' has no prompt to regenerate from", doc.id));
    std::string continuation;
    switch (attack.family) {
      case AttackFamily::icl: {
        if (ctx.icl_pool.empty()) throw UsageError("the icl attack needs human-written example texts");
        attacks::IclPromptSpec spec;
        spec.instruction = std::string(attacks::kIclInstruction);
        spec.positive_example = ctx.icl_pool[derive_seed(seed, "icl") % ctx.icl_pool.size()].text;
        spec.negative_example = mgts[(index + 1) % mgts.size()].text;
        spec.prompt = doc.prompt;
        continuation = continue_prompt(ctx, backend, attacks::build_icl_prompt(spec), doc.id, watermarked);
        break;
      }
      case AttackFamily::prompt_para: {
        const auto p = attacks::paraphrase_prompt(doc.prompt, backend, seed);
        continuation = continue_prompt(ctx, backend, p.text, doc.id, watermarked);
        break;
      }
      case AttackFamily::cs:
        if (ctx.external) {
          if (watermarked) throw UsageError("watermarked generation needs the builtin backend");
          continuation = attacks::cs_generate(backend, doc.prompt, s.cs_rule, s.sampling,
                                              generation_seed(s.seed, doc.id)).recovered;
        } else {
          continuation = attacks::cs_generate(ctx.model, doc.prompt, s.cs_rule,
                                              base_options(ctx, doc.id, watermarked)).recovered;
        }
        break;
      case AttackFamily::cogen_typo:
      case AttackFamily::cogen_emoji: {
        if (ctx.external) throw UsageError("co-generation attacks need decoding access (builtin backend)");
        attacks::CogenConfig c;
        c.kind = attack.family == AttackFamily::cogen_typo ? attacks::CogenKind::typo : attacks::CogenKind::emoji;
        c.rule = s.cogen_rule;
        c.emoji_probability = level;
        c.emoji_list = s.emoji_list;
        c.seed = seed;
        auto o = base_options(ctx, doc.id, watermarked);
        o.extras_in_hook_history = s.emoji_in_hash_chain;
        continuation = attacks::cogen_generate(ctx.model, doc.prompt, c, o).cleaned;
        break;
      }
      default:
        break;
    }
    out.text = compose(doc.prompt, continuation);
  } catch (const UsageError&) {
    throw;
  } catch (const BackendError& e) {
    out.error = error_text(e);
  } catch (const DataError& e) {
    out.error = error_text(e);
  }
  return out;
}

std::vector<Outcome> attack_set(const Context& ctx, const AttackSpec& attack, double level,
                                const std::vector<corpus::Document>& mgts, bool watermarked) {
  std::vector<Outcome> out(mgts.size());
  parallel_for(mgts.size(), ctx.settings.workers, ctx.factory, [&](std::size_t i, backend::Backend& backend) {
    out[i] = attack_document(ctx, backend, attack, level, mgts, i, watermarked);
  });
  return out;
}

std::vector<std::vector<ScoreOutcome>> score_texts(const Context& ctx,
                                                   const std::vector<detectors::DetectorSpec>& dets,
                                                   const std::vector<std::string>& ids,
                                                   const std::vector<std::optional<std::string>>& texts) {
  if (ids.size() != texts.size()) throw UsageError("score_texts: ids and texts differ in length");
  std::vector<std::vector<ScoreOutcome>> out(dets.size(), std::vector<ScoreOutcome>(texts.size()));
  const bool any_metric = std::any_of(dets.begin(), dets.end(), [](const auto& d) { return d.metric(); });
  parallel_for(texts.size(), ctx.settings.workers, ctx.factory, [&](std::size_t i, backend::Backend& backend) {
    if (!texts[i]) return;
    const std::string& text = *texts[i];
    std::optional<toylm::ScoreResult> scored;
    std::string score_error;
    if (any_metric) {
      try {
        scored = backend.score(text);
      } catch (const BackendError& e) {
        score_error = error_text(e);
      }
    }
    for (std::size_t d = 0; d < dets.size(); ++d) {
      auto& slot = out[d][i];
      const auto& spec = dets[d];
      try {
        switch (spec.family) {
          case detectors::Family::detectgpt: {
            detectors::DetectGptConfig c;
            c.n_perturbations = spec.n_perturbations;
            c.mode = spec.mode;
            c.mask_ratio = ctx.settings.mask_ratio;
            c.span_len = ctx.settings.mask_span_len;
            c.seed = derive_seed(ctx.settings.seed, "detectgpt", ids[i]);
            std::optional<detectors::PatchConfig> patch;
            if (spec.patched) patch = ctx.settings.patch;
            slot.score = detectors::detect_gpt(text, ctx.model, c, patch);
            break;
          }
          case detectors::Family::watermark:
            if (!ctx.greens) throw UsageError("the watermark detector needs a watermark configuration");
            slot.score = watermark::detect(text, *ctx.greens, ctx.model.vocab()).z;
            break;
          default:
            if (!scored) {
              slot.error = score_error;
              break;
            }
            slot.score = detectors::metric_score(spec, *scored);
        }
      } catch (const DataError& e) {
        slot.error = error_text(e);
      }
    }
  });
  return out;
}

std::optional<eval::BudgetStats> budget_stats(const Context& ctx, const std::vector<std::string>& originals,
                                              const std::vector<std::optional<std::string>>& attacked) {
  const std::size_t n = originals.size();
  std::vector<std::optional<budget::BudgetReport>> reports(n);
  parallel_for(n, ctx.settings.workers, ctx.factory, [&](std::size_t i, backend::Backend& backend) {
    if (!attacked[i]) return;
    auto r = budget::measure(originals[i], *attacked[i], ctx.settings.accounting);
    try {
      const auto scored = backend.score(*attacked[i]);
      if (!scored.tokens.empty()) {
        std::vector<double> lp;
        for (const auto& t : scored.tokens) lp.push_back(t.logprob);
        r.perplexity = budget::perplexity(lp);
      }
    } catch (const BackendError&) {
    }
    reports[i] = r;
  });
  std::vector<double> ed;
  double jaro = 0.0, cosine = 0.0, ppl = 0.0;
  std::size_t n_ppl = 0;
  for (const auto& r : reports) {
    if (!r) continue;
    ed.push_back(static_cast<double>(r->edit_distance));
    jaro += r->jaro;
    cosine += r->ngram_cosine;
    if (r->perplexity) {
      ppl += *r->perplexity;
      ++n_ppl;
    }
  }
  if (ed.empty()) return std::nullopt;
  eval::BudgetStats b;
  const double m = static_cast<double>(ed.size());
  for (double v : ed) b.edit_distance_mean += v;
  b.edit_distance_mean /= m;
  std::sort(ed.begin(), ed.end());
  b.edit_distance_median = ed.size() % 2 ? ed[ed.size() / 2] : (ed[ed.size() / 2 - 1] + ed[ed.size() / 2]) / 2.0;
  b.jaro_mean = jaro / m;
  b.ngram_cosine_mean = cosine / m;
  if (n_ppl > 0) b.perplexity_mean = ppl / static_cast<double>(n_ppl);
  return b;
}

eval::SweepCell assemble_cell(const CellInput& in, std::optional<double> threshold) {
  eval::SweepCell c;
  c.detector = in.detector;
  c.category = in.category;
  c.attack = in.attack;
  c.level = in.level;
  c.budget = in.budget;
  c.complete = in.attack_failures == 0;
  std::vector<double> pos, neg;
  for (const auto& s : in.pos) {
    if (s.score) pos.push_back(*s.score);
    else if (!s.error.empty()) c.complete = false;
  }
  for (const auto& s : in.neg) {
    if (s.score) neg.push_back(*s.score);
    else c.complete = false;
  }
  if (!pos.empty() && !neg.empty()) {
    c.result = eval::evaluate(pos, neg, threshold);
    if (in.attack == "none") c.relative_auc = 100.0;
    else if (in.baseline_auc && *in.baseline_auc > 0.0) c.relative_auc = 100.0 * c.result->auc_roc / *in.baseline_auc;
  } else {
    c.complete = false;
  }
  return c;
}

std::vector<eval::SweepCell> run_sweep(const Context& ctx, const std::vector<corpus::Document>& hwt,
                                       const std::vector<corpus::Document>& plain,
                                       const std::vector<corpus::Document>& watermarked,
                                       const std::vector<detectors::DetectorSpec>& dets,
                                       const std::vector<AttackGrid>& grids) {
  auto ids_of = [](const std::vector<corpus::Document>& docs) {
    std::vector<std::string> v;
    for (const auto& d : docs) v.push_back(d.id);
    return v;
  };
  auto texts_of = [](const std::vector<corpus::Document>& docs) {
    std::vector<std::string> v;
    for (const auto& d : docs) v.push_back(d.text);
    return v;
  };
  auto optional_texts = [](const std::vector<std::string>& v) {
    return std::vector<std::optional<std::string>>(v.begin(), v.end());
  };

  const auto neg = score_texts(ctx, dets, ids_of(hwt), optional_texts(texts_of(hwt)));
  std::vector<std::vector<eval::SweepCell>> per_detector(dets.size());

  for (bool wm : {false, true}) {
    std::vector<detectors::DetectorSpec> set_dets;
    std::vector<std::size_t> index;
    for (std::size_t d = 0; d < dets.size(); ++d) {
      if ((dets[d].family == detectors::Family::watermark) == wm) {
        set_dets.push_back(dets[d]);
        index.push_back(d);
      }
    }
    if (set_dets.empty()) continue;
    const auto& mgts = wm ? watermarked : plain;
    const auto ids = ids_of(mgts);
    const auto originals = texts_of(mgts);

    const auto base_scores = score_texts(ctx, set_dets, ids, optional_texts(originals));
    const auto base_budget = budget_stats(ctx, originals, optional_texts(originals));
    std::vector<std::optional<double>> baseline_auc(set_dets.size());
    for (std::size_t k = 0; k < set_dets.size(); ++k) {
      CellInput in{set_dets[k].name(), "-", "none", 0.0, 0, base_scores[k], neg[index[k]], base_budget, std::nullopt};
      auto cell = assemble_cell(in, ctx.settings.threshold);
      if (cell.result) baseline_auc[k] = cell.result->auc_roc;
      per_detector[index[k]].push_back(std::move(cell));
    }

    for (const auto& g : grids) {
      for (double level : g.levels) {
        const auto outcomes = attack_set(ctx, g.attack, level, mgts, wm);
        std::vector<std::optional<std::string>> attacked;
        std::size_t failures = 0;
        for (const auto& o : outcomes) {
          attacked.push_back(o.text);
          failures += !o.text;
        }
        const auto scores = score_texts(ctx, set_dets, ids, attacked);
        const auto b = budget_stats(ctx, originals, attacked);
        for (std::size_t k = 0; k < set_dets.size(); ++k) {
          CellInput in{set_dets[k].name(), std::string(g.attack.category()), g.attack.name, level, failures,
                       scores[k], neg[index[k]], b, baseline_auc[k]};
          per_detector[index[k]].push_back(assemble_cell(in, ctx.settings.threshold));
        }
      }
    }
  }
  std::vector<eval::SweepCell> cells;
  for (auto& v : per_detector) {
    for (auto& c : v) cells.push_back(std::move(c));
  }
  return cells;
}

}  // namespace mgt::sweep
