#include "mgt/commands.hpp"

#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>

#include "mgt/bridge.hpp"
#include "mgt/error.hpp"
#include "mgt/rng.hpp"

namespace mgt::commands {
namespace fs = std::filesystem;

std::vector<std::string> default_attacks() {
  return {"typo_mixed=0.02,0.05,0.1,0.2", "homoglyph=0.05,0.1,0.2", "format_zws=0.1,0.2",
          "syn_free=0.1,0.3,0.5",         "span=0.1,0.2",           "inter_sent=0.5,1",
          "icl",                          "prompt_para",            "cs",
          "cogen_typo",                   "cogen_emoji=0.5,1"};
}

std::vector<std::string> default_detectors() { return {"gltr", "rank", "logrank", "entropy", "detectgpt-10d"}; }

namespace {

std::vector<sweep::AttackGrid> grids_of(const RunConfig& c) {
  std::vector<sweep::AttackGrid> out;
  std::set<std::string> names;
  for (const auto& a : c.attacks.empty() ? default_attacks() : c.attacks) {
    auto g = sweep::parse_grid(a);
    if (!names.insert(g.attack.name).second) throw UsageError(fmt::format("attack '{}' listed twice", g.attack.name));
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<detectors::DetectorSpec> detectors_of(const RunConfig& c) {
  std::vector<detectors::DetectorSpec> out;
  std::set<std::string> names;
  for (const auto& d : c.detectors.empty() ? default_detectors() : c.detectors) {
    auto spec = detectors::DetectorSpec::parse(d);
    if (!names.insert(spec.name()).second) throw UsageError(fmt::format("detector '{}' listed twice", spec.name()));
    out.push_back(spec);
  }
  return out;
}

bool wants_watermark(const RunConfig& c, const std::vector<detectors::DetectorSpec>& dets) {
  return c.watermark || std::any_of(dets.begin(), dets.end(), [](const auto& d) {
           return d.family == detectors::Family::watermark;
         });
}

bool wants_wm_detector(const std::vector<detectors::DetectorSpec>& dets) {
  return std::any_of(dets.begin(), dets.end(), [](const auto& d) { return d.family == detectors::Family::watermark; });
}

bool wants_plain(const std::vector<detectors::DetectorSpec>& dets) {
  return std::any_of(dets.begin(), dets.end(), [](const auto& d) { return d.family != detectors::Family::watermark; });
}

// Everything the commands share: model, dictionary, data and worker context.
struct Workspace {
  explicit Workspace(const RunConfig& c) : config(c) {
    validate(c);
    dets = detectors_of(c);
    grids = grids_of(c);
    const auto train = corpus::load_dataset(c.train, corpus::Split::train);
    icl_pool = train.with_label(corpus::Label::HWT);
    if (!c.model.empty()) {
      model.emplace(toylm::NGramModel::load(c.model));
    } else {
      std::vector<std::string> texts;
      for (const auto& d : icl_pool) texts.push_back(d.text);
      if (texts.empty()) throw DataError(fmt::format("{} has no human-written training text", c.train.string()));
      model.emplace(toylm::NGramModel::train_texts(texts, c.order, c.alpha));
    }
    dictionary = attacks::SynonymDictionary::load(c.dictionary);
    if (!c.homoglyphs.empty()) homoglyphs.emplace(attacks::HomoglyphTable::load(c.homoglyphs));
    const auto test = corpus::load_dataset(c.test, corpus::Split::test);
    hwt = test.with_label(corpus::Label::HWT);
    if (c.max_docs > 0 && hwt.size() > c.max_docs) hwt.resize(c.max_docs);
    if (hwt.empty()) throw DataError(fmt::format("{} has no human-written documents", c.test.string()));
    if (wants_watermark(c, dets)) greens.emplace(c.wm, model->vocab().size());

    backend::BackendFactory factory;
    const bool external = !c.backend_cmd.empty();
    if (external) {
      factory = [cmd = c.backend_cmd] { return std::make_unique<backend::ExternalBackend>(cmd); };
    } else {
      const auto mode = c.paraphraser == "echo" ? backend::ParaphraseMode::echo : backend::ParaphraseMode::toy;
      factory = [this, mode] { return std::make_unique<backend::ToyBackend>(*model, dictionary, mode); };
    }
    ctx = std::make_unique<sweep::Context>(sweep::Context{
        .model = *model,
        .dictionary = dictionary,
        .homoglyphs = homoglyphs ? *homoglyphs : attacks::HomoglyphTable::builtin(),
        .factory = std::move(factory),
        .external = external,
        .icl_pool = icl_pool,
        .greens = greens ? &*greens : nullptr,
        .settings = c.settings,
    });
  }

  std::vector<corpus::Document> generate(bool watermarked) const {
    const auto prompts = corpus::derive_prompts(corpus::Dataset{corpus::Split::test, hwt}, config.settings.prompt_tokens);
    if (config.cogen == "none") return sweep::generate_set(*ctx, prompts, watermarked);
    const auto attack = sweep::AttackSpec::parse(config.cogen == "typo" ? "cogen_typo" : "cogen_emoji");
    std::vector<corpus::Document> seeds;
    for (const auto& p : prompts) {
      corpus::Document d;
      d.id = sweep::mgt_id(p.doc_id);
      d.label = corpus::Label::MGT;
      d.prompt = p.text;
      d.text = p.text;
      seeds.push_back(std::move(d));
    }
    const double level = config.cogen == "typo" ? 1.0 : config.emoji_probability;
    const auto outcomes = sweep::attack_set(*ctx, attack, level, seeds, watermarked);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      if (!outcomes[i].text) throw BackendError(fmt::format("generation for '{}' failed: {}", seeds[i].id, outcomes[i].error));
      seeds[i].text = *outcomes[i].text;
      seeds[i].generator_tag = fmt::format("toylm{}+{}", watermarked ? "+wm" : "", attack.name);
    }
    return seeds;
  }

  const RunConfig& config;
  std::vector<detectors::DetectorSpec> dets;
  std::vector<sweep::AttackGrid> grids;
  std::optional<toylm::NGramModel> model;
  attacks::SynonymDictionary dictionary;
  std::optional<attacks::HomoglyphTable> homoglyphs;
  std::optional<watermark::GreenList> greens;
  std::vector<corpus::Document> icl_pool;
  std::vector<corpus::Document> hwt;
  std::unique_ptr<sweep::Context> ctx;
};

std::string_view set_name(bool wm) { return wm ? "wm" : "plain"; }

fs::path mgt_path(const RunConfig& c, bool wm) { return c.out / (wm ? "mgt_wm.jsonl" : "mgt.jsonl"); }

fs::path attacked_path(const RunConfig& c, bool wm, const std::string& cell) {
  return c.out / "attacked" / set_name(wm) / (cell + ".jsonl");
}

fs::path score_path(const RunConfig& c, const detectors::DetectorSpec& d, std::optional<bool> wm, const std::string& name) {
  fs::path p = c.out / "scores" / d.name();
  if (wm) p /= set_name(*wm);
  return p / (name + ".tsv");
}

fs::path failed_path(fs::path p) { return p.replace_extension(".failed"); }

void write_failures(const fs::path& path, const std::vector<std::pair<std::string, std::string>>& failures) {
  if (failures.empty()) {
    fs::remove(path);
    return;
  }
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  for (const auto& [id, err] : failures) out << id << '\t' << err << '\n';
  if (!out) throw DataError(fmt::format("failed writing {}", path.string()));
}

std::map<std::string, std::string> read_failures(const fs::path& path) {
  std::map<std::string, std::string> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(fmt::format("{}: malformed failure line", path.string()));
    out[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return out;
}

std::vector<corpus::Document> load_mgts(const RunConfig& c, bool wm) {
  const fs::path p = mgt_path(c, wm);
  if (!fs::exists(p)) throw DataError(fmt::format("{} not found; run generate first", p.string()));
  auto docs = corpus::load_dataset(p, corpus::Split::test).documents;
  if (docs.empty()) throw DataError(fmt::format("{} is empty", p.string()));
  return docs;
}

std::vector<std::optional<std::string>> load_attacked(const RunConfig& c, bool wm, const std::string& cell,
                                                      const std::vector<corpus::Document>& mgts, std::size_t& failures) {
  const fs::path p = attacked_path(c, wm, cell);
  if (!fs::exists(p)) throw DataError(fmt::format("{} not found; run attack first", p.string()));
  std::map<std::string, std::string> texts;
  for (auto& d : corpus::load_dataset(p, corpus::Split::test).documents) texts[d.id] = std::move(d.text);
  const auto failed = read_failures(failed_path(p));
  std::vector<std::optional<std::string>> out;
  failures = 0;
  for (const auto& m : mgts) {
    if (auto it = texts.find(m.id); it != texts.end()) {
      out.emplace_back(it->second);
    } else if (failed.contains(m.id)) {
      out.emplace_back();
      ++failures;
    } else {
      throw DataError(fmt::format("{} lacks document '{}'; rerun attack", p.string(), m.id));
    }
  }
  return out;
}

std::vector<std::string> ids_of(const std::vector<corpus::Document>& docs) {
  std::vector<std::string> v;
  for (const auto& d : docs) v.push_back(d.id);
  return v;
}

std::vector<std::optional<std::string>> texts_of(const std::vector<corpus::Document>& docs) {
  std::vector<std::optional<std::string>> v;
  for (const auto& d : docs) v.emplace_back(d.text);
  return v;
}

void save_scores(const fs::path& path, const detectors::DetectorSpec& d, const std::vector<std::string>& ids,
                 const std::vector<sweep::ScoreOutcome>& scores) {
  std::vector<std::pair<std::string, double>> ok;
  std::vector<std::pair<std::string, std::string>> failed;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (scores[i].score) ok.emplace_back(ids[i], *scores[i].score);
    else if (!scores[i].error.empty()) failed.emplace_back(ids[i], scores[i].error);
  }
  detectors::write_scores(path, d.name(), ok);
  write_failures(failed_path(path), failed);
}

std::vector<sweep::ScoreOutcome> load_scores(const fs::path& path, const std::vector<std::string>& ids,
                                             const std::vector<std::optional<std::string>>& texts) {
  if (!fs::exists(path)) throw DataError(fmt::format("{} not found; run detect first", path.string()));
  const std::set<std::string> known(ids.begin(), ids.end());
  const auto scores = detectors::ingest_external_scores(path, &known);
  const auto failed = read_failures(failed_path(path));
  std::vector<sweep::ScoreOutcome> out(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!texts[i]) continue;
    if (auto it = scores.scores.find(ids[i]); it != scores.scores.end()) out[i].score = it->second;
    else if (auto f = failed.find(ids[i]); f != failed.end()) out[i].error = f->second;
    else throw DataError(fmt::format("{} lacks a score for '{}'; rerun detect", path.string(), ids[i]));
  }
  return out;
}

void write_reports(const RunConfig& c, const std::vector<eval::SweepCell>& cells, std::ostream& log) {
  fs::create_directories(c.out);
  {
    std::ofstream out(c.out / "cells.csv", std::ios::binary);
    eval::write_cells_csv(out, cells);
  }
  std::vector<std::string> warnings;
  const auto rows = eval::build_leaderboard(cells, &warnings);
  for (const auto& w : warnings) log << "warning: " << w << '\n';
  {
    std::ofstream out(c.out / "leaderboard.csv", std::ios::binary);
    eval::write_leaderboard(out, rows);
  }
  {
    std::ofstream out(c.out / "plot.csv", std::ios::binary);
    eval::write_plot_data(out, cells, eval::parse_plot_metric(c.plot_metric));
  }
  std::size_t incomplete = 0;
  for (const auto& cell : cells) incomplete += !cell.complete;
  log << fmt::format("eval: {} cells ({} incomplete) written to {}\n", cells.size(), incomplete, (c.out / "cells.csv").string());
}

}  // namespace

void validate(const RunConfig& c) {
  (void)grids_of(c);
  (void)detectors_of(c);
  if (c.order < 2) throw UsageError("model order must be at least 2");
  if (!(c.alpha > 0.0)) throw UsageError("smoothing alpha must be positive");
  if (c.paraphraser != "toy" && c.paraphraser != "echo") throw UsageError(fmt::format("unknown paraphraser '{}'", c.paraphraser));
  if (c.cogen != "none" && c.cogen != "typo" && c.cogen != "emoji") throw UsageError(fmt::format("unknown co-generation mode '{}'", c.cogen));
  if (!(c.emoji_probability >= 0.0 && c.emoji_probability <= 1.0)) throw UsageError("emoji probability must be in [0, 1]");
  (void)eval::parse_plot_metric(c.plot_metric);
  c.settings.sampling.validate();
  c.settings.patch.validate();
  if (c.settings.prompt_tokens == 0) throw UsageError("prompt length must be at least one token");
  if (!(c.settings.mask_ratio >= 0.0 && c.settings.mask_ratio <= 1.0)) throw UsageError("mask ratio must be in [0, 1]");
  if (c.settings.mask_span_len == 0 || c.settings.span_len == 0) throw UsageError("span lengths must be at least 1");
  for (const auto& d : c.patch_detectors) {
    const auto spec = detectors::DetectorSpec::parse(d);
    if (spec.family != detectors::Family::detectgpt || spec.patched) {
      throw UsageError(fmt::format("patch comparison needs an unpatched detectgpt detector, got '{}'", d));
    }
  }
}

void cmd_generate(const RunConfig& config, std::ostream& log) {
  Workspace ws(config);
  for (bool wm : {false, true}) {
    if (wm ? !ws.greens : !wants_plain(ws.dets)) continue;
    corpus::Dataset ds{corpus::Split::test, ws.generate(wm)};
    corpus::save_dataset(ds, mgt_path(config, wm));
    log << fmt::format("generate: wrote {} documents to {}\n", ds.documents.size(), mgt_path(config, wm).string());
  }
}

void cmd_attack(const RunConfig& config, std::ostream& log) {
  Workspace ws(config);
  for (bool wm : {false, true}) {
    if (wm ? !wants_wm_detector(ws.dets) : !wants_plain(ws.dets)) continue;
    const auto mgts = load_mgts(config, wm);
    for (const auto& g : ws.grids) {
      for (double level : g.levels) {
        const std::string cell = sweep::cell_key(g.attack, level);
        const auto outcomes = sweep::attack_set(*ws.ctx, g.attack, level, mgts, wm);
        corpus::Dataset ds{corpus::Split::test, {}};
        std::vector<std::pair<std::string, std::string>> failed;
        for (std::size_t i = 0; i < mgts.size(); ++i) {
          if (!outcomes[i].text) {
            failed.emplace_back(mgts[i].id, outcomes[i].error);
            continue;
          }
          corpus::Document d = mgts[i];
          d.text = *outcomes[i].text;
          d.generator_tag = fmt::format("{}+{}", mgts[i].generator_tag, cell);
          ds.documents.push_back(std::move(d));
        }
        const fs::path p = attacked_path(config, wm, cell);
        corpus::save_dataset(ds, p);
        write_failures(failed_path(p), failed);
        log << fmt::format("attack: {} {} -> {} documents, {} failed\n", set_name(wm), cell, ds.documents.size(), failed.size());
      }
    }
  }
}

void cmd_detect(const RunConfig& config, std::ostream& log) {
  Workspace ws(config);
  const auto hwt_ids = ids_of(ws.hwt);
  const auto neg = sweep::score_texts(*ws.ctx, ws.dets, hwt_ids, texts_of(ws.hwt));
  for (std::size_t d = 0; d < ws.dets.size(); ++d) save_scores(score_path(config, ws.dets[d], std::nullopt, "hwt"), ws.dets[d], hwt_ids, neg[d]);
  for (bool wm : {false, true}) {
    std::vector<detectors::DetectorSpec> dets;
    for (const auto& d : ws.dets) {
      if ((d.family == detectors::Family::watermark) == wm) dets.push_back(d);
    }
    if (dets.empty()) continue;
    const auto mgts = load_mgts(config, wm);
    const auto ids = ids_of(mgts);
    const auto base = sweep::score_texts(*ws.ctx, dets, ids, texts_of(mgts));
    for (std::size_t d = 0; d < dets.size(); ++d) save_scores(score_path(config, dets[d], wm, "baseline"), dets[d], ids, base[d]);
    for (const auto& g : ws.grids) {
      for (double level : g.levels) {
        const std::string cell = sweep::cell_key(g.attack, level);
        std::size_t failures = 0;
        const auto attacked = load_attacked(config, wm, cell, mgts, failures);
        const auto scores = sweep::score_texts(*ws.ctx, dets, ids, attacked);
        for (std::size_t d = 0; d < dets.size(); ++d) save_scores(score_path(config, dets[d], wm, cell), dets[d], ids, scores[d]);
      }
    }
    log << fmt::format("detect: scored the {} set under {} detectors\n", set_name(wm), dets.size());
  }
}

void cmd_eval(const RunConfig& config, std::ostream& log) {
  Workspace ws(config);
  if (config.fused) {
    std::vector<corpus::Document> plain, watermarked;
    if (wants_plain(ws.dets)) plain = ws.generate(false);
    if (wants_wm_detector(ws.dets)) watermarked = ws.generate(true);
    write_reports(config, sweep::run_sweep(*ws.ctx, ws.hwt, plain, watermarked, ws.dets, ws.grids), log);
    return;
  }
  const auto hwt_ids = ids_of(ws.hwt);
  const auto hwt_texts = texts_of(ws.hwt);
  std::vector<std::vector<eval::SweepCell>> per_detector(ws.dets.size());
  for (bool wm : {false, true}) {
    std::vector<std::size_t> index;
    for (std::size_t d = 0; d < ws.dets.size(); ++d) {
      if ((ws.dets[d].family == detectors::Family::watermark) == wm) index.push_back(d);
    }
    if (index.empty()) continue;
    const auto mgts = load_mgts(config, wm);
    const auto ids = ids_of(mgts);
    const auto originals = texts_of(mgts);
    std::vector<std::string> original_texts;
    for (const auto& m : mgts) original_texts.push_back(m.text);
    const auto base_budget = sweep::budget_stats(*ws.ctx, original_texts, originals);
    std::vector<std::optional<double>> baseline_auc(ws.dets.size());
    for (std::size_t d : index) {
      const auto& spec = ws.dets[d];
      sweep::CellInput in{spec.name(), "-", "none", 0.0, 0,
                          load_scores(score_path(config, spec, wm, "baseline"), ids, originals),
                          load_scores(score_path(config, spec, std::nullopt, "hwt"), hwt_ids, hwt_texts), base_budget,
                          std::nullopt};
      auto cell = sweep::assemble_cell(in, config.settings.threshold);
      if (cell.result) baseline_auc[d] = cell.result->auc_roc;
      per_detector[d].push_back(std::move(cell));
    }
    for (const auto& g : ws.grids) {
      for (double level : g.levels) {
        const std::string key = sweep::cell_key(g.attack, level);
        std::size_t failures = 0;
        const auto attacked = load_attacked(config, wm, key, mgts, failures);
        const auto b = sweep::budget_stats(*ws.ctx, original_texts, attacked);
        for (std::size_t d : index) {
          const auto& spec = ws.dets[d];
          sweep::CellInput in{spec.name(), std::string(g.attack.category()), g.attack.name, level, failures,
                              load_scores(score_path(config, spec, wm, key), ids, attacked),
                              load_scores(score_path(config, spec, std::nullopt, "hwt"), hwt_ids, hwt_texts), b,
                              baseline_auc[d]};
          per_detector[d].push_back(sweep::assemble_cell(in, config.settings.threshold));
        }
      }
    }
  }
  std::vector<eval::SweepCell> cells;
  for (auto& v : per_detector) {
    for (auto& c : v) cells.push_back(std::move(c));
  }
  write_reports(config, cells, log);
}

void cmd_patch_compare(const RunConfig& config, std::ostream& log) {
  Workspace ws(config);
  const auto grid = sweep::parse_grid(config.patch_attack);
  const auto mgts = ws.generate(false);
  const auto ids = ids_of(mgts);
  const auto hwt_ids = ids_of(ws.hwt);
  std::vector<detectors::DetectorSpec> dets;
  for (const auto& name : config.patch_detectors) {
    auto spec = detectors::DetectorSpec::parse(name);
    dets.push_back(spec);
    spec.patched = true;
    dets.push_back(spec);
  }
  const auto neg = sweep::score_texts(*ws.ctx, dets, hwt_ids, texts_of(ws.hwt));
  const auto before = sweep::score_texts(*ws.ctx, dets, ids, texts_of(mgts));
  auto values = [](const std::vector<sweep::ScoreOutcome>& v) {
    std::vector<double> out;
    for (const auto& s : v) {
      if (s.score) out.push_back(*s.score);
    }
    return out;
  };
  auto auc = [&](const std::vector<sweep::ScoreOutcome>& pos, const std::vector<sweep::ScoreOutcome>& n) {
    const auto p = values(pos), q = values(n);
    if (p.empty() || q.empty()) return std::string("-");
    return fmt::format("{:.4f}", eval::roc_auc(p, q));
  };
  fs::create_directories(config.out);
  std::ofstream out(config.out / "patch_compare.csv", std::ios::binary);
  out << fmt::format("# patch excludes the lowest {} of token probabilities\n", config.settings.patch.k_percent);
  out << "detector,attack,level,before_attack,after_attack,with_patch\n";
  for (double level : grid.levels) {
    const auto outcomes = sweep::attack_set(*ws.ctx, grid.attack, level, mgts, false);
    std::vector<std::optional<std::string>> attacked;
    for (const auto& o : outcomes) attacked.push_back(o.text);
    const auto after = sweep::score_texts(*ws.ctx, dets, ids, attacked);
    for (std::size_t d = 0; d < dets.size(); d += 2) {
      const std::string line = fmt::format("{},{},{},{},{},{}", dets[d].name(), grid.attack.name, level,
                                           auc(before[d], neg[d]), auc(after[d], neg[d]), auc(after[d + 1], neg[d + 1]));
      out << line << '\n';
      log << "patch-compare: " << line << '\n';
    }
  }
}

void cmd_leaderboard(const RunConfig& config, std::ostream& out, std::ostream& log) {
  const fs::path p = config.cells.empty() ? config.out / "cells.csv" : config.cells;
  std::ifstream in(p);
  if (!in) throw DataError(fmt::format("cannot open {}", p.string()));
  const auto cells = eval::read_cells_csv(in);
  if (cells.empty()) throw DataError(fmt::format("{} has no cells", p.string()));
  std::vector<std::string> warnings;
  const auto rows = eval::build_leaderboard(cells, &warnings);
  for (const auto& w : warnings) log << "warning: " << w << '\n';
  eval::write_leaderboard(out, rows);
}

namespace {

toylm::NGramModel load_model(const RunConfig& c) {
  if (!c.model.empty()) return toylm::NGramModel::load(c.model);
  std::vector<std::string> texts;
  for (const auto& d : corpus::load_dataset(c.train, corpus::Split::train).with_label(corpus::Label::HWT)) texts.push_back(d.text);
  if (texts.empty()) throw DataError(fmt::format("{} has no human-written training text", c.train.string()));
  return toylm::NGramModel::train_texts(texts, c.order, c.alpha);
}

}  // namespace

void cmd_serve(const RunConfig& config, std::istream& in, std::ostream& out) {
  const auto model = load_model(config);
  const auto dict = attacks::SynonymDictionary::load(config.dictionary);
  backend::ToyBackend b(model, dict, config.paraphraser == "echo" ? backend::ParaphraseMode::echo : backend::ParaphraseMode::toy);
  backend::serve(b, in, out);
}

std::size_t cmd_conformance(const RunConfig& config, const fs::path& transcript, bool record_mode, bool strict,
                            std::ostream& log) {
  std::optional<toylm::NGramModel> model;
  attacks::SynonymDictionary dict;
  std::unique_ptr<backend::Backend> b;
  bridge::LineChannel channel;
  if (record_mode || config.backend_cmd.empty()) {
    model.emplace(load_model(config));
    dict = attacks::SynonymDictionary::load(config.dictionary);
    b = std::make_unique<backend::ToyBackend>(*model, dict,
                                              config.paraphraser == "echo" ? backend::ParaphraseMode::echo : backend::ParaphraseMode::toy);
    channel = [&b](std::string_view line) { return backend::handle_line(*b, line); };
  } else {
    auto ext = std::make_unique<backend::ExternalBackend>(config.backend_cmd);
    auto* raw = ext.get();
    b = std::move(ext);
    channel = [raw](std::string_view line) { return raw->exchange(line); };
  }
  if (record_mode) {
    const auto t = bridge::record(channel, bridge::conformance_requests());
    bridge::save_transcript(transcript, t);
    log << fmt::format("conformance: recorded {} exchanges to {}\n", t.size(), transcript.string());
    return 0;
  }
  const auto t = bridge::load_transcript(transcript);
  const auto problems = bridge::check(t, channel, strict ? bridge::CheckMode::strict : bridge::CheckMode::shape);
  for (const auto& p : problems) log << "conformance: " << p << '\n';
  log << fmt::format("conformance: {} exchanges, {} mismatches\n", t.size(), problems.size());
  return problems.size();
}

}  // namespace mgt::commands
