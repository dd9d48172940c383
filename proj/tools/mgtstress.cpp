#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <thread>

#include "mgt/commands.hpp"
#include "mgt/error.hpp"
#include "mgt/text.hpp"

namespace {

using mgt::commands::RunConfig;

std::vector<char32_t> read_emoji_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw mgt::DataError(fmt::format("cannot open emoji list {}", path));
  std::vector<char32_t> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto cps = mgt::text::decode(line);
    std::u32string trimmed;
    for (char32_t cp : cps) {
      if (!mgt::text::is_space(cp)) trimmed.push_back(cp);
    }
    if (trimmed.empty() || trimmed[0] == U'#') continue;
    if (trimmed.size() != 1) throw mgt::DataError(fmt::format("{}:{}: expected one codepoint per line", path, line_no));
    out.push_back(trimmed[0]);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stress-test machine-generated-text detectors against attack budgets."};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "INI file; keys mirror the long flag names");
  app.config_formatter(std::make_shared<CLI::ConfigINI>());

  RunConfig cfg;
  cfg.settings.workers = std::max(1u, std::thread::hardware_concurrency());
  std::string accounting = "codepoint", seeding = "prev_token", cs_rule = "a:z", cogen_rule = "c:k";
  std::string emoji_file, transcript = std::string(MGT_DATA_DIR) + "/bridge/transcript.jsonl";
  std::optional<double> threshold;
  bool uniform_letters = false, record = false, strict = false;

  app.add_option("--seed", cfg.settings.seed, "Global seed")->capture_default_str();
  app.add_option("--workers", cfg.settings.workers, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--backend-cmd", cfg.backend_cmd, "External backend command (builtin n-gram backend when unset)");
  app.add_option("--accounting", accounting, "Edit-distance accounting")->check(CLI::IsMember({"codepoint", "byte"}))->capture_default_str();
  app.add_option("--train", cfg.train, "Training split (JSONL)")->capture_default_str();
  app.add_option("--test", cfg.test, "Evaluation split (JSONL)")->capture_default_str();
  app.add_option("--model", cfg.model, "Saved n-gram model to load instead of training");
  app.add_option("--dictionary", cfg.dictionary, "Synonym dictionary (TSV)")->capture_default_str();
  app.add_option("--homoglyphs", cfg.homoglyphs, "Homoglyph table (TSV); builtin when unset");
  app.add_option("--out", cfg.out, "Output directory")->capture_default_str();
  app.add_option("--order", cfg.order, "n-gram order")->capture_default_str();
  app.add_option("--alpha", cfg.alpha, "Additive smoothing")->capture_default_str();
  app.add_option("--max-docs", cfg.max_docs, "Use only the first N human-written test documents (0 = all)");
  app.add_option("--paraphraser", cfg.paraphraser, "Builtin paraphraser")->check(CLI::IsMember({"toy", "echo"}))->capture_default_str();
  app.add_option("--attack", cfg.attacks, "Attack grid entry name=level,level,... (repeatable)");
  app.add_option("--detector", cfg.detectors, "Detector name (repeatable)");
  app.add_option("--prompt-tokens", cfg.settings.prompt_tokens, "Prompt length in words")->capture_default_str();
  app.add_option("--max-tokens", cfg.settings.sampling.max_tokens, "Generated tokens, at most")->capture_default_str();
  app.add_option("--min-tokens", cfg.settings.sampling.min_tokens, "Generated tokens, at least")->capture_default_str();
  app.add_option("--temperature", cfg.settings.sampling.temperature, "Sampling temperature")->capture_default_str();
  app.add_option("--top-p", cfg.settings.sampling.top_p, "Nucleus mass")->capture_default_str();
  app.add_flag("--watermark", cfg.watermark, "Also generate a watermarked set");
  app.add_option("--wm-gamma", cfg.wm.gamma, "Green-list fraction")->capture_default_str();
  app.add_option("--wm-delta", cfg.wm.delta, "Green logit bias")->capture_default_str();
  app.add_option("--wm-key", cfg.wm.key, "Watermark key")->envname("MGT_WM_KEY");
  app.add_option("--wm-z", cfg.wm.z_threshold, "Detection z threshold")->capture_default_str();
  app.add_option("--wm-seeding", seeding, "Green-list seeding")->check(CLI::IsMember({"prev_token", "self_hash"}))->capture_default_str();
  app.add_option("--wm-window", cfg.wm.window, "self_hash window")->capture_default_str();
  app.add_option("--span-len", cfg.settings.span_len, "Span length of the span attack")->capture_default_str();
  app.add_option("--lex-diversity", cfg.settings.lex_diversity, "Paraphraser lexical diversity (0-100)")->capture_default_str();
  app.add_option("--order-diversity", cfg.settings.order_diversity, "Paraphraser order diversity (0-100)")->capture_default_str();
  app.add_flag("--uniform-letters", uniform_letters, "Typo positions uniform instead of letter-frequency weighted");
  app.add_option("--cs-rule", cs_rule, "Character substitution rule of the cs attack")->capture_default_str();
  app.add_option("--cogen-rule", cogen_rule, "Substitution rule of typo co-generation")->capture_default_str();
  app.add_option("--emoji-file", emoji_file, "Emoji list, one codepoint per line");
  app.add_option("--emoji-in-hash-chain", cfg.settings.emoji_in_hash_chain, "Emoji take part in watermark seeding")->capture_default_str();
  app.add_option("--mask-ratio", cfg.settings.mask_ratio, "DetectGPT mask ratio")->capture_default_str();
  app.add_option("--mask-span-len", cfg.settings.mask_span_len, "DetectGPT span length")->capture_default_str();
  app.add_option("--patch-k", cfg.settings.patch.k_percent, "Patch: fraction of lowest-probability tokens excluded")->capture_default_str();
  app.add_option("--threshold", threshold, "Decision threshold for the accuracy column");
  app.add_option("--plot-metric", cfg.plot_metric, "Budget on the plot x axis")
      ->check(CLI::IsMember({"edit_distance", "jaro", "ngram_cosine", "perplexity"}))->capture_default_str();

  auto* generate = app.add_subcommand("generate", "Generate machine texts from prompts of the test split");
  generate->add_option("--cogen", cfg.cogen, "Generate under a co-generation attack")->check(CLI::IsMember({"none", "typo", "emoji"}))->capture_default_str();
  generate->add_option("--emoji-p", cfg.emoji_probability, "Emoji probability for --cogen emoji")->capture_default_str();
  auto* attack = app.add_subcommand("attack", "Attack the generated texts at every grid level");
  auto* detect = app.add_subcommand("detect", "Score human, generated and attacked texts");
  auto* evalc = app.add_subcommand("eval", "Write cells, leaderboard and plot data");
  evalc->add_flag("--fused", cfg.fused, "Run generation, attacks and detection in memory");
  auto* patch = app.add_subcommand("patch-compare", "DetectGPT before attack, after attack and with the patch");
  patch->add_option("--patch-attack", cfg.patch_attack, "Attack grid entry")->capture_default_str();
  patch->add_option("--patch-detector", cfg.patch_detectors, "Unpatched detectgpt detector (repeatable)");
  auto* board = app.add_subcommand("leaderboard", "Rank detectors from a cells file");
  board->add_option("--cells", cfg.cells, "Cells CSV (default <out>/cells.csv)");
  auto* serve = app.add_subcommand("serve", "Serve the builtin backend on stdin/stdout");
  auto* conformance = app.add_subcommand("conformance", "Record or check the bridge conformance transcript");
  conformance->add_option("--transcript", transcript, "Transcript path")->capture_default_str();
  conformance->add_flag("--record", record, "Record from the builtin backend");
  conformance->add_flag("--strict", strict, "Require identical responses instead of identical shapes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    cfg.settings.accounting = mgt::budget::parse_accounting(accounting);
    cfg.wm.seeding = mgt::watermark::parse_seeding(seeding);
    cfg.settings.cs_rule = mgt::attacks::SubstitutionRule::parse(cs_rule);
    cfg.settings.cogen_rule = mgt::attacks::SubstitutionRule::parse(cogen_rule);
    cfg.settings.letter_frequency_weighting = !uniform_letters;
    cfg.settings.threshold = threshold;
    if (!emoji_file.empty()) cfg.settings.emoji_list = read_emoji_file(emoji_file);

    if (*generate) mgt::commands::cmd_generate(cfg, std::cerr);
    else if (*attack) mgt::commands::cmd_attack(cfg, std::cerr);
    else if (*detect) mgt::commands::cmd_detect(cfg, std::cerr);
    else if (*evalc) mgt::commands::cmd_eval(cfg, std::cerr);
    else if (*patch) mgt::commands::cmd_patch_compare(cfg, std::cerr);
    else if (*board) mgt::commands::cmd_leaderboard(cfg, std::cout, std::cerr);
    else if (*serve) mgt::commands::cmd_serve(cfg, std::cin, std::cout);
    else if (*conformance) return mgt::commands::cmd_conformance(cfg, transcript, record, strict, std::cerr) == 0 ? 0 : 3;
  } catch (const mgt::UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const mgt::DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const mgt::BackendError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
