#include "mvpforge/cli.hpp"

#include <glob.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "CLI11.hpp"
#include "commands.hpp"
#include "mvpforge/error.hpp"

namespace mvpforge::cli {

std::vector<std::filesystem::path> expand_globs(const std::vector<std::string>& patterns) {
  std::vector<std::filesystem::path> out;
  for (const auto& pattern : patterns) {
    glob_t g{};
    const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
    std::vector<std::string> found;
    if (rc == 0) {
      for (std::size_t i = 0; i < g.gl_pathc; ++i) found.emplace_back(g.gl_pathv[i]);
    }
    globfree(&g);
    if (found.empty()) {
      throw Error(ErrorKind::io, "missing-file", "no file matches '" + pattern + "'");
    }
    std::sort(found.begin(), found.end());
    for (auto& f : found) {
      if (std::find(out.begin(), out.end(), f) == out.end()) out.emplace_back(std::move(f));
    }
  }
  return out;
}

void print_json(std::ostream& out, const nlohmann::ordered_json& doc) {
  out << doc.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) << "\n";
}

double round_to(double value, int places) {
  const double scale = std::pow(10.0, places);
  return std::round(value * scale) / scale;
}

namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("MVPFORGE_SEED"); env && *env) {
    try {
      std::size_t used = 0;
      const auto seed = std::stoull(env, &used);
      if (used == std::string(env).size()) return seed;
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::config, "bad-seed", std::string("MVPFORGE_SEED is not an integer: ") + env);
  }
  return 42;
}

int exit_code_for(const Error& e) {
  return e.kind() == ErrorKind::io ? kExitIo : kExitContent;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Corpus toolkit for multi-task text-to-text NLG data", "mvpforge"};
  app.require_subcommand(1);

  RunConfig cfg;
  try {
    cfg.seed = default_seed();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitContent;
  }

  auto add_common = [&](CLI::App* sub, bool with_seed) {
    if (with_seed) {
      sub->add_option("--seed", cfg.seed, "Run seed (default 42, or $MVPFORGE_SEED)");
    }
    sub->add_option("--workers", cfg.workers, "Worker threads")->check(CLI::PositiveNumber);
  };

  UnifyFlags unify;
  auto* unify_cmd = app.add_subcommand("unify", "Convert raw datasets to unified JSONL shards");
  unify_cmd->add_option("--manifest", unify.manifest, "Dataset manifest (TSV)")->required();
  unify_cmd->add_option("--out", unify.out_dir, "Output directory")->required();
  unify_cmd->add_flag("--strict", unify.strict, "Treat malformed raw records as violations");
  unify_cmd->add_option("--carve-valid", unify.carve_valid,
                        "Fraction of train moved to valid when no valid split is listed")
      ->check(CLI::Range(0.0, 1.0));
  unify_cmd->add_option("--qg-separator", unify.qg_separator,
                        "Token between answer and paragraph in question generation")
      ->check(CLI::IsMember({"xsep", "sep"}));
  unify_cmd->add_option("--instructions", unify.instructions,
                        "JSON object overriding task instructions");
  add_common(unify_cmd, true);

  DecontamFlags decontam;
  auto* decontam_cmd =
      app.add_subcommand("decontaminate", "Drop training examples sharing n-grams with eval sets");
  decontam_cmd->add_option("--train", decontam.train, "Training JSONL files or globs")->required();
  decontam_cmd->add_option("--eval", decontam.eval, "Evaluation JSONL files or globs");
  decontam_cmd->add_option("--index", decontam.prebuilt_indexes, "Prebuilt index files");
  decontam_cmd->add_option("--out", decontam.out_dir, "Output directory")->required();
  decontam_cmd->add_option("--save-index", decontam.save_index_dir,
                           "Directory to write built indexes to");
  decontam_cmd->add_option("--percentile", decontam.percentile, "Length percentile for n");
  decontam_cmd->add_option("--min-order", decontam.min_order, "Lower bound on n");
  decontam_cmd->add_option("--max-order", decontam.max_order, "Upper bound on n");
  decontam_cmd->add_option("--batch-size", decontam.batch_size, "Examples per batch")
      ->check(CLI::PositiveNumber);
  decontam_cmd->add_flag("--verify-exact", decontam.verify_exact,
                         "Cross-check hashed decisions against exact string sets");
  add_common(decontam_cmd, true);

  MixFlags mix;
  auto* mix_cmd = app.add_subcommand("mix", "Emit a temperature-scaled multi-task stream");
  mix_cmd->add_option("--spec", mix.spec, "Mixture JSON")->required();
  mix_cmd->add_option("--out", mix.out_dir, "Output directory")->required();
  mix_cmd->add_option("--task", mix.task, "Restrict to one task family");
  mix_cmd->add_option("--temperature", mix.temperature, "Mixing temperature T");
  mix_cmd->add_option("--epoch-length", mix.epoch_length, "Examples to emit");
  mix_cmd->add_option("--size-cap", mix.size_cap, "Cap K on dataset sizes");
  mix_cmd->add_option("--shard-size", mix.shard_size, "Examples per part file (0 = one file)");
  auto* mix_seed = mix_cmd->add_option("--seed", cfg.seed, "Run seed");
  mix_cmd->add_option("--workers", cfg.workers, "Worker threads")->check(CLI::PositiveNumber);

  EvaluateFlags eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score hypotheses against references");
  eval_cmd->add_option("--hyp", eval.hyp, "Hypotheses JSONL {\"id\", \"text\"}")->required();
  eval_cmd->add_option("--ref", eval.ref, "References JSONL {\"id\", \"texts\"}")->required();
  eval_cmd->add_option("--metric", eval.metrics,
                       "bleu, rouge, meteor, distinct, em-f1, combined or all")
      ->delimiter(',');
  eval_cmd->add_option("--max-n", eval.max_n, "BLEU order")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--mode", eval.mode, "BLEU mode")->check(CLI::IsMember({"corpus", "sentence"}));
  eval_cmd->add_option("--smoothing", eval.smoothing, "BLEU smoothing")
      ->check(CLI::IsMember({"none", "method7"}));
  eval_cmd->add_option("--distinct-n", eval.distinct_orders, "Distinct orders")->delimiter(',');
  eval_cmd->add_option("--tokenizer", eval.tokenizer, "whitespace or ptb")
      ->check(CLI::IsMember({"whitespace", "ws", "ptb"}));
  eval_cmd->add_flag("--stem", eval.stem, "Porter-stem tokens for ROUGE");
  eval_cmd->add_flag("--per-example", eval.per_example, "Include per-example scores");
  eval_cmd->add_option("--inform", eval.inform, "Inform rate (0-100) for the combined score");
  eval_cmd->add_option("--success", eval.success, "Success rate (0-100) for the combined score");
  eval_cmd->add_option("--bleu", eval.bleu, "BLEU (0-100) for the combined score");

  StatsFlags stats;
  auto* stats_cmd = app.add_subcommand("stats", "Per-dataset corpus statistics");
  stats_cmd->add_option("inputs", stats.inputs, "JSONL files or globs")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitContent;
  }

  try {
    if (*unify_cmd) return cmd_unify(unify, cfg, out, err);
    if (*decontam_cmd) return cmd_decontaminate(decontam, cfg, out, err);
    if (*mix_cmd) {
      mix.seed_given = mix_seed->count() > 0;
      return cmd_mix(mix, cfg, out, err);
    }
    if (*eval_cmd) return cmd_evaluate(eval, out, err);
    if (*stats_cmd) return cmd_stats(stats, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitContent;
}

}  // namespace mvpforge::cli
