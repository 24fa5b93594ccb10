#include <set>

#include "commands.hpp"
#include "mvpforge/cli.hpp"
#include "mvpforge/decontam.hpp"
#include "mvpforge/error.hpp"
#include "mvpforge/jsonl.hpp"
#include "mvpforge/text.hpp"

namespace mvpforge::cli {
namespace {

std::vector<UnifiedExample> read_examples(const std::filesystem::path& path) {
  LineReader reader(path);
  std::vector<UnifiedExample> out;
  std::string line;
  while (reader.next(line)) {
    if (split_whitespace(line).empty()) continue;
    out.push_back(parse_example_line(line, path.string() + ":" + std::to_string(reader.line_number())));
  }
  return out;
}

nlohmann::ordered_json index_json(const FilterReport::IndexStats& s) {
  nlohmann::ordered_json j;
  j["source"] = s.source;
  j["order"] = s.order;
  j["gram_count"] = s.gram_count;
  j["hits"] = s.hits;
  j["shorter_than_order"] = s.shorter_than_order;
  return j;
}

}  // namespace

int cmd_decontaminate(const DecontamFlags& flags, const RunConfig& run, std::ostream& out,
                      std::ostream& err) {
  DecontamConfig cfg;
  cfg.percentile = flags.percentile;
  cfg.min_order = flags.min_order;
  cfg.max_order = flags.max_order;
  cfg.validate();

  const auto train_files = expand_globs(flags.train);
  const auto eval_files = flags.eval.empty() ? std::vector<std::filesystem::path>{}
                                             : expand_globs(flags.eval);
  const auto prebuilt_files = flags.prebuilt_indexes.empty()
                                  ? std::vector<std::filesystem::path>{}
                                  : expand_globs(flags.prebuilt_indexes);
  if (flags.verify_exact && !prebuilt_files.empty()) {
    throw Error(ErrorKind::config, "bad-flags",
                "--verify-exact needs the eval sets themselves, not prebuilt indexes");
  }

  std::vector<std::string> warnings;
  std::vector<NGramIndex> indexes;
  std::vector<ExactNGramIndex> exact;
  for (const auto& path : eval_files) {
    const auto examples = read_examples(path);
    const std::string source = path.stem().string();
    if (examples.empty()) {
      warnings.push_back("eval set " + path.string() + " is empty; skipped");
      continue;
    }
    indexes.push_back(build_index(examples, cfg, source, run.workers));
    if (flags.verify_exact) exact.emplace_back(examples, indexes.back().order(), cfg, source);
  }
  for (const auto& path : prebuilt_files) {
    indexes.push_back(NGramIndex::load(path, path.stem().string()));
  }
  if (!flags.save_index_dir.empty()) {
    std::filesystem::create_directories(flags.save_index_dir);
    for (const auto& idx : indexes) {
      idx.save(flags.save_index_dir / (idx.source_dataset() + ".ngram"));
    }
  }
  if (indexes.empty()) warnings.push_back("no eval sets given; training data passes through unchanged");

  std::set<std::string> seen_names;
  for (const auto& path : train_files) {
    if (!seen_names.insert(path.filename().string()).second) {
      throw Error(ErrorKind::config, "duplicate-output",
                  "two training files share the name " + path.filename().string());
    }
  }
  std::filesystem::create_directories(flags.out_dir);

  Decontaminator filter(indexes, cfg);
  FilterReport report = filter.empty_report();
  std::uint64_t disagreements = 0;
  nlohmann::ordered_json files = nlohmann::ordered_json::array();

  for (const auto& path : train_files) {
    const auto out_path = flags.out_dir / path.filename();
    if (std::filesystem::exists(out_path) &&
        std::filesystem::equivalent(out_path, path)) {
      throw Error(ErrorKind::config, "in-place", "output would overwrite input " + path.string());
    }
    auto sink = open_for_write(out_path);
    LineReader reader(path);
    std::uint64_t file_examined = report.examined;
    std::uint64_t file_removed = report.removed;

    std::vector<std::string> lines;
    std::vector<UnifiedExample> batch;
    auto flush = [&] {
      if (batch.empty()) return;
      const auto remove = filter.flag_batch(batch, report.examined, report, run.workers);
      for (std::size_t i = 0; i < batch.size(); ++i) {
        if (!remove[i]) sink << lines[i] << '\n';
        if (flags.verify_exact) {
          const auto tokens = tokenize_for_overlap(overlap_text(batch[i]));
          bool hit = false;
          for (const auto& e : exact) {
            if (tokens.size() >= static_cast<std::size_t>(e.order()) && e.overlaps(tokens)) {
              hit = true;
              break;
            }
          }
          if (hit != static_cast<bool>(remove[i])) ++disagreements;
        }
      }
      lines.clear();
      batch.clear();
    };

    std::string line;
    while (reader.next(line)) {
      if (split_whitespace(line).empty()) continue;
      batch.push_back(parse_example_line(line, path.string() + ":" + std::to_string(reader.line_number())));
      lines.push_back(line);
      if (batch.size() >= flags.batch_size) flush();
    }
    flush();
    if (!sink) throw Error(ErrorKind::io, "write-failed", "failed writing " + out_path.string());

    nlohmann::ordered_json f;
    f["input"] = path.filename().string();
    f["examined"] = report.examined - file_examined;
    f["removed"] = report.removed - file_removed;
    files.push_back(std::move(f));
  }

  for (const auto& w : warnings) err << "warning: " << w << "\n";

  nlohmann::ordered_json doc;
  doc["examined"] = report.examined;
  doc["removed"] = report.removed;
  doc["kept"] = report.examined - report.removed;
  nlohmann::ordered_json idx = nlohmann::ordered_json::array();
  for (const auto& s : report.per_index) idx.push_back(index_json(s));
  doc["indexes"] = std::move(idx);
  doc["removed_sample"] = report.removed_sample;
  doc["files"] = std::move(files);
  if (flags.verify_exact) doc["exact_disagreements"] = disagreements;
  doc["warnings"] = warnings;
  print_json(out, doc);
  return kExitOk;
}

}  // namespace mvpforge::cli
