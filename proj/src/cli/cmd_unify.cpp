#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

#include "commands.hpp"
#include "mvpforge/cli.hpp"
#include "mvpforge/counter_rng.hpp"
#include "mvpforge/decontam.hpp"
#include "mvpforge/error.hpp"
#include "mvpforge/jsonl.hpp"
#include "mvpforge/parallel.hpp"
#include "mvpforge/text.hpp"
#include "mvpforge/unify.hpp"

namespace mvpforge::cli {
namespace {

struct LintEntry {
  std::string dataset;
  std::string split;
  std::size_t line = 0;
  std::string code;
  std::string detail;
};

struct Job {
  const ManifestEntry* entry = nullptr;
  const ManifestEntry::SplitFile* file = nullptr;
  // Record ordinals moved from train to valid; empty when not carving.
  std::vector<std::uint64_t> carved;
};

struct JobResult {
  std::uint64_t records = 0;
  std::uint64_t malformed = 0;
  std::uint64_t violations = 0;
  std::map<std::string, std::uint64_t> examples;  // split -> count
  std::vector<LintEntry> lint;
  std::vector<std::string> warnings;
};

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](char c) { return is_space(c); });
}

std::uint64_t count_records(const std::filesystem::path& path) {
  LineReader reader(path);
  std::string line;
  std::uint64_t n = 0;
  while (reader.next(line)) {
    if (!blank(line)) ++n;
  }
  return n;
}

// Exactly round(fraction * n) distinct ordinals, chosen by a partial
// Fisher-Yates shuffle keyed on the run seed and the dataset name.
std::vector<std::uint64_t> carve_ordinals(std::uint64_t n, double fraction, std::uint64_t seed,
                                          const std::string& dataset_id) {
  const auto k = static_cast<std::uint64_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<std::uint64_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  CounterRng rng(seed, hash_token(dataset_id));
  for (std::uint64_t i = 0; i < k; ++i) {
    const auto j = i + rng.below(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

InstructionTable load_instructions(const std::filesystem::path& path) {
  InstructionTable table = InstructionTable::defaults();
  if (path.empty()) return table;
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "missing-file", "cannot read instructions " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::schema, "bad-json", path.string() + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorKind::schema, "bad-json", path.string() + ": expected an object");
  }
  for (const auto& [name, value] : doc.items()) {
    if (!value.is_string()) {
      throw Error(ErrorKind::schema, "bad-json", path.string() + ": '" + name + "' is not a string");
    }
    table.set(parse_family(name), value.get<std::string>());
  }
  table.validate();
  return table;
}

std::filesystem::path shard_path(const std::filesystem::path& dir, const std::string& dataset,
                                 Split split) {
  return dir / (dataset + "." + std::string(split_name(split)) + ".jsonl");
}

JobResult run_job(const Job& job, const InstructionTable& instr, const SeparatorConfig& seps,
                  const UnifyFlags& flags) {
  JobResult res;
  const auto& entry = *job.entry;
  const auto& file = *job.file;
  const std::string split_str(split_name(file.split));

  auto out = open_for_write(shard_path(flags.out_dir, entry.dataset_id, file.split));
  std::ofstream valid_out;
  if (!job.carved.empty()) {
    valid_out = open_for_write(shard_path(flags.out_dir, entry.dataset_id, Split::valid));
  }

  res.examples[split_str] = 0;
  if (!job.carved.empty()) res.examples["valid"] = 0;

  LineReader reader(file.path);
  std::string line;
  std::uint64_t ordinal = 0;
  std::size_t carve_cursor = 0;
  while (reader.next(line)) {
    if (blank(line)) continue;
    const std::uint64_t this_ordinal = ordinal++;
    ++res.records;
    Split target_split = file.split;
    if (carve_cursor < job.carved.size() && job.carved[carve_cursor] == this_ordinal) {
      ++carve_cursor;
      target_split = Split::valid;
    }
    const std::string where = file.path.string() + ":" + std::to_string(reader.line_number());

    std::vector<UnifiedExample> examples;
    LintLog lint;
    try {
      const auto rec = parse_raw_line(line, entry.family, entry.dataset_id, target_split, where);
      examples = unify_record(rec, entry.family, instr, seps, &lint);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::io) throw;
      ++res.malformed;
      if (flags.strict) ++res.violations;
      res.lint.push_back({entry.dataset_id, split_str, reader.line_number(),
                          flags.strict ? "violation" : "skipped", e.code() + ": " + e.what()});
      continue;
    }
    for (const auto& w : lint) {
      res.lint.push_back({entry.dataset_id, split_str, reader.line_number(), w.code, w.detail});
    }
    auto& sink = target_split == file.split ? out : valid_out;
    for (const auto& ex : examples) {
      const auto problems = validate_example(ex);
      if (!problems.empty()) {
        res.violations += problems.size();
        for (const auto& p : problems) {
          res.lint.push_back({entry.dataset_id, split_str, reader.line_number(), "violation", p});
        }
        continue;
      }
      sink << to_json_line(ex) << '\n';
      ++res.examples[std::string(split_name(target_split))];
    }
  }
  if (!out || (valid_out.is_open() && !valid_out)) {
    throw Error(ErrorKind::io, "write-failed", "failed writing shards under " + flags.out_dir.string());
  }
  if (file.declared_count != 0 && file.declared_count != res.records) {
    res.warnings.push_back(entry.dataset_id + "/" + split_str + ": manifest declares " +
                           std::to_string(file.declared_count) + " records, file has " +
                           std::to_string(res.records));
  }
  return res;
}

}  // namespace

int cmd_unify(const UnifyFlags& flags, const RunConfig& run, std::ostream& out, std::ostream& err) {
  const Manifest manifest = load_manifest(flags.manifest);
  const InstructionTable instr = load_instructions(flags.instructions);
  SeparatorConfig seps;
  seps.answer_paragraph =
      flags.qg_separator == "sep" ? AnswerParagraphSep::sep : AnswerParagraphSep::xsep;
  seps.validate();
  if (!(flags.carve_valid >= 0.0 && flags.carve_valid <= 1.0)) {
    throw Error(ErrorKind::config, "bad-fraction", "--carve-valid must lie in [0, 1]");
  }

  std::vector<Job> jobs;
  std::vector<std::string> warnings = manifest.warnings;
  for (const auto& entry : manifest.entries) {
    const bool has_valid = std::any_of(entry.splits.begin(), entry.splits.end(),
                                       [](const auto& s) { return s.split == Split::valid; });
    for (const auto& file : entry.splits) {
      Job job{&entry, &file, {}};
      if (flags.carve_valid > 0.0 && file.split == Split::train) {
        if (has_valid) {
          warnings.push_back(entry.dataset_id + ": valid split already listed, --carve-valid ignored");
        } else {
          job.carved = carve_ordinals(count_records(file.path), flags.carve_valid, run.seed,
                                      entry.dataset_id);
        }
      }
      jobs.push_back(std::move(job));
    }
  }

  std::filesystem::create_directories(flags.out_dir);
  std::vector<JobResult> results(jobs.size());
  // One job per worker slot at a time; each job owns its shard files.
  parallel_chunks(jobs.size(), run.workers, [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) results[i] = run_job(jobs[i], instr, seps, flags);
  });

  auto lint_out = open_for_write(flags.out_dir / "lint.jsonl");
  nlohmann::ordered_json shards = nlohmann::ordered_json::array();
  std::uint64_t total_examples = 0, total_records = 0, malformed = 0, violations = 0, lint_count = 0;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& r = results[i];
    for (const auto& l : r.lint) {
      nlohmann::ordered_json j;
      j["dataset"] = l.dataset;
      j["split"] = l.split;
      j["line"] = l.line;
      j["code"] = l.code;
      j["detail"] = l.detail;
      lint_out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
      if (l.code == "violation") {
        err << "violation: " << l.dataset << "/" << l.split << " line " << l.line << ": "
            << l.detail << "\n";
      }
    }
    lint_count += r.lint.size();
    for (const auto& w : r.warnings) warnings.push_back(w);
    for (const auto& [split, n] : r.examples) {
      nlohmann::ordered_json s;
      s["dataset"] = jobs[i].entry->dataset_id;
      s["task"] = std::string(family_name(jobs[i].entry->family));
      s["split"] = split;
      s["file"] = shard_path("", jobs[i].entry->dataset_id, parse_split(split)).string();
      s["examples"] = n;
      shards.push_back(std::move(s));
      total_examples += n;
    }
    total_records += r.records;
    malformed += r.malformed;
    violations += r.violations;
  }
  if (!lint_out) throw Error(ErrorKind::io, "write-failed", "failed writing lint log");

  for (const auto& w : warnings) err << "warning: " << w << "\n";

  nlohmann::ordered_json report;
  report["records"] = total_records;
  report["examples"] = total_examples;
  report["malformed"] = malformed;
  report["violations"] = violations;
  report["lint_entries"] = lint_count;
  report["shards"] = std::move(shards);
  report["warnings"] = warnings;
  print_json(out, report);

  if (violations > 0) {
    err << "error: " << violations << " validation violation(s)\n";
    return kExitContent;
  }
  return kExitOk;
}

}  // namespace mvpforge::cli
