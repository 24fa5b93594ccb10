#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace mvpforge::cli {

struct RunConfig {
  std::uint64_t seed = 42;
  unsigned workers = 1;
};

struct UnifyFlags {
  std::filesystem::path manifest;
  std::filesystem::path out_dir;
  bool strict = false;
  double carve_valid = 0.0;
  std::string qg_separator = "xsep";
  std::filesystem::path instructions;  // optional JSON {"family": "text"}
};

struct DecontamFlags {
  std::vector<std::string> train;
  std::vector<std::string> eval;
  std::vector<std::string> prebuilt_indexes;
  std::filesystem::path out_dir;
  std::filesystem::path save_index_dir;
  double percentile = 5.0;
  int min_order = 1;
  int max_order = 13;
  std::size_t batch_size = 4096;
  bool verify_exact = false;
};

struct MixFlags {
  std::filesystem::path spec;
  std::filesystem::path out_dir;
  std::string task;
  std::optional<double> temperature;
  std::optional<std::uint64_t> epoch_length;
  std::optional<std::uint64_t> size_cap;
  std::uint64_t shard_size = 0;  // 0: a single part file
  bool seed_given = false;
};

struct EvaluateFlags {
  std::filesystem::path hyp;
  std::filesystem::path ref;
  std::vector<std::string> metrics;
  int max_n = 4;
  std::string mode = "corpus";
  std::string smoothing = "none";
  std::vector<int> distinct_orders = {1, 2};
  std::string tokenizer = "whitespace";
  bool stem = false;
  bool per_example = false;
  std::optional<double> inform;
  std::optional<double> success;
  std::optional<double> bleu;
};

struct StatsFlags {
  std::vector<std::string> inputs;
};

int cmd_unify(const UnifyFlags& flags, const RunConfig& run, std::ostream& out, std::ostream& err);
int cmd_decontaminate(const DecontamFlags& flags, const RunConfig& run, std::ostream& out,
                      std::ostream& err);
int cmd_mix(const MixFlags& flags, const RunConfig& run, std::ostream& out, std::ostream& err);
int cmd_evaluate(const EvaluateFlags& flags, std::ostream& out, std::ostream& err);
int cmd_stats(const StatsFlags& flags, std::ostream& out, std::ostream& err);

// Expands shell-style patterns; literal paths pass through. Results are
// sorted and de-duplicated per pattern. A pattern with no match throws
// Error(io).
std::vector<std::filesystem::path> expand_globs(const std::vector<std::string>& patterns);

void print_json(std::ostream& out, const nlohmann::ordered_json& doc);

// Rounds to `places` decimals for reporting.
double round_to(double value, int places);

}  // namespace mvpforge::cli
