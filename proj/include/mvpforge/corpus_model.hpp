#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace mvpforge {

// The eleven task families of the corpus. The first seven listed in
// kSeenFamilies take part in multi-task pre-training; the remaining four are
// held out.
enum class TaskFamily {
  commonsense_generation,
  data_to_text,
  open_dialogue,
  paraphrase,
  question_answering,
  question_generation,
  story_generation,
  task_oriented_dialogue,
  simplification,
  style_transfer,
  summarization,
};

inline constexpr std::array<TaskFamily, 11> kAllFamilies = {
    TaskFamily::commonsense_generation, TaskFamily::data_to_text,
    TaskFamily::open_dialogue,          TaskFamily::paraphrase,
    TaskFamily::question_answering,     TaskFamily::question_generation,
    TaskFamily::story_generation,       TaskFamily::task_oriented_dialogue,
    TaskFamily::simplification,         TaskFamily::style_transfer,
    TaskFamily::summarization,
};

bool is_seen(TaskFamily family);
std::string_view family_name(TaskFamily family);
// Accepts the hyphenated wire names ("data-to-text"). Throws Error(config).
TaskFamily parse_family(std::string_view name);

enum class Split { train, valid, test };

std::string_view split_name(Split split);
Split parse_split(std::string_view name);

// Dataset-native payloads.
struct Triple {
  std::string subject;
  std::string relation;
  std::string object;
};
using TripleSet = std::vector<Triple>;

using KeyValueTable = std::vector<std::pair<std::string, std::string>>;

struct DialogueContext {
  std::vector<std::string> persona;
  std::vector<std::string> turns;
};

struct QATuple {
  std::string question;
  std::optional<std::string> answer;
  std::optional<std::string> context;
  std::vector<std::pair<std::string, std::string>> history;
};

struct TodRecord {
  std::vector<std::string> history;
  std::string db_marker;
  std::string belief;
  std::string action;
  std::string response;
};

struct PlainPair {
  std::string source;
  std::string target;
};

using Payload = std::variant<TripleSet, KeyValueTable, DialogueContext,
                             QATuple, TodRecord, PlainPair>;

std::string_view payload_kind(const Payload& payload);

// `target` carries the reference text for payload kinds that have no target
// of their own (triples, tables, dialogue context).
struct RawRecord {
  std::string dataset_id;
  Split split = Split::train;
  Payload payload;
  std::string target;
};

// True when `payload` is an admissible shape for `family`.
bool payload_matches(const Payload& payload, TaskFamily family);

struct UnifiedExample {
  TaskFamily task = TaskFamily::summarization;
  std::string dataset_id;
  Split split = Split::train;
  std::string instruction;
  std::string input;
  std::string output;

  bool operator==(const UnifiedExample&) const = default;
};

// Returns one description per violated invariant; empty when well-formed.
// Descriptions start with a stable code: "instruction-prefix", "empty-target".
std::vector<std::string> validate_example(const UnifiedExample& ex);

struct ManifestEntry {
  std::string dataset_id;
  TaskFamily family = TaskFamily::summarization;
  struct SplitFile {
    Split split = Split::train;
    std::filesystem::path path;
    std::uint64_t declared_count = 0;
  };
  std::vector<SplitFile> splits;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  std::vector<std::string> warnings;

  const ManifestEntry* find(std::string_view dataset_id) const;
};

// Reads a manifest of `dataset_id<TAB>task_family<TAB>split<TAB>path<TAB>count`
// lines. Blank lines and lines starting with '#' are skipped. Relative paths
// resolve against the manifest's directory.
Manifest load_manifest(const std::filesystem::path& path);

}  // namespace mvpforge
