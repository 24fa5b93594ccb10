#include "mvpforge/corpus_model.hpp"

#include <fstream>
#include <map>
#include <set>

#include "mvpforge/error.hpp"

namespace mvpforge {

namespace {

constexpr std::array<std::string_view, 11> kFamilyNames = {
    "commonsense-generation", "data-to-text",
    "open-dialogue",          "paraphrase",
    "question-answering",     "question-generation",
    "story-generation",       "task-oriented-dialogue",
    "simplification",         "style-transfer",
    "summarization",
};

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

}  // namespace

bool is_seen(TaskFamily family) {
  switch (family) {
    case TaskFamily::data_to_text:
    case TaskFamily::open_dialogue:
    case TaskFamily::question_answering:
    case TaskFamily::question_generation:
    case TaskFamily::story_generation:
    case TaskFamily::task_oriented_dialogue:
    case TaskFamily::summarization:
      return true;
    default:
      return false;
  }
}

std::string_view family_name(TaskFamily family) {
  return kFamilyNames[static_cast<std::size_t>(family)];
}

TaskFamily parse_family(std::string_view name) {
  for (std::size_t i = 0; i < kFamilyNames.size(); ++i) {
    if (kFamilyNames[i] == name) return kAllFamilies[i];
  }
  throw Error(ErrorKind::config, "unknown-task",
              "unknown task family '" + std::string(name) + "'");
}

std::string_view split_name(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::valid: return "valid";
    case Split::test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "valid") return Split::valid;
  if (name == "test") return Split::test;
  throw Error(ErrorKind::config, "unknown-split",
              "unknown split '" + std::string(name) + "'");
}

std::string_view payload_kind(const Payload& payload) {
  static constexpr std::array<std::string_view, 6> kNames = {
      "triple-set", "key-value-table", "dialogue-context",
      "qa-tuple",   "tod-record",      "plain-pair"};
  return kNames[payload.index()];
}

bool payload_matches(const Payload& payload, TaskFamily family) {
  switch (family) {
    case TaskFamily::data_to_text:
      return std::holds_alternative<TripleSet>(payload) ||
             std::holds_alternative<KeyValueTable>(payload);
    case TaskFamily::open_dialogue:
      return std::holds_alternative<DialogueContext>(payload);
    case TaskFamily::question_answering:
    case TaskFamily::question_generation:
      return std::holds_alternative<QATuple>(payload);
    case TaskFamily::task_oriented_dialogue:
      return std::holds_alternative<TodRecord>(payload);
    default:
      return std::holds_alternative<PlainPair>(payload);
  }
}

std::vector<std::string> validate_example(const UnifiedExample& ex) {
  std::vector<std::string> violations;
  if (!ex.instruction.empty()) {
    const std::string prefix = ex.instruction + " ";
    if (ex.input.compare(0, prefix.size(), prefix) != 0) {
      violations.push_back("instruction-prefix: input does not start with '" +
                           prefix + "'");
    }
  }
  if (ex.split != Split::test && ex.output.empty()) {
    violations.push_back("empty-target: " + std::string(split_name(ex.split)) +
                         " example has an empty output");
  }
  return violations;
}

const ManifestEntry* Manifest::find(std::string_view dataset_id) const {
  for (const auto& e : entries) {
    if (e.dataset_id == dataset_id) return &e;
  }
  return nullptr;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorKind::io, "missing-file",
                "cannot open manifest " + path.string());
  }
  const std::filesystem::path base = path.parent_path();

  Manifest manifest;
  std::map<std::string, std::size_t> by_id;
  std::set<std::pair<std::string, Split>> seen_splits;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;

    const auto where = path.string() + ":" + std::to_string(line_no);
    auto fields = split_tabs(line);
    if (fields.size() != 5) {
      throw Error(ErrorKind::schema, "manifest-schema",
                  where + ": expected 5 tab-separated fields, got " +
                      std::to_string(fields.size()));
    }
    TaskFamily family;
    Split split;
    std::uint64_t count = 0;
    try {
      family = parse_family(fields[1]);
      split = parse_split(fields[2]);
      std::size_t used = 0;
      count = std::stoull(fields[4], &used);
      if (used != fields[4].size()) throw std::invalid_argument("count");
    } catch (const Error& e) {
      throw Error(ErrorKind::schema, "manifest-schema", where + ": " + e.what());
    } catch (const std::exception&) {
      throw Error(ErrorKind::schema, "manifest-schema",
                  where + ": invalid count '" + fields[4] + "'");
    }
    const std::string& id = fields[0];
    if (id.empty()) {
      throw Error(ErrorKind::schema, "manifest-schema", where + ": empty dataset_id");
    }
    if (!seen_splits.emplace(id, split).second) {
      throw Error(ErrorKind::validation, "duplicate-dataset",
                  where + ": duplicate dataset_id '" + id + "' for split " +
                      std::string(split_name(split)));
    }
    std::filesystem::path file = fields[3];
    if (file.is_relative()) file = base / file;

    auto it = by_id.find(id);
    if (it == by_id.end()) {
      it = by_id.emplace(id, manifest.entries.size()).first;
      manifest.entries.push_back({id, family, {}});
    } else if (manifest.entries[it->second].family != family) {
      throw Error(ErrorKind::validation, "duplicate-dataset",
                  where + ": duplicate dataset_id '" + id +
                      "' declared with a different task family");
    }
    manifest.entries[it->second].splits.push_back({split, file, count});
  }

  for (const auto& entry : manifest.entries) {
    for (const auto& s : entry.splits) {
      if (!std::filesystem::exists(s.path)) {
        throw Error(ErrorKind::io, "missing-file",
                    "dataset '" + entry.dataset_id + "': missing file " +
                        s.path.string());
      }
    }
  }
  if (manifest.entries.empty()) {
    manifest.warnings.push_back("manifest " + path.string() +
                                " lists no datasets");
  }
  return manifest;
}

}  // namespace mvpforge
