#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include "mvpforge/corpus_model.hpp"

namespace mvpforge {

// One JSON object per line, keys in the order
// task, dataset, split, instruction, input, output. No trailing newline.
std::string to_json_line(const UnifiedExample& ex);

// Parses one wire-format line. Throws Error(schema) naming `where`.
UnifiedExample parse_example_line(std::string_view line,
                                  std::string_view where = "");

// Parses one raw ingestion line for a dataset of the given family.
//
//   data-to-text            {"triples": [[s, r, o], ...]} or {"table": [[k, v], ...]}, "target"
//   open-dialogue           {"persona": [...], "turns": [...], "target"}
//   question-answering      {"question", "answer", "context", "history": [[q, a], ...]}
//   question-generation     {"question", "answer", "context"}
//   task-oriented-dialogue  {"history": [...], "db", "belief", "action", "response"}
//   everything else         {"source", "target"}
RawRecord parse_raw_line(std::string_view line, TaskFamily family,
                         std::string dataset_id, Split split,
                         std::string_view where = "");

// Line reader that tracks 1-based line numbers and strips a trailing '\r'.
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path);

  bool next(std::string& line);
  std::size_t line_number() const { return line_no_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
};

std::ofstream open_for_write(const std::filesystem::path& path);

}  // namespace mvpforge
