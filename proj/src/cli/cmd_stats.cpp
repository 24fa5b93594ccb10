#include <map>

#include "commands.hpp"
#include "mvpforge/cli.hpp"
#include "mvpforge/jsonl.hpp"
#include "mvpforge/text.hpp"

namespace mvpforge::cli {
namespace {

struct Tally {
  std::uint64_t count = 0;
  std::uint64_t input_words = 0;
  std::uint64_t output_words = 0;

  void add(const Tally& o) {
    count += o.count;
    input_words += o.input_words;
    output_words += o.output_words;
  }
};

nlohmann::ordered_json mean_or_null(std::uint64_t words, std::uint64_t count) {
  if (count == 0) return nullptr;
  return round_to(static_cast<double>(words) / static_cast<double>(count), 6);
}

void put_tally(nlohmann::ordered_json& j, const Tally& t) {
  j["count"] = t.count;
  j["mean_input_words"] = mean_or_null(t.input_words, t.count);
  j["mean_output_words"] = mean_or_null(t.output_words, t.count);
}

}  // namespace

int cmd_stats(const StatsFlags& flags, std::ostream& out, std::ostream&) {
  const auto files = expand_globs(flags.inputs);
  std::map<std::string, Tally> by_dataset;
  nlohmann::ordered_json file_reports = nlohmann::ordered_json::array();
  Tally total;

  for (const auto& path : files) {
    LineReader reader(path);
    Tally file_tally;
    std::string line;
    while (reader.next(line)) {
      if (split_whitespace(line).empty()) continue;
      const auto ex =
          parse_example_line(line, path.string() + ":" + std::to_string(reader.line_number()));
      Tally one{1, count_words(ex.input), count_words(ex.output)};
      file_tally.add(one);
      by_dataset[ex.dataset_id].add(one);
    }
    nlohmann::ordered_json f;
    f["file"] = path.string();
    put_tally(f, file_tally);
    file_reports.push_back(std::move(f));
    total.add(file_tally);
  }

  nlohmann::ordered_json datasets = nlohmann::ordered_json::object();
  for (const auto& [id, t] : by_dataset) {
    nlohmann::ordered_json d;
    put_tally(d, t);
    datasets[id] = std::move(d);
  }
  nlohmann::ordered_json report;
  put_tally(report, total);
  report["datasets"] = std::move(datasets);
  report["files"] = std::move(file_reports);
  print_json(out, report);
  return kExitOk;
}

}  // namespace mvpforge::cli
