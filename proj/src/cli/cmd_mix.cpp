#include <cstdio>
#include <fstream>
#include <memory>

#include "commands.hpp"
#include "mvpforge/cli.hpp"
#include "mvpforge/error.hpp"
#include "mvpforge/jsonl.hpp"
#include "mvpforge/mixer.hpp"

namespace mvpforge::cli {
namespace {

bool spec_sets_seed(const std::filesystem::path& path) {
  std::ifstream in(path);
  const auto doc = nlohmann::json::parse(in, nullptr, false);
  return doc.is_object() && doc.contains("seed") && !doc["seed"].is_null();
}

std::string part_name(std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "part-%05llu.jsonl", static_cast<unsigned long long>(index));
  return buf;
}

}  // namespace

int cmd_mix(const MixFlags& flags, const RunConfig& run, std::ostream& out, std::ostream& err) {
  MixtureSpec spec = load_mixture_spec(flags.spec);
  if (flags.seed_given || !spec_sets_seed(flags.spec)) spec.seed = run.seed;
  if (flags.temperature) spec.temperature = *flags.temperature;
  if (flags.epoch_length) spec.epoch_length = *flags.epoch_length;
  if (flags.size_cap) spec.size_cap = *flags.size_cap;
  if (!flags.task.empty()) spec = group_by_task(spec, parse_family(flags.task));

  for (const auto& m : spec.members) {
    if (!std::filesystem::exists(m.path)) {
      throw Error(ErrorKind::io, "missing-file", "shard not found: " + m.path.string());
    }
  }
  const SamplePlan plan = compute_rates(spec);

  std::vector<std::string> warnings;
  std::vector<std::unique_ptr<JsonlFileSource>> owned;
  std::vector<ExampleSource*> sources;
  for (const auto& m : spec.members) {
    owned.push_back(std::make_unique<JsonlFileSource>(m.path, m.dataset_id));
    if (owned.back()->size() == 0) {
      throw Error(ErrorKind::validation, "empty-member", "shard for " + m.dataset_id + " is empty");
    }
    if (owned.back()->size() != m.size) {
      warnings.push_back(m.dataset_id + ": declared size " + std::to_string(m.size) +
                         " but shard has " + std::to_string(owned.back()->size()) + " examples");
    }
    sources.push_back(owned.back().get());
  }

  std::filesystem::create_directories(flags.out_dir);
  std::vector<std::string> parts;
  std::ofstream sink;
  std::uint64_t in_part = 0;
  auto open_next = [&] {
    if (sink.is_open()) {
      sink.close();
      if (!sink) throw Error(ErrorKind::io, "write-failed", "failed writing " + parts.back());
    }
    parts.push_back(part_name(parts.size()));
    sink = open_for_write(flags.out_dir / parts.back());
    in_part = 0;
  };
  open_next();
  sample_stream(plan, sources, [&](const UnifiedExample& ex) {
    if (flags.shard_size > 0 && in_part == flags.shard_size) open_next();
    sink << to_json_line(ex) << '\n';
    ++in_part;
  });
  sink.close();
  if (!sink) throw Error(ErrorKind::io, "write-failed", "failed writing " + parts.back());

  nlohmann::ordered_json doc;
  doc["seed"] = plan.seed;
  doc["temperature"] = plan.temperature;
  doc["size_cap"] = plan.size_cap ? nlohmann::ordered_json(*plan.size_cap) : nlohmann::ordered_json();
  doc["epoch_length"] = plan.epoch_length;
  if (!flags.task.empty()) doc["task"] = flags.task;
  nlohmann::ordered_json members = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < plan.dataset_ids.size(); ++i) {
    nlohmann::ordered_json m;
    m["dataset"] = plan.dataset_ids[i];
    m["task"] = std::string(family_name(spec.members[i].family));
    m["size"] = spec.members[i].size;
    m["effective_size"] = plan.effective_sizes[i];
    m["rate"] = round_to(plan.rates[i], 12);
    members.push_back(std::move(m));
  }
  doc["members"] = std::move(members);
  doc["parts"] = parts;

  {
    auto plan_out = open_for_write(flags.out_dir / "plan.json");
    plan_out << doc.dump(2) << '\n';
    if (!plan_out) throw Error(ErrorKind::io, "write-failed", "failed writing plan.json");
  }
  for (const auto& w : warnings) err << "warning: " << w << "\n";
  print_json(out, doc);
  return kExitOk;
}

}  // namespace mvpforge::cli
