#include "mvpforge/mixer.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "mvpforge/error.hpp"
#include "mvpforge/jsonl.hpp"

namespace mvpforge {

namespace {

constexpr std::uint64_t kMemberDrawStream = 0;

std::uint64_t cycle_stream(std::size_t member, std::uint64_t cycle) {
  // Stream 0 is reserved for member selection.
  return ((static_cast<std::uint64_t>(member) + 1) << 40) ^ (cycle + 1);
}

std::uint64_t count_lines(const std::filesystem::path& path) {
  LineReader reader(path);
  std::string line;
  std::uint64_t n = 0;
  while (reader.next(line)) {
    if (!line.empty()) ++n;
  }
  return n;
}

}  // namespace

void MixtureSpec::validate() const {
  if (members.empty()) {
    throw Error(ErrorKind::validation, "empty-mixture", "mixture has no members");
  }
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorKind::validation, "bad-temperature", "temperature must be positive");
  }
  if (size_cap && *size_cap == 0) {
    throw Error(ErrorKind::validation, "bad-cap", "size cap must be positive");
  }
  if (epoch_length == 0) {
    throw Error(ErrorKind::validation, "bad-epoch-length", "epoch_length must be positive");
  }
  for (const auto& m : members) {
    if (m.size == 0) {
      throw Error(ErrorKind::validation, "empty-member",
                  "member '" + m.dataset_id + "' has size 0");
    }
  }
}

MixtureSpec load_mixture_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "missing-file", "cannot open " + path.string());
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorKind::schema, "schema", path.string() + ": invalid mixture JSON");
  }
  MixtureSpec spec;
  try {
    spec.temperature = doc.value("temperature", 2.0);
    if (doc.contains("size_cap") && !doc["size_cap"].is_null()) {
      spec.size_cap = doc["size_cap"].get<std::uint64_t>();
    }
    spec.seed = doc.value("seed", MixtureSpec::kDefaultSeed);
    spec.epoch_length = doc.value("epoch_length", std::uint64_t{1});
    for (const auto& m : doc.at("members")) {
      MixtureMember member;
      member.dataset_id = m.at("dataset").get<std::string>();
      member.family = parse_family(m.at("task").get<std::string>());
      member.path = m.at("path").get<std::string>();
      if (member.path.is_relative()) member.path = path.parent_path() / member.path;
      if (m.contains("size")) member.size = m["size"].get<std::uint64_t>();
      spec.members.push_back(std::move(member));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::schema, "schema", path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw Error(ErrorKind::schema, "schema", path.string() + ": " + e.what());
  }
  for (auto& m : spec.members) {
    if (m.size == 0 && std::filesystem::exists(m.path)) m.size = count_lines(m.path);
  }
  return spec;
}

std::size_t SamplePlan::member_at(std::uint64_t position) const {
  const double u = to_unit_interval(counter_hash(seed, kMemberDrawStream, position));
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) return cumulative.size() - 1;
  return static_cast<std::size_t>(it - cumulative.begin());
}

SamplePlan compute_rates(const MixtureSpec& spec) {
  spec.validate();
  SamplePlan plan;
  plan.temperature = spec.temperature;
  plan.size_cap = spec.size_cap;
  plan.seed = spec.seed;
  plan.epoch_length = spec.epoch_length;

  std::vector<long double> weights;
  long double total = 0;
  for (const auto& m : spec.members) {
    const std::uint64_t eff = spec.size_cap ? std::min(m.size, *spec.size_cap) : m.size;
    const long double w = std::pow(static_cast<long double>(eff), 1.0L / spec.temperature);
    plan.dataset_ids.push_back(m.dataset_id);
    plan.effective_sizes.push_back(eff);
    weights.push_back(w);
    total += w;
  }
  long double running = 0;
  for (long double w : weights) {
    plan.rates.push_back(static_cast<double>(w / total));
    running += w;
    plan.cumulative.push_back(static_cast<double>(running / total));
  }
  plan.cumulative.back() = 1.0;
  return plan;
}

MixtureSpec group_by_task(const MixtureSpec& spec, TaskFamily family) {
  MixtureSpec sub = spec;
  sub.members.clear();
  for (const auto& m : spec.members) {
    if (m.family == family) sub.members.push_back(m);
  }
  if (sub.members.empty()) {
    throw Error(ErrorKind::validation, "empty-task-group",
                "no mixture member has task '" + std::string(family_name(family)) + "'");
  }
  return sub;
}

ShuffleCycle::ShuffleCycle(std::uint64_t seed, std::size_t member, std::uint64_t size)
    : seed_(seed), member_(member), order_(size) {
  if (size == 0) {
    throw Error(ErrorKind::data, "empty-member", "cannot sample from an empty shard");
  }
  reshuffle();
}

void ShuffleCycle::reshuffle() {
  for (std::uint64_t i = 0; i < order_.size(); ++i) order_[i] = i;
  CounterRng rng(seed_, cycle_stream(member_, cycle_));
  for (std::uint64_t i = order_.size() - 1; i > 0; --i) {
    std::swap(order_[i], order_[rng.below(i + 1)]);
  }
  cursor_ = 0;
}

std::uint64_t ShuffleCycle::next() {
  if (cursor_ == order_.size()) {
    ++cycle_;
    reshuffle();
  }
  return order_[cursor_++];
}

DrawSequence::DrawSequence(const SamplePlan& plan, std::span<const std::uint64_t> member_sizes)
    : plan_(&plan) {
  if (member_sizes.size() != plan.rates.size()) {
    throw Error(ErrorKind::config, "member-count", "one shard size per plan member required");
  }
  cycles_.reserve(member_sizes.size());
  for (std::size_t i = 0; i < member_sizes.size(); ++i) {
    if (member_sizes[i] == 0) {
      throw Error(ErrorKind::data, "empty-member",
                  "shard for '" + plan.dataset_ids[i] + "' is empty");
    }
    cycles_.emplace_back(plan.seed, i, member_sizes[i]);
  }
}

Draw DrawSequence::next() {
  const std::size_t member = plan_->member_at(position_++);
  return {member, cycles_[member].next()};
}

JsonlFileSource::JsonlFileSource(const std::filesystem::path& path, std::string dataset_id)
    : path_(path), dataset_id_(std::move(dataset_id)), in_(path, std::ios::binary) {
  if (!in_) {
    throw Error(ErrorKind::io, "missing-file",
                "dataset '" + dataset_id_ + "': cannot open " + path.string());
  }
  std::string line;
  std::uint64_t offset = 0;
  while (std::getline(in_, line)) {
    const std::uint64_t next = offset + line.size() + 1;
    if (!line.empty() && line != "\r") offsets_.push_back(offset);
    offset = next;
  }
  in_.clear();
}

UnifiedExample JsonlFileSource::at(std::uint64_t index) {
  in_.seekg(static_cast<std::streamoff>(offsets_.at(index)));
  std::string line;
  if (!std::getline(in_, line)) {
    throw Error(ErrorKind::io, "read-failed",
                "dataset '" + dataset_id_ + "': cannot read " + path_.string());
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return parse_example_line(line, path_.string() + ": example " + std::to_string(index));
}

void sample_stream(const SamplePlan& plan, std::span<ExampleSource* const> sources,
                   const std::function<void(const UnifiedExample&)>& sink) {
  std::vector<std::uint64_t> sizes;
  for (auto* s : sources) sizes.push_back(s->size());
  DrawSequence draws(plan, sizes);
  for (std::uint64_t i = 0; i < plan.epoch_length; ++i) {
    const Draw d = draws.next();
    sink(sources[d.member]->at(d.example));
  }
}

std::vector<UnifiedExample> sample_stream(const SamplePlan& plan,
                                          std::span<ExampleSource* const> sources) {
  std::vector<UnifiedExample> out;
  out.reserve(plan.epoch_length);
  sample_stream(plan, sources, [&](const UnifiedExample& ex) { out.push_back(ex); });
  return out;
}

}  // namespace mvpforge
