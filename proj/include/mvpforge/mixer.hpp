#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvpforge/corpus_model.hpp"
#include "mvpforge/counter_rng.hpp"

namespace mvpforge {

struct MixtureMember {
  std::string dataset_id;
  TaskFamily family = TaskFamily::summarization;
  std::uint64_t size = 0;
  std::filesystem::path path;  // shard location; empty for in-memory use
};

struct MixtureSpec {
  static constexpr std::uint64_t kDefaultSeed = 42;

  std::vector<MixtureMember> members;
  double temperature = 2.0;
  std::optional<std::uint64_t> size_cap;
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t epoch_length = 1;

  // Throws Error(validation) on non-positive sizes, temperature or length.
  void validate() const;
};

// Reads the JSON mixture file consumed by `mix`:
//   {"temperature": 2, "size_cap": null, "seed": 42, "epoch_length": 1000,
//    "members": [{"dataset": "cnn", "task": "summarization",
//                 "path": "cnn.train.jsonl", "size": 1000}, ...]}
// Member paths resolve against the file's directory. A missing "size" is
// filled in by counting the shard's lines.
MixtureSpec load_mixture_spec(const std::filesystem::path& path);

struct SamplePlan {
  std::vector<std::string> dataset_ids;
  std::vector<std::uint64_t> effective_sizes;  // min(size, cap)
  std::vector<double> rates;
  std::vector<double> cumulative;  // running sums of rates; last == 1
  double temperature = 2.0;
  std::optional<std::uint64_t> size_cap;
  std::uint64_t seed = MixtureSpec::kDefaultSeed;
  std::uint64_t epoch_length = 1;

  // Member chosen at stream position `position`; a pure function of
  // (seed, position).
  std::size_t member_at(std::uint64_t position) const;
};

// rate_i = min(size_i, cap)^(1/T) / sum_j min(size_j, cap)^(1/T)
SamplePlan compute_rates(const MixtureSpec& spec);

// Sub-mixture with only the members of `family`; T, cap and seed unchanged.
MixtureSpec group_by_task(const MixtureSpec& spec, TaskFamily family);

// Serves indices [0, size) in seeded random order, one full permutation per
// cycle, reshuffling with a fresh key when a cycle is exhausted.
class ShuffleCycle {
 public:
  ShuffleCycle(std::uint64_t seed, std::size_t member, std::uint64_t size);

  std::uint64_t next();
  std::uint64_t cycle() const { return cycle_; }

 private:
  void reshuffle();

  std::uint64_t seed_;
  std::size_t member_;
  std::uint64_t cycle_ = 0;
  std::uint64_t cursor_ = 0;
  std::vector<std::uint64_t> order_;
};

struct Draw {
  std::size_t member;
  std::uint64_t example;
};

// Sequence of (member, example index) draws. Single consumer.
class DrawSequence {
 public:
  DrawSequence(const SamplePlan& plan, std::span<const std::uint64_t> member_sizes);

  Draw next();
  std::uint64_t position() const { return position_; }

 private:
  const SamplePlan* plan_;
  std::vector<ShuffleCycle> cycles_;
  std::uint64_t position_ = 0;
};

class ExampleSource {
 public:
  virtual ~ExampleSource() = default;
  virtual std::uint64_t size() const = 0;
  virtual UnifiedExample at(std::uint64_t index) = 0;
};

class VectorSource : public ExampleSource {
 public:
  explicit VectorSource(std::vector<UnifiedExample> examples) : examples_(std::move(examples)) {}
  std::uint64_t size() const override { return examples_.size(); }
  UnifiedExample at(std::uint64_t index) override { return examples_.at(index); }

 private:
  std::vector<UnifiedExample> examples_;
};

// JSONL shard with a line-offset table; lines are parsed on demand.
class JsonlFileSource : public ExampleSource {
 public:
  JsonlFileSource(const std::filesystem::path& path, std::string dataset_id);
  std::uint64_t size() const override { return offsets_.size(); }
  UnifiedExample at(std::uint64_t index) override;

 private:
  std::filesystem::path path_;
  std::string dataset_id_;
  std::ifstream in_;
  std::vector<std::uint64_t> offsets_;
};

// Emits plan.epoch_length examples. sources[i] serves plan member i.
void sample_stream(const SamplePlan& plan, std::span<ExampleSource* const> sources,
                   const std::function<void(const UnifiedExample&)>& sink);

std::vector<UnifiedExample> sample_stream(const SamplePlan& plan,
                                          std::span<ExampleSource* const> sources);

}  // namespace mvpforge
