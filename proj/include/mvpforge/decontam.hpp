#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mvpforge/corpus_model.hpp"
#include "mvpforge/text.hpp"

namespace mvpforge {

struct DecontamConfig {
  double percentile = 5.0;
  int max_order = 13;
  int min_order = 1;
  Tokenizer normalize = Tokenizer::whitespace;

  void validate() const;
};

// Lowercased whitespace tokens. Deterministic; empty text gives no tokens.
inline std::vector<std::string> tokenize_for_overlap(std::string_view text) {
  return lowercase_tokens(text);
}

// Text that takes part in overlap checks: input and output joined by a space.
std::string overlap_text(const UnifiedExample& ex);

// Nearest-rank percentile (the ceil(p/100 * N)-th smallest length), clamped to
// [min_order, max_order]. Throws "no-eval-examples" on an empty list.
int compute_order(std::span<const std::size_t> eval_lengths, const DecontamConfig& cfg);

// 64-bit hash of tokens[start, start + n).
std::uint64_t hash_window(std::span<const std::uint64_t> token_hashes);
std::uint64_t hash_token(std::string_view token);

// Hashes every order-n window of `tokens`.
std::vector<std::uint64_t> window_hashes(const std::vector<std::string>& tokens, int order);

class NGramIndex {
 public:
  NGramIndex() = default;
  NGramIndex(int order, std::vector<std::uint64_t> hashes, std::string source);

  int order() const { return order_; }
  std::size_t gram_count() const { return grams_.size(); }
  const std::string& source_dataset() const { return source_; }
  const std::vector<std::uint64_t>& grams() const { return grams_; }

  bool contains(std::uint64_t hash) const;

  // Set union; both sides must share the order.
  void merge(const NGramIndex& other);

  void save(const std::filesystem::path& path) const;
  static NGramIndex load(const std::filesystem::path& path, std::string source = "");

 private:
  int order_ = 0;
  std::vector<std::uint64_t> grams_;  // sorted, unique
  std::string source_;
};

// Order chosen from the examples' own word lengths, then every order-n window
// of every example inserted. `workers` > 1 hashes shards in parallel.
NGramIndex build_index(std::span<const UnifiedExample> eval_examples,
                       const DecontamConfig& cfg, std::string source = "",
                       unsigned workers = 1);

// Same, with the order fixed by the caller.
NGramIndex build_index_with_order(std::span<const UnifiedExample> eval_examples,
                                  int order, const DecontamConfig& cfg,
                                  std::string source = "", unsigned workers = 1);

// Exact string-set counterpart of NGramIndex, used to verify hashed decisions.
class ExactNGramIndex {
 public:
  ExactNGramIndex(std::span<const UnifiedExample> eval_examples, int order,
                  const DecontamConfig& cfg, std::string source = "");

  int order() const { return order_; }
  std::size_t gram_count() const { return grams_.size(); }
  const std::string& source_dataset() const { return source_; }
  bool overlaps(const std::vector<std::string>& tokens) const;

 private:
  int order_;
  std::unordered_set<std::string> grams_;
  std::string source_;
};

struct FilterReport {
  struct IndexStats {
    std::string source;
    int order = 0;
    std::uint64_t gram_count = 0;
    std::uint64_t hits = 0;
    // Examples with fewer words than `order`; they can never hit this index.
    std::uint64_t shorter_than_order = 0;
  };

  static constexpr std::size_t kSampleLimit = 20;

  std::uint64_t examined = 0;
  std::uint64_t removed = 0;
  std::vector<IndexStats> per_index;
  // Stream positions (0-based) of the first removed examples.
  std::vector<std::uint64_t> removed_sample;

  // Associative merge of a report covering the stream segment that follows.
  void merge(const FilterReport& next);
};

// Decides removal for one example at a time against a fixed set of indexes.
class Decontaminator {
 public:
  Decontaminator(std::span<const NGramIndex> indexes, const DecontamConfig& cfg);

  FilterReport empty_report() const;

  // Returns true when the example must be removed; updates `report`.
  bool check(const UnifiedExample& ex, std::uint64_t position, FilterReport& report) const;

  // Removal flag per batch element, computed across `workers` threads.
  std::vector<char> flag_batch(std::span<const UnifiedExample> batch,
                               std::uint64_t first_position, FilterReport& report,
                               unsigned workers = 1) const;

  // Filters a batch, splitting it across `workers` threads. Kept examples
  // preserve input order; `first_position` is the stream offset of batch[0].
  std::vector<UnifiedExample> filter_batch(std::span<const UnifiedExample> batch,
                                           std::uint64_t first_position,
                                           FilterReport& report,
                                           unsigned workers = 1) const;

 private:
  std::span<const NGramIndex> indexes_;
  DecontamConfig cfg_;
};

std::pair<std::vector<UnifiedExample>, FilterReport> filter_corpus(
    std::span<const UnifiedExample> train, std::span<const NGramIndex> indexes,
    const DecontamConfig& cfg, unsigned workers = 1);

std::pair<std::vector<UnifiedExample>, FilterReport> filter_corpus_exact(
    std::span<const UnifiedExample> train, std::span<const ExactNGramIndex> indexes,
    const DecontamConfig& cfg);

}  // namespace mvpforge
