#include "mvpforge/decontam.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>

#include "mvpforge/error.hpp"
#include "mvpforge/parallel.hpp"

namespace mvpforge {

namespace {

constexpr std::array<char, 8> kIndexMagic = {'M', 'V', 'P', 'N', 'G', 'R', 'A', 'M'};
constexpr std::uint32_t kIndexVersion = 1;

std::uint64_t fmix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

std::uint64_t get_le(std::istream& in, int bytes, const std::filesystem::path& path) {
  unsigned char b[8] = {};
  if (!in.read(reinterpret_cast<char*>(b), bytes)) {
    throw Error(ErrorKind::schema, "index-truncated", "truncated index file " + path.string());
  }
  std::uint64_t v = 0;
  for (int i = bytes - 1; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

void sort_unique(std::vector<std::uint64_t>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

void check_order(int order, const DecontamConfig& cfg) {
  if (order < cfg.min_order || order > cfg.max_order) {
    throw Error(ErrorKind::config, "order-out-of-range",
                "index order " + std::to_string(order) + " outside [" +
                    std::to_string(cfg.min_order) + ", " + std::to_string(cfg.max_order) + "]");
  }
}

std::vector<std::string> overlap_tokens(const UnifiedExample& ex, const DecontamConfig& cfg) {
  return tokenize(overlap_text(ex), cfg.normalize);
}

}  // namespace

void DecontamConfig::validate() const {
  if (min_order < 1 || max_order < min_order) {
    throw Error(ErrorKind::config, "bad-order-bounds",
                "need 1 <= min_order <= max_order");
  }
  if (!(percentile >= 0.0 && percentile <= 100.0)) {
    throw Error(ErrorKind::config, "bad-percentile", "percentile must lie in [0, 100]");
  }
}

std::string overlap_text(const UnifiedExample& ex) {
  std::string text;
  text.reserve(ex.input.size() + 1 + ex.output.size());
  text.append(ex.input).append(" ").append(ex.output);
  return text;
}

int compute_order(std::span<const std::size_t> eval_lengths, const DecontamConfig& cfg) {
  cfg.validate();
  if (eval_lengths.empty()) {
    throw Error(ErrorKind::data, "no-eval-examples", "evaluation set is empty");
  }
  std::vector<std::size_t> sorted(eval_lengths.begin(), eval_lengths.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  // The small epsilon keeps p * N / 100 from overshooting an exact integer.
  auto rank = static_cast<std::size_t>(std::ceil(cfg.percentile * n / 100.0 - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  const std::size_t value = sorted[rank - 1];
  return static_cast<int>(std::clamp<std::size_t>(value, static_cast<std::size_t>(cfg.min_order),
                                                   static_cast<std::size_t>(cfg.max_order)));
}

std::uint64_t hash_token(std::string_view token) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : token) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmix64(h);
}

std::uint64_t hash_window(std::span<const std::uint64_t> token_hashes) {
  std::uint64_t h = fmix64(token_hashes.size());
  for (std::uint64_t t : token_hashes) h = fmix64(h + 0x9e3779b97f4a7c15ULL + t);
  return h;
}

std::vector<std::uint64_t> window_hashes(const std::vector<std::string>& tokens, int order) {
  std::vector<std::uint64_t> out;
  const auto n = static_cast<std::size_t>(order);
  if (order < 1 || tokens.size() < n) return out;
  std::vector<std::uint64_t> th(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) th[i] = hash_token(tokens[i]);
  out.reserve(tokens.size() - n + 1);
  for (std::size_t i = 0; i + n <= th.size(); ++i) {
    out.push_back(hash_window(std::span<const std::uint64_t>(th).subspan(i, n)));
  }
  return out;
}

NGramIndex::NGramIndex(int order, std::vector<std::uint64_t> hashes, std::string source)
    : order_(order), grams_(std::move(hashes)), source_(std::move(source)) {
  sort_unique(grams_);
}

bool NGramIndex::contains(std::uint64_t hash) const {
  return std::binary_search(grams_.begin(), grams_.end(), hash);
}

void NGramIndex::merge(const NGramIndex& other) {
  if (other.order_ != order_) {
    throw Error(ErrorKind::config, "order-mismatch", "cannot merge indexes of different order");
  }
  std::vector<std::uint64_t> merged;
  merged.reserve(grams_.size() + other.grams_.size());
  std::set_union(grams_.begin(), grams_.end(), other.grams_.begin(), other.grams_.end(),
                 std::back_inserter(merged));
  grams_ = std::move(merged);
}

void NGramIndex::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "unwritable", "cannot write " + path.string());
  out.write(kIndexMagic.data(), kIndexMagic.size());
  put_u32(out, kIndexVersion);
  put_u32(out, static_cast<std::uint32_t>(order_));
  put_u64(out, grams_.size());
  for (std::uint64_t h : grams_) put_u64(out, h);
  if (!out) throw Error(ErrorKind::io, "unwritable", "failed writing " + path.string());
}

NGramIndex NGramIndex::load(const std::filesystem::path& path, std::string source) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "missing-file", "cannot open " + path.string());
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kIndexMagic) {
    throw Error(ErrorKind::schema, "index-magic", path.string() + " is not an n-gram index");
  }
  const auto version = get_le(in, 4, path);
  if (version != kIndexVersion) {
    throw Error(ErrorKind::schema, "index-version",
                "unsupported index version " + std::to_string(version));
  }
  NGramIndex index;
  index.order_ = static_cast<int>(get_le(in, 4, path));
  const auto count = get_le(in, 8, path);
  index.grams_.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) index.grams_.push_back(get_le(in, 8, path));
  if (!std::is_sorted(index.grams_.begin(), index.grams_.end()) ||
      std::adjacent_find(index.grams_.begin(), index.grams_.end()) != index.grams_.end()) {
    throw Error(ErrorKind::schema, "index-unsorted", path.string() + " hashes are not sorted");
  }
  index.source_ = source.empty() ? path.stem().string() : std::move(source);
  return index;
}

NGramIndex build_index_with_order(std::span<const UnifiedExample> eval_examples, int order,
                                  const DecontamConfig& cfg, std::string source,
                                  unsigned workers) {
  check_order(order, cfg);
  std::vector<std::vector<std::uint64_t>> partial(std::max(1u, workers));
  parallel_chunks(eval_examples.size(), workers,
                  [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                    auto& out = partial[chunk];
                    for (std::size_t i = begin; i < end; ++i) {
                      auto w = window_hashes(overlap_tokens(eval_examples[i], cfg), order);
                      out.insert(out.end(), w.begin(), w.end());
                    }
                    sort_unique(out);
                  });
  NGramIndex index(order, {}, std::move(source));
  for (const auto& p : partial) index.merge(NGramIndex(order, p, ""));
  return index;
}

NGramIndex build_index(std::span<const UnifiedExample> eval_examples, const DecontamConfig& cfg,
                       std::string source, unsigned workers) {
  std::vector<std::size_t> lengths;
  lengths.reserve(eval_examples.size());
  for (const auto& ex : eval_examples) lengths.push_back(overlap_tokens(ex, cfg).size());
  const int order = compute_order(lengths, cfg);
  return build_index_with_order(eval_examples, order, cfg, std::move(source), workers);
}

ExactNGramIndex::ExactNGramIndex(std::span<const UnifiedExample> eval_examples, int order,
                                 const DecontamConfig& cfg, std::string source)
    : order_(order), source_(std::move(source)) {
  check_order(order, cfg);
  const auto n = static_cast<std::size_t>(order);
  for (const auto& ex : eval_examples) {
    auto tokens = overlap_tokens(ex, cfg);
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      std::vector<std::string> window(tokens.begin() + i, tokens.begin() + i + n);
      grams_.insert(join(window, " "));
    }
  }
}

bool ExactNGramIndex::overlaps(const std::vector<std::string>& tokens) const {
  const auto n = static_cast<std::size_t>(order_);
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::vector<std::string> window(tokens.begin() + i, tokens.begin() + i + n);
    if (grams_.count(join(window, " "))) return true;
  }
  return false;
}

void FilterReport::merge(const FilterReport& next) {
  if (per_index.empty()) per_index = next.per_index;
  else if (per_index.size() == next.per_index.size()) {
    for (std::size_t i = 0; i < per_index.size(); ++i) {
      per_index[i].hits += next.per_index[i].hits;
      per_index[i].shorter_than_order += next.per_index[i].shorter_than_order;
    }
  } else {
    throw Error(ErrorKind::config, "report-mismatch", "cannot merge reports over different indexes");
  }
  examined += next.examined;
  removed += next.removed;
  for (std::uint64_t pos : next.removed_sample) {
    if (removed_sample.size() >= kSampleLimit) break;
    removed_sample.push_back(pos);
  }
}

Decontaminator::Decontaminator(std::span<const NGramIndex> indexes, const DecontamConfig& cfg)
    : indexes_(indexes), cfg_(cfg) {
  cfg_.validate();
  for (const auto& idx : indexes_) check_order(idx.order(), cfg_);
}

FilterReport Decontaminator::empty_report() const {
  FilterReport report;
  for (const auto& idx : indexes_) {
    report.per_index.push_back({idx.source_dataset(), idx.order(), idx.gram_count(), 0, 0});
  }
  return report;
}

bool Decontaminator::check(const UnifiedExample& ex, std::uint64_t position,
                           FilterReport& report) const {
  if (report.per_index.size() != indexes_.size()) report = empty_report();
  ++report.examined;
  const auto tokens = overlap_tokens(ex, cfg_);
  std::vector<std::uint64_t> th(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) th[i] = hash_token(tokens[i]);

  bool hit_any = false;
  for (std::size_t k = 0; k < indexes_.size(); ++k) {
    const auto n = static_cast<std::size_t>(indexes_[k].order());
    if (th.size() < n) {
      ++report.per_index[k].shorter_than_order;
      continue;
    }
    for (std::size_t i = 0; i + n <= th.size(); ++i) {
      if (indexes_[k].contains(hash_window(std::span<const std::uint64_t>(th).subspan(i, n)))) {
        ++report.per_index[k].hits;
        hit_any = true;
        break;
      }
    }
  }
  if (hit_any) {
    ++report.removed;
    if (report.removed_sample.size() < FilterReport::kSampleLimit) {
      report.removed_sample.push_back(position);
    }
  }
  return hit_any;
}

std::vector<char> Decontaminator::flag_batch(std::span<const UnifiedExample> batch,
                                             std::uint64_t first_position,
                                             FilterReport& report, unsigned workers) const {
  const std::size_t chunks = std::max(1u, workers);
  std::vector<FilterReport> reports(chunks, empty_report());
  std::vector<char> remove(batch.size(), 0);
  parallel_chunks(batch.size(), workers,
                  [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                    for (std::size_t i = begin; i < end; ++i) {
                      remove[i] = check(batch[i], first_position + i, reports[chunk]) ? 1 : 0;
                    }
                  });
  if (report.per_index.size() != indexes_.size()) report = empty_report();
  for (const auto& r : reports) report.merge(r);
  return remove;
}

std::vector<UnifiedExample> Decontaminator::filter_batch(std::span<const UnifiedExample> batch,
                                                         std::uint64_t first_position,
                                                         FilterReport& report,
                                                         unsigned workers) const {
  const auto remove = flag_batch(batch, first_position, report, workers);
  std::vector<UnifiedExample> kept;
  kept.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!remove[i]) kept.push_back(batch[i]);
  }
  return kept;
}

std::pair<std::vector<UnifiedExample>, FilterReport> filter_corpus(
    std::span<const UnifiedExample> train, std::span<const NGramIndex> indexes,
    const DecontamConfig& cfg, unsigned workers) {
  Decontaminator filter(indexes, cfg);
  FilterReport report = filter.empty_report();
  auto kept = filter.filter_batch(train, 0, report, workers);
  return {std::move(kept), std::move(report)};
}

std::pair<std::vector<UnifiedExample>, FilterReport> filter_corpus_exact(
    std::span<const UnifiedExample> train, std::span<const ExactNGramIndex> indexes,
    const DecontamConfig& cfg) {
  FilterReport report;
  for (const auto& idx : indexes) {
    check_order(idx.order(), cfg);
    report.per_index.push_back({idx.source_dataset(), idx.order(), idx.gram_count(), 0, 0});
  }
  std::vector<UnifiedExample> kept;
  for (std::size_t pos = 0; pos < train.size(); ++pos) {
    ++report.examined;
    const auto tokens = overlap_tokens(train[pos], cfg);
    bool hit_any = false;
    for (std::size_t k = 0; k < indexes.size(); ++k) {
      if (tokens.size() < static_cast<std::size_t>(indexes[k].order())) {
        ++report.per_index[k].shorter_than_order;
      } else if (indexes[k].overlaps(tokens)) {
        ++report.per_index[k].hits;
        hit_any = true;
      }
    }
    if (hit_any) {
      ++report.removed;
      if (report.removed_sample.size() < FilterReport::kSampleLimit) {
        report.removed_sample.push_back(pos);
      }
    } else {
      kept.push_back(train[pos]);
    }
  }
  return {std::move(kept), std::move(report)};
}

}  // namespace mvpforge
