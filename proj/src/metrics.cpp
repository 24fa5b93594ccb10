#include "mvpforge/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "mvpforge/error.hpp"
#include "mvpforge/porter_stemmer.hpp"

namespace mvpforge {

namespace {

using Tokens = std::vector<std::string>;
using NgramCounts = std::unordered_map<std::string, std::size_t>;

NgramCounts ngram_counts(const Tokens& tokens, int n) {
  NgramCounts counts;
  const auto len = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + len <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t k = 1; k < len; ++k) key.append(" ").append(tokens[i + k]);
    ++counts[key];
  }
  return counts;
}

std::size_t ngram_total(const Tokens& tokens, int n) {
  const auto len = static_cast<std::size_t>(n);
  return tokens.size() >= len ? tokens.size() - len + 1 : 0;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

void require_pairs(std::span<const EvalPair> pairs) {
  if (pairs.empty()) throw Error(ErrorKind::data, "no-pairs", "no evaluation pairs");
  for (const auto& p : pairs) {
    if (p.references.empty()) {
      throw Error(ErrorKind::data, "no-references", "evaluation pair without references");
    }
  }
}

double f1_of(std::size_t overlap, std::size_t hyp_total, std::size_t ref_total) {
  if (overlap == 0 || hyp_total == 0 || ref_total == 0) return 0.0;
  const double p = static_cast<double>(overlap) / static_cast<double>(hyp_total);
  const double r = static_cast<double>(overlap) / static_cast<double>(ref_total);
  return 2.0 * p * r / (p + r);
}

Tokens rouge_tokens(std::string_view text, const RougeOptions& opts) {
  Tokens t = tokenize(text, opts.tokenizer);
  if (opts.stem) {
    for (auto& w : t) w = porter_stem(w);
  }
  return t;
}

}  // namespace

// ---------------------------------------------------------------- BLEU

BleuMode parse_bleu_mode(std::string_view name) {
  if (name == "corpus") return BleuMode::corpus;
  if (name == "sentence") return BleuMode::sentence;
  throw Error(ErrorKind::config, "unknown-bleu-mode", "unknown BLEU mode '" + std::string(name) + "'");
}

Smoothing parse_smoothing(std::string_view name) {
  if (name == "none") return Smoothing::none;
  if (name == "method7") return Smoothing::method7;
  throw Error(ErrorKind::config, "unknown-smoothing", "unknown smoothing '" + std::string(name) + "'");
}

void BleuStats::add(const BleuStats& other) {
  if (matches.size() < other.matches.size()) {
    matches.resize(other.matches.size(), 0);
    candidates.resize(other.candidates.size(), 0);
  }
  for (std::size_t i = 0; i < other.matches.size(); ++i) {
    matches[i] += other.matches[i];
    candidates[i] += other.candidates[i];
  }
  hyp_len += other.hyp_len;
  ref_len += other.ref_len;
}

BleuStats bleu_stats(const Tokens& hyp, const std::vector<Tokens>& refs, int max_n) {
  BleuStats stats;
  stats.matches.assign(static_cast<std::size_t>(max_n), 0);
  stats.candidates.assign(static_cast<std::size_t>(max_n), 0);
  stats.hyp_len = hyp.size();

  std::size_t best_len = 0;
  std::size_t best_diff = std::numeric_limits<std::size_t>::max();
  for (const auto& ref : refs) {
    const std::size_t diff = ref.size() > hyp.size() ? ref.size() - hyp.size() : hyp.size() - ref.size();
    if (diff < best_diff || (diff == best_diff && ref.size() < best_len)) {
      best_diff = diff;
      best_len = ref.size();
    }
  }
  stats.ref_len = best_len;
  if (hyp.empty()) return stats;

  for (int n = 1; n <= max_n; ++n) {
    const NgramCounts counts = ngram_counts(hyp, n);
    NgramCounts max_ref;
    for (const auto& ref : refs) {
      for (const auto& [gram, c] : ngram_counts(ref, n)) {
        auto& slot = max_ref[gram];
        slot = std::max(slot, c);
      }
    }
    std::size_t clipped = 0;
    for (const auto& [gram, c] : counts) {
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) clipped += std::min(c, it->second);
    }
    stats.matches[n - 1] = clipped;
    stats.candidates[n - 1] = ngram_total(hyp, n);
  }
  return stats;
}

double bleu_from_stats(const BleuStats& stats, int max_n, Smoothing smoothing) {
  if (stats.matches.empty() || stats.matches[0] == 0) return 0.0;

  double bp = 1.0;
  if (stats.hyp_len <= stats.ref_len) {
    bp = std::exp(1.0 - static_cast<double>(stats.ref_len) / static_cast<double>(stats.hyp_len));
  }

  // Orders with no candidate n-gram at all (every hypothesis shorter than n)
  // carry no evidence and drop out; the remaining orders share the weight.
  int order = 0;
  while (order < max_n && stats.candidates[static_cast<std::size_t>(order)] != 0) ++order;

  auto raw = [&](int i) {
    const auto idx = static_cast<std::size_t>(i);
    if (idx >= stats.candidates.size() || stats.candidates[idx] == 0) return 0.0;
    return static_cast<double>(stats.matches[idx]) / static_cast<double>(stats.candidates[idx]);
  };
  std::vector<double> p(static_cast<std::size_t>(order));
  for (int i = 0; i < order; ++i) p[i] = raw(i);

  if (smoothing == Smoothing::none) {
    for (double v : p) {
      if (v == 0.0) return 0.0;
    }
  } else {
    if (stats.matches.size() < 5) {
      throw Error(ErrorKind::config, "bleu-stats", "method7 needs 5-gram statistics");
    }
    // method4: zero precisions get (i + k / ln(hyp_len)) / denominator, k = 5.
    // ln(1) = 0 leaves the precision for method5 to fill in.
    constexpr double k = 5.0;
    const double log_len = std::log(static_cast<double>(stats.hyp_len));
    for (int i = 0; i < order; ++i) {
      if (stats.matches[i] == 0 && log_len != 0.0) {
        p[i] = (static_cast<double>(i) + k / log_len) / static_cast<double>(stats.candidates[i]);
      }
    }
    // method5: average each precision with its smoothed predecessor and its
    // (pre-average) successor. The successor of the last order is the raw
    // 5-gram precision at full order, else the raw next-order precision.
    std::vector<double> next(p.begin(), p.end());
    next.push_back(order == max_n ? raw(4) : raw(order));
    double prev = p[0] + 1.0;
    for (int i = 0; i < order; ++i) {
      p[i] = (prev + p[i] + next[i + 1]) / 3.0;
      prev = p[i];
    }
  }

  double log_sum = 0.0;
  const double w = 1.0 / static_cast<double>(order);
  for (double v : p) log_sum += w * std::log(v);
  return bp * std::exp(log_sum);
}

namespace {

int stats_orders(const BleuOptions& opts) {
  return opts.smoothing == Smoothing::method7 ? std::max(opts.max_n, 5) : opts.max_n;
}

BleuStats pair_stats(const EvalPair& pair, const BleuOptions& opts) {
  std::vector<Tokens> refs;
  for (const auto& r : pair.references) refs.push_back(tokenize(r, opts.tokenizer));
  return bleu_stats(tokenize(pair.hypothesis, opts.tokenizer), refs, stats_orders(opts));
}

void check_bleu_options(const BleuOptions& opts) {
  if (opts.max_n < 1) throw Error(ErrorKind::config, "bad-max-n", "BLEU max_n must be >= 1");
}

}  // namespace

std::vector<double> sentence_bleu_scores(std::span<const EvalPair> pairs, const BleuOptions& opts) {
  check_bleu_options(opts);
  require_pairs(pairs);
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (const auto& pair : pairs) {
    scores.push_back(bleu_from_stats(pair_stats(pair, opts), opts.max_n, opts.smoothing));
  }
  return scores;
}

double bleu(std::span<const EvalPair> pairs, const BleuOptions& opts) {
  check_bleu_options(opts);
  require_pairs(pairs);
  if (opts.mode == BleuMode::sentence) return mean(sentence_bleu_scores(pairs, opts));
  BleuStats total;
  for (const auto& pair : pairs) total.add(pair_stats(pair, opts));
  return bleu_from_stats(total, opts.max_n, opts.smoothing);
}

// ---------------------------------------------------------------- ROUGE

std::vector<double> rouge_n_scores(std::span<const EvalPair> pairs, int n, const RougeOptions& opts) {
  require_pairs(pairs);
  if (n < 1) throw Error(ErrorKind::config, "bad-n", "ROUGE-N needs n >= 1");
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (const auto& pair : pairs) {
    const Tokens hyp = rouge_tokens(pair.hypothesis, opts);
    const NgramCounts hc = ngram_counts(hyp, n);
    double best = 0.0;
    for (const auto& ref_text : pair.references) {
      const Tokens ref = rouge_tokens(ref_text, opts);
      const NgramCounts rc = ngram_counts(ref, n);
      std::size_t overlap = 0;
      for (const auto& [gram, c] : hc) {
        auto it = rc.find(gram);
        if (it != rc.end()) overlap += std::min(c, it->second);
      }
      const std::size_t ht = ngram_total(hyp, n), rt = ngram_total(ref, n);
      // Neither side has an n-gram: equal token sequences score 1.
      best = std::max(best, ht == 0 && rt == 0 ? (hyp == ref ? 1.0 : 0.0) : f1_of(overlap, ht, rt));
    }
    scores.push_back(best);
  }
  return scores;
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> row(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = 0;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = a[i - 1] == b[j - 1] ? diag + 1 : std::max(row[j], row[j - 1]);
      diag = up;
    }
  }
  return row[b.size()];
}

std::vector<double> rouge_l_scores(std::span<const EvalPair> pairs, const RougeOptions& opts) {
  require_pairs(pairs);
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (const auto& pair : pairs) {
    const Tokens hyp = rouge_tokens(pair.hypothesis, opts);
    double best = 0.0;
    for (const auto& ref_text : pair.references) {
      const Tokens ref = rouge_tokens(ref_text, opts);
      best = std::max(best, hyp.empty() && ref.empty() ? 1.0 : f1_of(lcs_length(hyp, ref), hyp.size(), ref.size()));
    }
    scores.push_back(best);
  }
  return scores;
}

double rouge_n(std::span<const EvalPair> pairs, int n, const RougeOptions& opts) {
  return mean(rouge_n_scores(pairs, n, opts));
}

double rouge_l(std::span<const EvalPair> pairs, const RougeOptions& opts) {
  return mean(rouge_l_scores(pairs, opts));
}

// ---------------------------------------------------------------- METEOR

namespace {

// Depth-first search over hypothesis positions for the alignment with the
// fewest chunks among all maximum-coverage, stage-consistent alignments.
//
// Stage consistency: for every surface type w exactly min(h_w, r_w) pairs
// are exact pairs, and within every stem class the total number of pairs is
// min(H_s, R_s). The remaining pairs join different surface forms that share
// a stem.
class AlignmentSearch {
 public:
  static constexpr std::size_t kNodeBudget = 200000;

  AlignmentSearch(const Tokens& hyp, const Tokens& ref) : m_(hyp.size()), n_(ref.size()) {
    std::unordered_map<std::string, int> type_ids;
    std::unordered_map<std::string, int> class_ids;
    auto type_of = [&](const std::string& w) {
      return type_ids.emplace(w, static_cast<int>(type_ids.size())).first->second;
    };
    auto class_of = [&](const std::string& w) {
      const std::string s = porter_stem(w);
      return class_ids.emplace(s, static_cast<int>(class_ids.size())).first->second;
    };
    for (const auto& w : hyp) {
      htype_.push_back(type_of(w));
      hclass_.push_back(class_of(w));
    }
    for (const auto& w : ref) {
      rtype_.push_back(type_of(w));
      rclass_.push_back(class_of(w));
    }
    const std::size_t types = type_ids.size();
    const std::size_t classes = class_ids.size();
    type_class_.assign(types, 0);
    rem_h_type_.assign(types, 0);
    rem_r_type_.assign(types, 0);
    rem_h_class_.assign(classes, 0);
    rem_r_class_.assign(classes, 0);
    for (std::size_t i = 0; i < m_; ++i) {
      ++rem_h_type_[htype_[i]];
      ++rem_h_class_[hclass_[i]];
      type_class_[htype_[i]] = hclass_[i];
    }
    for (std::size_t j = 0; j < n_; ++j) {
      ++rem_r_type_[rtype_[j]];
      ++rem_r_class_[rclass_[j]];
      type_class_[rtype_[j]] = rclass_[j];
    }
    same_needed_.assign(types, 0);
    cross_needed_.assign(classes, 0);
    std::vector<int> same_in_class(classes, 0);
    for (std::size_t t = 0; t < types; ++t) {
      same_needed_[t] = std::min(rem_h_type_[t], rem_r_type_[t]);
      same_in_class[type_class_[t]] += same_needed_[t];
      total_needed_ += same_needed_[t];
    }
    for (std::size_t c = 0; c < classes; ++c) {
      cross_needed_[c] = std::min(rem_h_class_[c], rem_r_class_[c]) - same_in_class[c];
      total_needed_ += cross_needed_[c];
    }
    matches_ = static_cast<std::size_t>(total_needed_);
    ref_used_.assign(n_, 0);
  }

  MeteorAlignment run() {
    MeteorAlignment result;
    result.matches = matches_;
    if (matches_ == 0) return result;
    best_ = greedy_chunks();
    // One chunk is the floor whenever anything aligns.
    if (best_ > 1) dfs(0, -1, 0);
    result.chunks = best_;
    result.exact = nodes_ <= kNodeBudget;
    return result;
  }

 private:
  // Forward greedy: exact pairs first, then stem pairs. Saturates both
  // stages, so it is a valid starting bound.
  std::size_t greedy_chunks() const {
    std::vector<int> hyp_to_ref(m_, -1);
    std::vector<char> used(n_, 0);
    for (int stage = 0; stage < 2; ++stage) {
      for (std::size_t i = 0; i < m_; ++i) {
        if (hyp_to_ref[i] >= 0) continue;
        for (std::size_t j = 0; j < n_; ++j) {
          if (used[j]) continue;
          const bool ok = stage == 0 ? htype_[i] == rtype_[j] : hclass_[i] == rclass_[j];
          if (ok) {
            hyp_to_ref[i] = static_cast<int>(j);
            used[j] = 1;
            break;
          }
        }
      }
    }
    std::size_t chunks = 0;
    int prev = -2;
    for (std::size_t i = 0; i < m_; ++i) {
      const int j = hyp_to_ref[i];
      if (j >= 0 && !(prev >= 0 && j == prev + 1)) ++chunks;
      prev = j;
    }
    return chunks;
  }

  bool class_feasible(int c) const {
    int need = cross_needed_[c];
    for (std::size_t t = 0; t < same_needed_.size(); ++t) {
      if (type_class_[t] == c) need += same_needed_[t];
    }
    return need <= rem_h_class_[c] && need <= rem_r_class_[c];
  }

  void dfs(std::size_t i, int prev_j, std::size_t chunks) {
    if (++nodes_ > kNodeBudget) return;
    if (chunks >= best_) return;
    if (total_needed_ == 0) {
      best_ = chunks;
      return;
    }
    if (i == m_ || static_cast<std::size_t>(total_needed_) > m_ - i) return;

    const int t = htype_[i];
    const int c = hclass_[i];
    --rem_h_type_[t];
    --rem_h_class_[c];

    auto try_ref = [&](std::size_t j) {
      if (ref_used_[j] || rclass_[j] != c) return;
      const int rt = rtype_[j];
      const bool same = rt == t;
      if (same ? same_needed_[t] == 0 : cross_needed_[c] == 0) return;
      if (same) --same_needed_[t];
      else --cross_needed_[c];
      --total_needed_;
      ref_used_[j] = 1;
      --rem_r_type_[rt];
      --rem_r_class_[c];
      // A cross pair spends a hypothesis word of type t and a reference word
      // of type rt that must not be needed for exact pairs.
      const bool feasible = same || (same_needed_[t] <= rem_h_type_[t] &&
                                     same_needed_[rt] <= rem_r_type_[rt] && class_feasible(c));
      if (feasible) {
        const bool extends = prev_j >= 0 && static_cast<int>(j) == prev_j + 1;
        dfs(i + 1, static_cast<int>(j), chunks + (extends ? 0 : 1));
      }
      ++rem_r_class_[c];
      ++rem_r_type_[rt];
      ref_used_[j] = 0;
      ++total_needed_;
      if (same) ++same_needed_[t];
      else ++cross_needed_[c];
    };

    if (prev_j >= 0 && static_cast<std::size_t>(prev_j + 1) < n_) try_ref(prev_j + 1);
    for (std::size_t j = 0; j < n_; ++j) {
      if (prev_j >= 0 && static_cast<int>(j) == prev_j + 1) continue;
      try_ref(j);
    }
    // Leave position i unaligned.
    if (same_needed_[t] <= rem_h_type_[t] && class_feasible(c)) dfs(i + 1, -1, chunks);

    ++rem_h_class_[c];
    ++rem_h_type_[t];
  }

  std::size_t m_;
  std::size_t n_;
  std::vector<int> htype_, rtype_, hclass_, rclass_;
  std::vector<int> type_class_;
  std::vector<int> rem_h_type_, rem_r_type_, rem_h_class_, rem_r_class_;
  std::vector<int> same_needed_, cross_needed_;
  int total_needed_ = 0;
  std::size_t matches_ = 0;
  std::vector<char> ref_used_;
  std::size_t best_ = 0;
  std::size_t nodes_ = 0;
};

}  // namespace

MeteorAlignment meteor_align(const Tokens& hyp, const Tokens& ref) {
  return AlignmentSearch(hyp, ref).run();
}

double meteor_from_alignment(const MeteorAlignment& a, std::size_t hyp_len, std::size_t ref_len,
                             const MeteorParams& params) {
  if (a.matches == 0 || hyp_len == 0 || ref_len == 0) return 0.0;
  const double m = static_cast<double>(a.matches);
  const double precision = m / static_cast<double>(hyp_len);
  const double recall = m / static_cast<double>(ref_len);
  const double fmean =
      precision * recall / (params.alpha * precision + (1.0 - params.alpha) * recall);
  const double penalty = params.gamma * std::pow(static_cast<double>(a.chunks) / m, params.beta);
  return fmean * (1.0 - penalty);
}

std::vector<double> meteor_scores(std::span<const EvalPair> pairs, const MeteorParams& params) {
  require_pairs(pairs);
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (const auto& pair : pairs) {
    const Tokens hyp = tokenize(pair.hypothesis, params.tokenizer);
    double best = 0.0;
    for (const auto& ref_text : pair.references) {
      const Tokens ref = tokenize(ref_text, params.tokenizer);
      best = std::max(best, meteor_from_alignment(meteor_align(hyp, ref), hyp.size(), ref.size(), params));
    }
    scores.push_back(best);
  }
  return scores;
}

double meteor_basic(std::span<const EvalPair> pairs, const MeteorParams& params) {
  return mean(meteor_scores(pairs, params));
}

// ---------------------------------------------------------------- Distinct

double distinct_n(std::span<const std::string> hypotheses, int n, Tokenizer tokenizer) {
  if (n < 1) throw Error(ErrorKind::config, "bad-n", "distinct-n needs n >= 1");
  std::unordered_set<std::string> distinct;
  std::size_t total = 0;
  for (const auto& h : hypotheses) {
    for (auto& [gram, c] : ngram_counts(tokenize(h, tokenizer), n)) {
      distinct.insert(gram);
      total += c;
    }
  }
  return total ? static_cast<double>(distinct.size()) / static_cast<double>(total) : 0.0;
}

// ---------------------------------------------------------------- EM / F1

namespace {

bool is_ascii_punct(unsigned char c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
         (c >= 123 && c <= 126);
}

// Word characters for article boundaries; non-ASCII bytes count as letters.
bool is_word_char(unsigned char c) {
  return std::isalnum(c) || c == '_' || c >= 0x80;
}

}  // namespace

std::string normalize_answer(std::string_view text) {
  std::string s;
  s.reserve(text.size());
  for (unsigned char c : to_lower_ascii(text)) {
    if (!is_ascii_punct(c)) s.push_back(static_cast<char>(c));
  }
  // Articles bounded by non-word characters become spaces.
  std::string no_articles;
  no_articles.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    bool replaced = false;
    if (i == 0 || !is_word_char(static_cast<unsigned char>(s[i - 1]))) {
      for (std::string_view art : {"the", "an", "a"}) {
        if (s.compare(i, art.size(), art) == 0) {
          const std::size_t end = i + art.size();
          if (end == s.size() || !is_word_char(static_cast<unsigned char>(s[end]))) {
            no_articles.push_back(' ');
            i = end;
            replaced = true;
            break;
          }
        }
      }
    }
    if (!replaced) no_articles.push_back(s[i++]);
  }
  return join(split_whitespace(no_articles), " ");
}

double exact_match(std::string_view prediction, std::string_view gold) {
  return normalize_answer(prediction) == normalize_answer(gold) ? 1.0 : 0.0;
}

double token_f1(std::string_view prediction, std::string_view gold) {
  const Tokens pred = split_whitespace(normalize_answer(prediction));
  const Tokens ref = split_whitespace(normalize_answer(gold));
  if (pred.empty() || ref.empty()) return pred == ref ? 1.0 : 0.0;
  std::unordered_map<std::string, std::size_t> gold_counts;
  for (const auto& t : ref) ++gold_counts[t];
  std::size_t common = 0;
  for (const auto& t : pred) {
    auto it = gold_counts.find(t);
    if (it != gold_counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  return f1_of(common, pred.size(), ref.size());
}

std::vector<EmF1> squad_em_f1_scores(std::span<const EvalPair> pairs) {
  require_pairs(pairs);
  std::vector<EmF1> out;
  out.reserve(pairs.size());
  for (const auto& pair : pairs) {
    EmF1 s;
    for (const auto& ref : pair.references) {
      s.em = std::max(s.em, exact_match(pair.hypothesis, ref));
      s.f1 = std::max(s.f1, token_f1(pair.hypothesis, ref));
    }
    out.push_back(s);
  }
  return out;
}

EmF1 squad_em_f1(std::span<const EvalPair> pairs) {
  EmF1 total;
  const auto scores = squad_em_f1_scores(pairs);
  for (const auto& s : scores) {
    total.em += s.em;
    total.f1 += s.f1;
  }
  total.em /= static_cast<double>(scores.size());
  total.f1 /= static_cast<double>(scores.size());
  return total;
}

// ---------------------------------------------------------------- combined

double combined_score(double bleu, double inform, double success) {
  if (bleu < 0 || inform < 0 || success < 0) {
    throw Error(ErrorKind::config, "negative-score", "combined score inputs must be >= 0");
  }
  return (inform + success) * 0.5 + bleu;
}

}  // namespace mvpforge
