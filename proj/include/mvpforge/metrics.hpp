#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mvpforge/text.hpp"

namespace mvpforge {

struct EvalPair {
  std::string hypothesis;
  std::vector<std::string> references;  // at least one
};

// ---------------------------------------------------------------- BLEU

enum class BleuMode { corpus, sentence };
enum class Smoothing { none, method7 };

struct BleuOptions {
  int max_n = 4;
  BleuMode mode = BleuMode::corpus;
  Smoothing smoothing = Smoothing::none;
  Tokenizer tokenizer = Tokenizer::whitespace;
};

BleuMode parse_bleu_mode(std::string_view name);
Smoothing parse_smoothing(std::string_view name);

// Clipped n-gram statistics of one hypothesis against its references.
// candidates[n-1] is the true number of hypothesis n-grams (0 when the
// hypothesis is shorter than n).
struct BleuStats {
  std::vector<std::size_t> matches;     // index n-1
  std::vector<std::size_t> candidates;  // index n-1
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;  // closest reference length, ties to the shorter

  void add(const BleuStats& other);
};

BleuStats bleu_stats(const std::vector<std::string>& hyp,
                     const std::vector<std::vector<std::string>>& refs, int max_n);

// Score from accumulated statistics. Orders without any candidate n-gram are
// left out of the geometric mean. `stats` must carry at least 5 orders when
// smoothing is method7 (the 5-gram precision feeds the smoothing average).
double bleu_from_stats(const BleuStats& stats, int max_n, Smoothing smoothing);

// Corpus mode pools statistics over all pairs; sentence mode averages
// per-pair scores. Geometric mean of modified precisions times the brevity
// penalty. method7 is NLTK's smoothing function 7 (method4 then method5).
double bleu(std::span<const EvalPair> pairs, const BleuOptions& opts = {});
std::vector<double> sentence_bleu_scores(std::span<const EvalPair> pairs,
                                         const BleuOptions& opts = {});

// ---------------------------------------------------------------- ROUGE

struct RougeOptions {
  Tokenizer tokenizer = Tokenizer::whitespace;
  bool stem = false;
};

// Per-pair F1 against the best reference. When neither side has an n-gram
// (or, for ROUGE-L, a token) the pair scores 1 if the token sequences match.
std::vector<double> rouge_n_scores(std::span<const EvalPair> pairs, int n,
                                   const RougeOptions& opts = {});
std::vector<double> rouge_l_scores(std::span<const EvalPair> pairs,
                                   const RougeOptions& opts = {});
double rouge_n(std::span<const EvalPair> pairs, int n, const RougeOptions& opts = {});
double rouge_l(std::span<const EvalPair> pairs, const RougeOptions& opts = {});

std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b);

// ---------------------------------------------------------------- METEOR

// Unigram matching with exact and Porter-stem stages only (no synonym
// stage). Score = Fmean * (1 - gamma * (chunks / matches)^beta), with
// Fmean = P*R / (alpha*P + (1-alpha)*R).
struct MeteorParams {
  double alpha = 0.9;
  double beta = 3.0;
  double gamma = 0.5;
  Tokenizer tokenizer = Tokenizer::whitespace;
};

struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  // True when the search proved the chunk count minimal; false when the
  // node budget ran out and the best alignment found so far is returned.
  bool exact = true;
};

// Maximum-coverage alignment (exact stage first, then stems over what is
// left) with the fewest chunks.
MeteorAlignment meteor_align(const std::vector<std::string>& hyp,
                             const std::vector<std::string>& ref);

double meteor_from_alignment(const MeteorAlignment& a, std::size_t hyp_len,
                             std::size_t ref_len, const MeteorParams& params = {});

std::vector<double> meteor_scores(std::span<const EvalPair> pairs,
                                  const MeteorParams& params = {});
double meteor_basic(std::span<const EvalPair> pairs, const MeteorParams& params = {});

// ---------------------------------------------------------------- Distinct

// Distinct n-grams over total n-grams across all hypotheses; 0 if none.
double distinct_n(std::span<const std::string> hypotheses, int n,
                  Tokenizer tokenizer = Tokenizer::whitespace);

// ---------------------------------------------------------------- EM / F1

// Lowercase, drop ASCII punctuation, drop the articles a/an/the, collapse
// whitespace.
std::string normalize_answer(std::string_view text);

double exact_match(std::string_view prediction, std::string_view gold);
double token_f1(std::string_view prediction, std::string_view gold);

struct EmF1 {
  double em = 0.0;
  double f1 = 0.0;
};

EmF1 squad_em_f1(std::span<const EvalPair> pairs);
std::vector<EmF1> squad_em_f1_scores(std::span<const EvalPair> pairs);

// ---------------------------------------------------------------- combined

// (inform + success) * 0.5 + bleu, all on the 0-100 scale.
double combined_score(double bleu, double inform, double success);

// ---------------------------------------------------------------- report

struct EvalReport {
  std::size_t count = 0;
  std::map<std::string, double> scores;  // in [0, 1] except "combined"
  std::map<std::string, std::vector<double>> per_example;
  std::vector<std::string> notes;
};

}  // namespace mvpforge
