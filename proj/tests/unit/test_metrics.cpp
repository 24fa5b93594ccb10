#include <random>

#include "doctest.h"
#include "mvpforge/error.hpp"
#include "mvpforge/metrics.hpp"
#include "mvpforge/porter_stemmer.hpp"
#include "oracles.hpp"

using namespace mvpforge;

namespace {

std::vector<EvalPair> one(const std::string& h, const std::string& r) { return {EvalPair{h, {r}}}; }

std::vector<std::string> toks(const std::string& s) { return oracle::words(s); }

std::string random_sentence(std::mt19937_64& rng, const std::vector<std::string>& vocab, int lo, int hi) {
  const int n = std::uniform_int_distribution<int>(lo, hi)(rng);
  std::string s;
  for (int i = 0; i < n; ++i) s += (i ? " " : "") + vocab[rng() % vocab.size()];
  return s;
}

std::vector<EvalPair> random_pairs(std::uint64_t seed, std::size_t count, int lo, int hi,
                                   const std::vector<std::string>& vocab) {
  std::mt19937_64 rng(seed);
  std::vector<EvalPair> pairs;
  for (std::size_t i = 0; i < count; ++i) {
    EvalPair p{random_sentence(rng, vocab, lo, hi), {}};
    const int refs = 1 + static_cast<int>(rng() % 3);
    for (int r = 0; r < refs; ++r) p.references.push_back(random_sentence(rng, vocab, std::max(lo, 1), hi));
    pairs.push_back(std::move(p));
  }
  return pairs;
}

const std::vector<std::string> kSmallVocab = {"a", "b", "c", "d", "e"};

}  // namespace

TEST_CASE("BLEU examples") {
  const auto same = one("the cat sat on the mat", "the cat sat on the mat");
  BleuOptions sentence;
  sentence.mode = BleuMode::sentence;
  CHECK(bleu(same) == 1.0);
  CHECK(bleu(same, sentence) == 1.0);
  // short hypotheses: orders longer than the text carry no evidence
  const std::vector<EvalPair> mixed = {{"a dog ran", {"a dog ran"}}, {"x y", {"x y"}}};
  CHECK(bleu(mixed) == 1.0);
  CHECK(bleu(mixed, sentence) == 1.0);

  CHECK(bleu(one("a b c d", "e f g h")) == 0.0);

  const auto stats = bleu_stats(toks("the the the the the the the"), {toks("the cat is on the mat")}, 4);
  CHECK(stats.matches[0] == 2);
  CHECK(stats.candidates[0] == 7);

  BleuOptions bad;
  bad.max_n = 0;
  CHECK_THROWS_AS(bleu(same, bad), Error);
  CHECK_THROWS_AS(bleu(std::vector<EvalPair>{}), Error);
}

TEST_CASE("BLEU brevity penalty uses the closest reference, ties to the shorter") {
  const auto s = bleu_stats(toks("a b c d e"), {toks("a b c d"), toks("a b c d e f")}, 4);
  CHECK(s.ref_len == 4);
  const auto s2 = bleu_stats(toks("a b c"), {toks("a b c d e f g"), toks("a")}, 2);
  CHECK(s2.ref_len == 1);
}

TEST_CASE("method7 smoothing reproduces published reference values") {
  BleuOptions o;
  o.mode = BleuMode::sentence;
  o.smoothing = Smoothing::method7;
  // Values from NLTK's SmoothingFunction().method7 at release 3.5.
  CHECK(bleu(one("the quick brown fox jumped over the lazy dog",
                 "the fast brown fox jumps over the lazy dog"), o) ==
        doctest::Approx(0.4390167055995359).epsilon(1e-12));
  CHECK(bleu(one("i am fine thank you and you", "i am good thanks and you ?"), o) ==
        doctest::Approx(0.8209112535461494).epsilon(1e-12));
  CHECK(bleu(one("a b x d e", "a b c d e"), o) == doctest::Approx(1.3784764154277087).epsilon(1e-12));
  // The method5 averaging lifts a perfect match above 1.
  CHECK(bleu(one("the cat sat on the mat", "the cat sat on the mat"), o) ==
        doctest::Approx(1.1167470964180197).epsilon(1e-12));
}

TEST_CASE("ROUGE examples") {
  CHECK(rouge_n(one("a b", "a c"), 1) == doctest::Approx(0.5));
  CHECK(rouge_l(one("a c b", "a b c")) == doctest::Approx(2.0 / 3.0));
  const auto same = one("x y z w", "x y z w");
  CHECK(rouge_n(same, 1) == 1.0);
  CHECK(rouge_n(same, 2) == 1.0);
  CHECK(rouge_l(same) == 1.0);
  CHECK(rouge_n(one("", "a b"), 1) == 0.0);
  // too short for bigrams on both sides
  CHECK(rouge_n(one("a", "a"), 2) == 1.0);
  CHECK(rouge_n(one("a", "b"), 2) == 0.0);
  CHECK(rouge_n(one("a", "a b"), 2) == 0.0);
  RougeOptions stem;
  stem.stem = true;
  CHECK(rouge_n(one("cats sleeping", "cat sleeps"), 1, stem) == 1.0);
  CHECK(rouge_n(one("cats sleeping", "cat sleeps"), 1) == 0.0);
}

TEST_CASE("METEOR examples") {
  // Full alignment in one chunk of m words leaves a fragmentation penalty of
  // 0.5 * (1/m)^3.
  CHECK(meteor_basic(one("a b c d", "a b c d")) == doctest::Approx(1.0 - 0.5 / 64.0).epsilon(1e-15));
  CHECK(meteor_basic(one("a b", "c d")) == 0.0);
  // Two stem matches in one chunk: P = R = 1, penalty 0.5 * (1/2)^3.
  const auto a = meteor_align(toks("cats sleeping"), toks("cat sleeps"));
  CHECK(a.matches == 2);
  CHECK(a.chunks == 1);
  CHECK(meteor_basic(one("cats sleeping", "cat sleeps")) == doctest::Approx(0.9375).epsilon(1e-15));
  // Exact matches win over stem matches for the same word.
  const auto b = meteor_align(toks("cat"), toks("cats cat"));
  CHECK(b.matches == 1);
}

TEST_CASE("distinct-n examples") {
  const std::vector<std::string> aaaa = {"a a a a"};
  CHECK(distinct_n(aaaa, 1) == 0.25);
  const std::vector<std::string> abcd = {"a b", "c d"};
  CHECK(distinct_n(abcd, 1) == 1.0);
  const std::vector<std::string> none = {"a"};
  CHECK(distinct_n(none, 2) == 0.0);
  CHECK_THROWS_AS(distinct_n(aaaa, 0), Error);
}

TEST_CASE("EM and F1 examples") {
  CHECK(exact_match("white", "white") == 1.0);
  CHECK(exact_match("The white.", "white") == 1.0);
  CHECK(exact_match("in barn", "in a barn") == 1.0);
  CHECK(token_f1("in barn", "in a barn") == 1.0);
  CHECK(token_f1("the cat sat", "a cat stood") == doctest::Approx(0.5));
  CHECK(normalize_answer("  The  Quick, brown fox!  ") == "quick brown fox");
  CHECK(token_f1("", "") == 1.0);
  CHECK(token_f1("the", "cat") == 0.0);
  const auto ef = squad_em_f1(std::vector<EvalPair>{{"white", {"black", "white"}}});
  CHECK(ef.em == 1.0);
  CHECK(ef.f1 == 1.0);
}

TEST_CASE("combined score") {
  CHECK(combined_score(20.26, 85.00, 76.40) == doctest::Approx(100.96).epsilon(1e-12));
  CHECK(combined_score(17.89, 84.88, 74.91) == doctest::Approx(97.785).epsilon(1e-12));
  CHECK(combined_score(0, 0, 0) == 0.0);
  CHECK(combined_score(1, 2, 3) <= combined_score(1, 2, 4));
  CHECK_THROWS_AS(combined_score(-1, 0, 0), Error);
}

TEST_CASE("metrics match brute-force oracles on random pairs") {
  const std::vector<std::string> vocab = {"a", "b", "c", "d", "e", "f", "g", "h"};
  const auto pairs = random_pairs(99, 1000, 0, 9, vocab);

  const auto sent = sentence_bleu_scores(pairs);
  const auto r1 = rouge_n_scores(pairs, 1);
  const auto r2 = rouge_n_scores(pairs, 2);
  const auto rl = rouge_l_scores(pairs);
  const auto ef = squad_em_f1_scores(pairs);
  std::vector<std::pair<std::string, std::vector<std::string>>> opairs;
  std::vector<std::string> hyps;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    opairs.emplace_back(p.hypothesis, p.references);
    hyps.push_back(p.hypothesis);
    CHECK(sent[i] == doctest::Approx(oracle::sentence_bleu(p.hypothesis, p.references)).epsilon(1e-12));
    CHECK(r1[i] == doctest::Approx(oracle::rouge_n(p.hypothesis, p.references, 1)).epsilon(1e-12));
    CHECK(r2[i] == doctest::Approx(oracle::rouge_n(p.hypothesis, p.references, 2)).epsilon(1e-12));
    CHECK(rl[i] == doctest::Approx(oracle::rouge_l(p.hypothesis, p.references)).epsilon(1e-12));
    CHECK(ef[i].em == oracle::squad_em(p.hypothesis, p.references));
    CHECK(ef[i].f1 == doctest::Approx(oracle::squad_f1(p.hypothesis, p.references)).epsilon(1e-12));
  }
  CHECK(bleu(pairs) == doctest::Approx(oracle::corpus_bleu(opairs)).epsilon(1e-12));
  for (int n = 1; n <= 4; ++n) {
    CHECK(distinct_n(hyps, n) == doctest::Approx(oracle::distinct(hyps, n)).epsilon(1e-12));
  }
}

TEST_CASE("METEOR matches the brute-force aligner") {
  const std::vector<std::string> vocab = {"cat", "cats", "sleep", "sleeps", "sleeping", "run",
                                          "running", "the", "a", "dog"};
  std::mt19937_64 rng(5);
  const auto stem = [](const std::string& w) { return porter_stem(w); };
  for (int i = 0; i < 1000; ++i) {
    const std::string h = random_sentence(rng, vocab, 0, 6);
    const std::string r = random_sentence(rng, vocab, 1, 6);
    const auto want = oracle::meteor_brute(toks(h), toks(r), stem);
    const auto got = meteor_align(toks(h), toks(r));
    CAPTURE(h);
    CAPTURE(r);
    CHECK(got.matches == want.matches);
    CHECK(got.chunks == want.chunks);
    CHECK(got.exact);
    const double score = meteor_basic(one(h, r));
    CHECK(score == doctest::Approx(oracle::meteor_score(want.matches, want.chunks, toks(h).size(),
                                                        toks(r).size())).epsilon(1e-12));
  }
}

TEST_CASE("scores stay in [0, 1] and corpus scores ignore pair order") {
  const auto pairs = random_pairs(123, 300, 0, 12, kSmallVocab);
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  BleuOptions sentence;
  sentence.mode = BleuMode::sentence;
  CHECK(in_unit(bleu(pairs)));
  CHECK(in_unit(bleu(pairs, sentence)));
  CHECK(in_unit(rouge_n(pairs, 1)));
  CHECK(in_unit(rouge_n(pairs, 2)));
  CHECK(in_unit(rouge_l(pairs)));
  CHECK(in_unit(meteor_basic(pairs)));

  auto shuffled = pairs;
  std::mt19937_64 rng(1);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(bleu(shuffled) == doctest::Approx(bleu(pairs)).epsilon(1e-14));
  CHECK(rouge_l(shuffled) == doctest::Approx(rouge_l(pairs)).epsilon(1e-12));
}

TEST_CASE("adding a duplicate reference never lowers a score") {
  auto pairs = random_pairs(77, 200, 1, 10, kSmallVocab);
  auto more = pairs;
  for (auto& p : more) p.references.push_back(p.references.front());
  CHECK(bleu(more) >= bleu(pairs) - 1e-15);
  CHECK(rouge_n(more, 1) >= rouge_n(pairs, 1) - 1e-15);
  CHECK(rouge_l(more) >= rouge_l(pairs) - 1e-15);
  const auto a = squad_em_f1(pairs), b = squad_em_f1(more);
  CHECK(b.em >= a.em);
  CHECK(b.f1 >= a.f1 - 1e-15);
}

TEST_CASE("Porter stemmer reference outputs") {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"caresses", "caress"}, {"ponies", "poni"},      {"ties", "ti"},
      {"relational", "relat"}, {"conditional", "condit"}, {"generalization", "gener"},
      {"oscillators", "oscil"}, {"hopping", "hop"},   {"sleeping", "sleep"},
      {"sleeps", "sleep"},     {"cats", "cat"},       {"agreed", "agre"},
      {"happy", "happi"},      {"electrical", "electr"}, {"adjustable", "adjust"},
      {"formality", "formal"}, {"probate", "probat"}, {"controlling", "control"},
      {"rolling", "roll"},     {"feed", "feed"}};
  for (const auto& [w, s] : cases) {
    CAPTURE(w);
    CHECK(porter_stem(w) == s);
  }
  CHECK(porter_stem("17:15") == "17:15");
}

TEST_CASE("ptb tokenizer splits punctuation and clitics") {
  CHECK(tokenize("Don't stop, it's fine.", Tokenizer::ptb) ==
        std::vector<std::string>{"do", "n't", "stop", ",", "it", "'s", "fine", "."});
  CHECK(tokenize("  A  b ", Tokenizer::whitespace) == std::vector<std::string>{"a", "b"});
}
