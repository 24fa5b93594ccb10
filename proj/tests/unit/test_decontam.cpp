#include <random>

#include "doctest.h"
#include "mvpforge/decontam.hpp"
#include "mvpforge/error.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mvpforge;

namespace {

UnifiedExample make(const std::string& input, const std::string& output = "") {
  return {TaskFamily::summarization, "ds", Split::train, "", input, output};
}

std::string random_text(std::mt19937_64& rng, const std::vector<std::string>& vocab, int lo, int hi) {
  const int n = std::uniform_int_distribution<int>(lo, hi)(rng);
  std::string s;
  for (int i = 0; i < n; ++i) s += (i ? " " : "") + vocab[rng() % vocab.size()];
  return s;
}

std::vector<std::string> make_vocab(const std::string& stem, int n) {
  std::vector<std::string> v;
  for (int i = 0; i < n; ++i) v.push_back(stem + std::to_string(i));
  return v;
}

}  // namespace

TEST_CASE("order selection matches the nearest-rank oracle") {
  std::mt19937_64 rng(3);
  DecontamConfig cfg;
  for (int iter = 0; iter < 500; ++iter) {
    std::vector<std::size_t> lengths(1 + rng() % 60);
    for (auto& l : lengths) l = rng() % 30;
    cfg.percentile = static_cast<double>(rng() % 101);
    CAPTURE(cfg.percentile);
    CHECK(compute_order(lengths, cfg) ==
          oracle::percentile_order(lengths, cfg.percentile, cfg.min_order, cfg.max_order));
  }
}

TEST_CASE("order clamps") {
  DecontamConfig cfg;
  const std::vector<std::size_t> long_texts(40, 500);
  CHECK(compute_order(long_texts, cfg) == 13);
  const std::vector<std::size_t> one_three_word = {3};
  CHECK(compute_order(one_three_word, cfg) == 3);
  const std::vector<std::size_t> empty_texts = {0, 0};
  CHECK(compute_order(empty_texts, cfg) == 1);
  CHECK_THROWS_AS(compute_order(std::vector<std::size_t>{}, cfg), Error);
}

TEST_CASE("index gram count equals the naive string-set size") {
  std::mt19937_64 rng(11);
  const auto vocab = make_vocab("w", 12);
  std::vector<UnifiedExample> eval;
  std::vector<std::string> texts;
  for (int i = 0; i < 200; ++i) {
    eval.push_back(make(random_text(rng, vocab, 0, 20), random_text(rng, vocab, 0, 5)));
    texts.push_back(overlap_text(eval.back()));
  }
  for (int order = 1; order <= 6; ++order) {
    const auto idx = build_index_with_order(eval, order, {}, "e", 3);
    CHECK(idx.gram_count() == oracle::gram_set(texts, order).size());
  }
}

TEST_CASE("planted contamination is removed exactly") {
  std::mt19937_64 rng(5);
  const auto eval_vocab = make_vocab("e", 40);
  const auto clean_vocab = make_vocab("c", 40);
  std::vector<UnifiedExample> eval;
  for (int i = 0; i < 30; ++i) eval.push_back(make(random_text(rng, eval_vocab, 15, 30), "x"));
  const auto idx = build_index(eval, {}, "eval");

  std::vector<UnifiedExample> train;
  for (int i = 0; i < 50; ++i) train.push_back(eval[rng() % eval.size()]);
  for (int i = 0; i < 50; ++i) train.push_back(make(random_text(rng, clean_vocab, 15, 30), "y"));
  std::shuffle(train.begin(), train.end(), rng);

  const std::vector<NGramIndex> indexes = {idx};
  auto [kept, report] = filter_corpus(train, indexes, {}, 4);
  CHECK(report.examined == 100);
  CHECK(report.removed == 50);
  CHECK(kept.size() == 50);

  SUBCASE("idempotent") {
    auto [kept2, report2] = filter_corpus(kept, indexes, {}, 2);
    CHECK(report2.removed == 0);
    CHECK(kept2 == kept);
  }
}

TEST_CASE("an eval set filters itself away") {
  std::mt19937_64 rng(8);
  const auto vocab = make_vocab("v", 30);
  std::vector<UnifiedExample> eval;
  for (int i = 0; i < 100; ++i) eval.push_back(make(random_text(rng, vocab, 5, 25), "o"));
  const std::vector<NGramIndex> indexes = {build_index(eval, {}, "self")};
  auto [kept, report] = filter_corpus(eval, indexes, {});
  std::size_t short_ones = 0;
  for (const auto& ex : eval) {
    if (oracle::words(overlap_text(ex)).size() < static_cast<std::size_t>(indexes[0].order())) ++short_ones;
  }
  CHECK(kept.size() == short_ones);
}

TEST_CASE("more eval data never removes less") {
  std::mt19937_64 rng(13);
  const auto vocab = make_vocab("m", 8);
  std::vector<UnifiedExample> eval, train;
  for (int i = 0; i < 60; ++i) eval.push_back(make(random_text(rng, vocab, 4, 10)));
  for (int i = 0; i < 400; ++i) train.push_back(make(random_text(rng, vocab, 4, 12)));
  std::uint64_t prev = 0;
  for (std::size_t n = 10; n <= eval.size(); n += 10) {
    const std::span<const UnifiedExample> part(eval.data(), n);
    const std::vector<NGramIndex> indexes = {build_index_with_order(part, 4, {}, "e")};
    const auto removed = filter_corpus(train, indexes, {}).second.removed;
    CHECK(removed >= prev);
    prev = removed;
  }
}

TEST_CASE("hashed decisions agree with the exact oracle") {
  std::mt19937_64 rng(21);
  const auto vocab = make_vocab("t", 10);
  std::vector<UnifiedExample> eval, train;
  for (int i = 0; i < 300; ++i) eval.push_back(make(random_text(rng, vocab, 3, 12)));
  for (int i = 0; i < 5000; ++i) train.push_back(make(random_text(rng, vocab, 2, 14)));
  std::vector<std::string> eval_texts;
  for (const auto& e : eval) eval_texts.push_back(overlap_text(e));

  for (int order : {3, 4, 5}) {
    const auto grams = oracle::gram_set(eval_texts, order);
    const std::vector<NGramIndex> hashed = {build_index_with_order(eval, order, {}, "e", 2)};
    const std::vector<ExactNGramIndex> exact = {ExactNGramIndex(eval, order, {}, "e")};
    Decontaminator filter(hashed, {});
    FilterReport report = filter.empty_report();
    const auto flags = filter.flag_batch(train, 0, report, 3);
    std::size_t disagreements = 0, removed = 0;
    for (std::size_t i = 0; i < train.size(); ++i) {
      const bool want = oracle::contaminated(overlap_text(train[i]), grams, order);
      disagreements += (want != static_cast<bool>(flags[i]));
      removed += want;
    }
    CAPTURE(order);
    CHECK(disagreements == 0);
    CHECK(report.removed == removed);
    CHECK(filter_corpus_exact(train, exact, {}).second.removed == removed);
  }
}

TEST_CASE("reports merge associatively and worker count does not matter") {
  std::mt19937_64 rng(4);
  const auto vocab = make_vocab("r", 6);
  std::vector<UnifiedExample> eval, train;
  for (int i = 0; i < 50; ++i) eval.push_back(make(random_text(rng, vocab, 3, 8)));
  for (int i = 0; i < 3000; ++i) train.push_back(make(random_text(rng, vocab, 1, 9)));
  const std::vector<NGramIndex> indexes = {build_index_with_order(eval, 4, {}, "e")};
  const auto one = filter_corpus(train, indexes, {}, 1);
  const auto many = filter_corpus(train, indexes, {}, 7);
  CHECK(one.first == many.first);
  CHECK(one.second.removed == many.second.removed);
  CHECK(one.second.removed_sample == many.second.removed_sample);
  CHECK(one.second.per_index[0].hits == many.second.per_index[0].hits);
}

TEST_CASE("index files round-trip and reject garbage") {
  testing::TempDir dir;
  std::vector<UnifiedExample> eval = {make("a b c d e f", "g"), make("h i j k", "l")};
  const auto idx = build_index_with_order(eval, 3, {}, "e");
  idx.save(dir / "e.ngram");
  const auto back = NGramIndex::load(dir / "e.ngram", "e");
  CHECK(back.order() == 3);
  CHECK(back.grams() == idx.grams());
  const std::string bytes = testing::read_file(dir / "e.ngram");
  CHECK(bytes.substr(0, 8) == "MVPNGRAM");
  CHECK(bytes.size() == 8 + 4 + 4 + 8 + 8 * idx.gram_count());

  testing::write_file(dir / "bad.ngram", "NOTANIDX00000000000000000000");
  CHECK_THROWS_AS(NGramIndex::load(dir / "bad.ngram"), Error);
  CHECK_THROWS_AS(NGramIndex::load(dir / "missing.ngram"), Error);
}

TEST_CASE("merge is set union") {
  std::vector<UnifiedExample> a = {make("x y z w")}, b = {make("y z w v")};
  auto ia = build_index_with_order(a, 2, {}, "a");
  const auto ib = build_index_with_order(b, 2, {}, "b");
  ia.merge(ib);
  CHECK(ia.gram_count() == oracle::gram_set({"x y z w", "y z w v"}, 2).size());
  const auto ic = build_index_with_order(b, 3, {}, "c");
  CHECK_THROWS_AS(ia.merge(ic), Error);
}

TEST_CASE("config validation") {
  DecontamConfig cfg;
  cfg.min_order = 5;
  cfg.max_order = 4;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.percentile = 101;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
