#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "mvpforge/counter_rng.hpp"
#include "mvpforge/error.hpp"
#include "mvpforge/jsonl.hpp"
#include "mvpforge/mixer.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace mvpforge;

namespace {

MixtureSpec spec_of(const std::vector<std::uint64_t>& sizes, double t,
                    std::optional<std::uint64_t> cap = std::nullopt) {
  MixtureSpec s;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    s.members.push_back({"d" + std::to_string(i), TaskFamily::summarization, sizes[i], {}});
  }
  s.temperature = t;
  s.size_cap = cap;
  return s;
}

}  // namespace

TEST_CASE("hand-checked rates") {
  // sqrt(100) : sqrt(400) = 10 : 20
  auto p = compute_rates(spec_of({100, 400}, 2.0));
  CHECK(p.rates[0] == 1.0 / 3.0);
  CHECK(p.rates[1] == 2.0 / 3.0);
  CHECK(p.cumulative.back() == 1.0);

  p = compute_rates(spec_of({100, 400}, 1.0));
  CHECK(p.rates[0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(p.rates[1] == doctest::Approx(0.8).epsilon(1e-15));

  // capped at 400: 10 : 20 : 20
  p = compute_rates(spec_of({100, 400, 900}, 2.0, 400));
  CHECK(p.rates[0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(p.rates[1] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(p.rates[2] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(p.effective_sizes[2] == 400);
}

TEST_CASE("rates match the direct formula on random specs") {
  std::mt19937_64 rng(17);
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<std::uint64_t> sizes(1 + rng() % 10);
    std::vector<double> dsizes;
    for (auto& s : sizes) {
      s = 1 + rng() % 1000000;
      dsizes.push_back(static_cast<double>(s));
    }
    const double t = 0.5 + static_cast<double>(rng() % 100) / 10.0;
    const std::uint64_t cap = rng() % 2 ? 1 + rng() % 500000 : 0;
    const auto plan = compute_rates(spec_of(sizes, t, cap ? std::optional<std::uint64_t>(cap) : std::nullopt));
    const auto want = oracle::mixing_rates(dsizes, t, static_cast<double>(cap));
    double sum = 0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      CHECK(plan.rates[i] == doctest::Approx(want[i]).epsilon(1e-12));
      sum += plan.rates[i];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("very high temperature flattens, scaling sizes changes nothing") {
  const auto flat = compute_rates(spec_of({10, 1000, 100000}, 1e6));
  for (double r : flat.rates) CHECK(r == doctest::Approx(1.0 / 3.0).epsilon(1e-4));
  const auto a = compute_rates(spec_of({3, 7, 11}, 1.0));
  const auto b = compute_rates(spec_of({300, 700, 1100}, 1.0));
  for (int i = 0; i < 3; ++i) CHECK(a.rates[i] == doctest::Approx(b.rates[i]).epsilon(1e-14));
}

TEST_CASE("invalid specs are rejected") {
  auto code = [](const MixtureSpec& s) {
    try {
      compute_rates(s);
    } catch (const Error& e) {
      return e.code();
    }
    return std::string();
  };
  CHECK(code(MixtureSpec{}) == "empty-mixture");
  CHECK(code(spec_of({1, 2}, 0.0)) == "bad-temperature");
  CHECK(code(spec_of({1, 0}, 1.0)) == "empty-member");
  CHECK(code(spec_of({1, 2}, 1.0, 0)) == "bad-cap");
  auto s = spec_of({1, 2}, 1.0);
  s.epoch_length = 0;
  CHECK(code(s) == "bad-epoch-length");
}

TEST_CASE("empirical member frequencies follow the rates") {
  auto plan = compute_rates(spec_of({100, 400}, 2.0));
  std::vector<std::size_t> counts(2, 0);
  constexpr std::uint64_t kDraws = 300000;
  for (std::uint64_t pos = 0; pos < kDraws; ++pos) ++counts[plan.member_at(pos)];
  CHECK(std::abs(static_cast<double>(counts[0]) / kDraws - 1.0 / 3.0) < 0.005);
  CHECK(std::abs(static_cast<double>(counts[1]) / kDraws - 2.0 / 3.0) < 0.005);
}

TEST_CASE("shuffle cycles serve every index once per cycle") {
  ShuffleCycle cycle(42, 0, 97);
  for (int c = 0; c < 3; ++c) {
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 97; ++i) seen.insert(cycle.next());
    CHECK(seen.size() == 97);
    CHECK(*seen.rbegin() == 96);
  }
  CHECK(cycle.cycle() >= 2);
}

TEST_CASE("draw sequence is a pure function of the seed") {
  auto plan = compute_rates(spec_of({5, 9, 2}, 2.0));
  const std::vector<std::uint64_t> sizes = {5, 9, 2};
  DrawSequence a(plan, sizes), b(plan, sizes);
  std::map<std::size_t, std::vector<std::uint64_t>> per_member;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next(), y = b.next();
    CHECK(x.member == y.member);
    CHECK(x.example == y.example);
    CHECK(x.member == plan.member_at(static_cast<std::uint64_t>(i)));
    per_member[x.member].push_back(x.example);
  }
  // Within each member, every window of `size` consecutive draws that
  // starts on a cycle boundary is a permutation.
  for (const auto& [m, seq] : per_member) {
    const std::size_t n = sizes[m];
    for (std::size_t start = 0; start + n <= seq.size(); start += n) {
      std::set<std::uint64_t> s(seq.begin() + start, seq.begin() + start + n);
      CHECK(s.size() == n);
    }
  }
  plan.seed = 43;
  DrawSequence c(plan, sizes);
  int same = 0;
  DrawSequence a2(compute_rates(spec_of({5, 9, 2}, 2.0)), sizes);
  for (int i = 0; i < 200; ++i) same += (c.next().member == a2.next().member);
  CHECK(same < 200);
}

TEST_CASE("task grouping keeps only the chosen family") {
  MixtureSpec s = spec_of({10, 20, 30}, 2.0);
  s.members[1].family = TaskFamily::data_to_text;
  const auto g = group_by_task(s, TaskFamily::summarization);
  REQUIRE(g.members.size() == 2);
  CHECK(g.members[0].dataset_id == "d0");
  CHECK(g.members[1].dataset_id == "d2");
  CHECK(g.temperature == s.temperature);
  CHECK_THROWS_AS(group_by_task(s, TaskFamily::paraphrase), Error);
}

TEST_CASE("counter rng below() is in range and roughly uniform") {
  CounterRng rng(1, 2);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = rng.below(7);
    REQUIRE(v < 7);
    ++hist[v];
  }
  for (int h : hist) CHECK(std::abs(h - 10000) < 500);
  CHECK(counter_hash(1, 2, 3) == counter_hash(1, 2, 3));
  CHECK(counter_hash(1, 2, 3) != counter_hash(1, 2, 4));
}

TEST_CASE("sampling from files matches in-memory sampling") {
  testing::TempDir dir;
  std::vector<std::vector<UnifiedExample>> data(2);
  for (int m = 0; m < 2; ++m) {
    std::string text;
    for (int i = 0; i < 3 + 4 * m; ++i) {
      UnifiedExample ex{TaskFamily::summarization, "d" + std::to_string(m), Split::train, "Summarize:",
                        "Summarize: doc " + std::to_string(i), "sum " + std::to_string(i)};
      data[m].push_back(ex);
      text += to_json_line(ex) + "\n";
    }
    testing::write_file(dir / ("d" + std::to_string(m) + ".jsonl"), text);
  }
  auto spec = spec_of({3, 7}, 2.0);
  spec.epoch_length = 50;
  const auto plan = compute_rates(spec);
  VectorSource v0(data[0]), v1(data[1]);
  JsonlFileSource f0(dir / "d0.jsonl", "d0"), f1(dir / "d1.jsonl", "d1");
  std::vector<ExampleSource*> mem = {&v0, &v1}, files = {&f0, &f1};
  const auto a = sample_stream(plan, mem);
  const auto b = sample_stream(plan, files);
  CHECK(a.size() == 50);
  CHECK(a == b);
}

TEST_CASE("mixture spec file loading fills missing sizes") {
  testing::TempDir dir;
  testing::write_file(dir / "a.jsonl", "{}\n{}\n{}\n");
  testing::write_file(dir / "mix.json",
                      R"({"temperature": 1.5, "size_cap": 2, "epoch_length": 9,
                          "members": [{"dataset": "a", "task": "story-generation", "path": "a.jsonl"}]})");
  const auto s = load_mixture_spec(dir / "mix.json");
  REQUIRE(s.members.size() == 1);
  CHECK(s.members[0].size == 3);
  CHECK(s.members[0].family == TaskFamily::story_generation);
  CHECK(s.temperature == 1.5);
  CHECK(s.size_cap == std::optional<std::uint64_t>(2));
  CHECK(s.epoch_length == 9);
  testing::write_file(dir / "bad.json", R"({"members": [{"dataset": "a"}]})");
  CHECK_THROWS_AS(load_mixture_spec(dir / "bad.json"), Error);
}
