#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "prisoners/tuner.hpp"

using namespace prisoners;

namespace {

Population pop_with_sims(const std::vector<std::pair<std::string, i64>>& gens, Family f,
                         int n) {
  Population pop;
  for (const auto& [text, sims] : gens) {
    GenRecord r;
    r.params = parse_gen(text, f, n);
    r.sims = sims;
    r.total_visits = sims * 100;  // placeholder averages; order = insertion
    pop.records.push_back(r);
  }
  return pop;
}

void check_crossing(const std::vector<i64>& sims, std::uint64_t seed) {
  Population pop;
  for (std::size_t i = 0; i < sims.size(); ++i) {
    GenRecord r;
    r.params = parse_gen("((3,0,5),\xE2\x88\x9E)", Family::SnowballSingle, 5);
    r.params.snowballs[0].ell = static_cast<i64>(i) + 3;  // make records distinct
    r.params.snowballs[0].slack = 0;
    r.sims = sims[i];
    r.total_visits = r.sims * static_cast<i64>(20 + i);  // increasing averages
    pop.records.push_back(r);
  }
  const i64 total = pop.total_sims();

  const int draws = 200000;
  std::vector<int> counts(sims.size(), 0);
  Xoshiro256pp rng(seed);
  for (int d = 0; d < draws; ++d) counts[select_index(pop, rng.uniform01())] += 1;

  i64 cum = 0;
  for (std::size_t i = 0; i < sims.size(); ++i) {
    const double lo = std::cbrt(static_cast<double>(cum) / static_cast<double>(total));
    cum += sims[i];
    const double hi = std::cbrt(static_cast<double>(cum) / static_cast<double>(total));
    const double p = hi - lo;  // P(lo <= r^(1) < hi) for r uniform: r^3 crossing
    const double sigma = std::sqrt(p * (1 - p) / draws);
    INFO("record " << i << " of " << sims.size() << ": freq "
                   << static_cast<double>(counts[i]) / draws << " vs " << p);
    REQUIRE(std::abs(static_cast<double>(counts[i]) / draws - p) < 3 * sigma + 1e-9);
  }
}

}  // namespace

TEST_CASE("selection walks the cube law") {
  // the two-equal-gen case: first record drawn with probability (1/2)^(1/3)
  check_crossing({500, 500}, 101);
  check_crossing({100, 900}, 102);
  check_crossing({10, 200, 790}, 103);
  check_crossing({250, 250, 250, 250}, 104);
  check_crossing({1, 1, 1, 997}, 105);
}

TEST_CASE("selection edge cases") {
  Population single = pop_with_sims({{"((3,0,5),\xE2\x88\x9E)", 10}}, Family::SnowballSingle, 5);
  for (double r : {0.0, 0.3, 0.9999999})
    REQUIRE(select_index(single, r) == 0);

  // unsimulated records are invisible to selection
  Population mixed = pop_with_sims({{"((3,0,5),\xE2\x88\x9E)", 100}}, Family::SnowballSingle, 5);
  GenRecord fresh;
  fresh.params = parse_gen("((4,0,5),\xE2\x88\x9E)", Family::SnowballSingle, 5);
  mixed.records.insert(mixed.records.begin(), fresh);  // sims = 0 sorts first
  REQUIRE(select_index(mixed, 0.0) == 1);
  REQUIRE(select_index(mixed, 0.9999999) == 1);

  Population empty;
  REQUIRE_THROWS_AS(select_index(empty, 0.5), std::invalid_argument);
  Population unsimulated = pop_with_sims({{"((3,0,5),\xE2\x88\x9E)", 0}}, Family::SnowballSingle, 5);
  REQUIRE_THROWS_AS(select_index(unsimulated, 0.5), std::invalid_argument);
}

TEST_CASE("mutations stay inside the family constraints") {
  const struct {
    const char* text;
    Family family;
    int n;
  } corpus[] = {
      {"((3,0,5),\xE2\x88\x9E)", Family::SnowballSingle, 5},
      {"((6, 0, 9)(3, 1, 7), (166, 193)()(82)()", Family::BinaryTalentObservers, 16},
      {"((3, 0, 9), (3, 1, 9)^3, (3, 1, 8)^8, (1928, 657, 665), "
       "(440, 442, 439), (506, 512), (378))",
       Family::TernaryObservers, 100},
      {"((2,0,3)^2,(20,10),(8))", Family::TwoLevel, 6},
      {"((40,20),(12),(9))", Family::BinaryTokens, 8},
  };
  for (const auto& c : corpus) {
    const StrategyParams parent = parse_gen(c.text, c.family, c.n);
    const auto parent_warnings = detail::gen_warnings(parent);
    Xoshiro256pp rng(7);
    int changed = 0;
    for (int k = 0; k < 400; ++k) {
      const MutationResult m = mutate_gen(parent, rng);
      if (!m.changed) continue;
      ++changed;
      INFO(c.text << " mutation " << k << " -> " << render_gen(m.params));
      REQUIRE_FALSE(m.params == parent);
      REQUIRE_NOTHROW(validate_params(m.params));
      REQUIRE(detail::warnings_subset(detail::gen_warnings(m.params), parent_warnings));
      i64 goals = 0;
      for (const auto& t : m.params.snowballs) goals += t.goal;
      if (!m.params.snowballs.empty()) REQUIRE(goals == c.n);
      // a mutated gen still round-trips through its text form
      REQUIRE(parse_gen(render_gen(m.params), c.family, c.n) == m.params);
    }
    INFO(c.text);
    REQUIRE(changed > 300);  // retries make dead mutations rare
  }
}

TEST_CASE("mutation streams are reproducible") {
  const StrategyParams parent = parse_gen(
      "((6, 0, 9)(3, 1, 7), (166, 193)()(82)()", Family::BinaryTalentObservers, 16);
  Xoshiro256pp a(5), b(5);
  for (int k = 0; k < 60; ++k) {
    const MutationResult ma = mutate_gen(parent, a);
    const MutationResult mb = mutate_gen(parent, b);
    REQUIRE(ma.changed == mb.changed);
    REQUIRE(ma.params == mb.params);
  }
}

TEST_CASE("tuning spends exactly the budget and keeps the books") {
  Population pop;
  pop.find_or_insert(parse_gen("((3,0,5),\xE2\x88\x9E)", Family::SnowballSingle, 5));
  pop.find_or_insert(parse_gen("((4,0,5),\xE2\x88\x9E)", Family::SnowballSingle, 5));

  TuneOptions opt;
  opt.budget = 2000;
  opt.batch = 100;
  opt.mutation_prob = 0.05;
  opt.seed = 9;
  opt.workers = 2;
  opt.snapshots = 20;
  const TuneReport rep = tune(pop, opt);

  REQUIRE(rep.consumed == 2000);
  REQUIRE(pop.total_sims() == 2000);
  REQUIRE(rep.rows.size() == 20);
  for (std::size_t i = 1; i < rep.rows.size(); ++i)
    REQUIRE(rep.rows[i].snapshot > rep.rows[i - 1].snapshot);
  REQUIRE(rep.rows.back().snapshot == 2000);
  for (const auto& row : rep.rows) {
    REQUIRE(row.population_avg > 1.0);
    REQUIRE(row.lastgen_avg > 1.0);
    REQUIRE_FALSE(row.best_gen.empty());
  }

  // averages kept sorted
  for (std::size_t i = 1; i < pop.records.size(); ++i) {
    if (pop.records[i].sims == 0) continue;
    REQUIRE(pop.records[i - 1].sims > 0);
    REQUIRE(pop.records[i - 1].average() <= pop.records[i].average());
  }

  // zero budget is a no-op
  Population copy = pop;
  TuneOptions nil = opt;
  nil.budget = 0;
  const TuneReport rep0 = tune(copy, nil);
  REQUIRE(rep0.consumed == 0);
  REQUIRE(rep0.rows.empty());
  REQUIRE(copy.records.size() == pop.records.size());

  Population empty;
  REQUIRE_THROWS_AS(tune(empty, opt), std::invalid_argument);
}

TEST_CASE("tuning runs are deterministic") {
  auto run = [] {
    Population pop;
    pop.find_or_insert(parse_gen("((3,0,5),\xE2\x88\x9E)", Family::SnowballSingle, 5));
    pop.find_or_insert(parse_gen("((4,0,5),\xE2\x88\x9E)", Family::SnowballSingle, 5));
    TuneOptions opt;
    opt.budget = 1500;
    opt.batch = 50;
    opt.mutation_prob = 0.2;
    opt.seed = 31;
    TuneReport rep = tune(pop, opt);
    return std::pair(std::move(pop), std::move(rep));
  };
  auto [p1, r1] = run();
  auto [p2, r2] = run();
  REQUIRE(p1.records.size() == p2.records.size());
  for (std::size_t i = 0; i < p1.records.size(); ++i) {
    REQUIRE(p1.records[i].params == p2.records[i].params);
    REQUIRE(p1.records[i].sims == p2.records[i].sims);
    REQUIRE(p1.records[i].total_visits == p2.records[i].total_visits);
  }
  REQUIRE(r1.rows.size() == r2.rows.size());
  for (std::size_t i = 0; i < r1.rows.size(); ++i) {
    REQUIRE(r1.rows[i].snapshot == r2.rows[i].snapshot);
    REQUIRE(r1.rows[i].best_gen == r2.rows[i].best_gen);
    REQUIRE(r1.rows[i].population_avg == r2.rows[i].population_avg);
  }
}

TEST_CASE("populations persist through JSON") {
  Population pop;
  pop.find_or_insert(parse_gen("((3,0,5),\xE2\x88\x9E)", Family::SnowballSingle, 5));
  pop.find_or_insert(parse_gen("((4,0,5),\xE2\x88\x9E)", Family::SnowballSingle, 5));
  TuneOptions opt;
  opt.budget = 600;
  opt.batch = 100;
  opt.seed = 12;
  tune(pop, opt);

  const nlohmann::json j = population_to_json(pop);
  REQUIRE(j.at("family") == "snowball-single");
  REQUIRE(j.at("n") == 5);
  const Population back = population_from_json(j);
  REQUIRE(back.records.size() == pop.records.size());
  REQUIRE(back.total_sims() == pop.total_sims());
  for (std::size_t i = 0; i < pop.records.size(); ++i) {
    REQUIRE(back.records[i].params == pop.records[i].params);
    REQUIRE(back.records[i].sims == pop.records[i].sims);
    REQUIRE(back.records[i].total_visits == pop.records[i].total_visits);
  }

  const Population none = population_from_json(nlohmann::json{{"records", nlohmann::json::array()}});
  REQUIRE(none.records.empty());
}
