#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "prisoners/markov.hpp"
#include "prisoners/analysis.hpp"
#include "prisoners/sim.hpp"

using namespace prisoners;
using Catch::Approx;

namespace {

StrategyParams bare(Family f, int n, Variant v) {
  StrategyParams p;
  p.family = f;
  p.n = n;
  p.variant = v;
  validate_params(p);
  return p;
}

}  // namespace

TEST_CASE("chain solver reproduces the nB2 formula") {
  for (int n = 2; n <= 8; ++n) {
    const long double exact = exact_expected_visits(bare(Family::SingleCounter, n, Variant::B2));
    const long double formula = analysis::expected_nb2(n);
    INFO("n = " << n);
    REQUIRE(std::abs(static_cast<double>(exact - formula)) < 1e-9);
  }
}

TEST_CASE("discard-first exact rows") {
  REQUIRE(static_cast<double>(exact_expected_visits(
              bare(Family::BinaryDiscardFirst, 2, Variant::A2))) == Approx(3.0).margin(1e-12));
  REQUIRE(static_cast<double>(exact_expected_visits(
              bare(Family::BinaryDiscardFirst, 3, Variant::A2))) == Approx(5.5).margin(1e-12));
  REQUIRE(static_cast<double>(exact_expected_visits(
              bare(Family::TernaryDiscardFirst, 4, Variant::A2))) ==
          Approx(301.0 / 27.0).margin(1e-12));
}

TEST_CASE("chain states stay small for the supported families") {
  markov::Model m2(bare(Family::BinaryDiscardFirst, 2, Variant::A2), 2'000'000);
  m2.solve();
  // n = 2 collapses to a single transient state after the forced discard
  REQUIRE(m2.state_count() == 1);
  markov::Model m3(bare(Family::BinaryDiscardFirst, 3, Variant::A2), 2'000'000);
  m3.solve();
  REQUIRE(m3.state_count() == 3);
  markov::Model m4(bare(Family::TernaryDiscardFirst, 4, Variant::A2), 2'000'000);
  m4.solve();
  REQUIRE(m4.state_count() == 13);
}

TEST_CASE("simulation agrees with the chain") {
  const StrategyParams p = bare(Family::TernaryDiscardFirst, 4, Variant::A2);
  const long double exact = exact_expected_visits(p);
  const SimStats st = run_batch(p, 200000, 17, 2);
  REQUIRE(std::abs(st.mean() - static_cast<double>(exact)) < 3.0 * st.stderror());
}

TEST_CASE("degenerate single prisoner") {
  REQUIRE(static_cast<double>(exact_expected_visits(
              bare(Family::SingleCounter, 1, Variant::B2))) == 1.0);
}

TEST_CASE("solver scope is enforced") {
  REQUIRE_THROWS_AS(exact_expected_visits(bare(Family::SingleCounter, 3, Variant::A2)),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(
      exact_expected_visits(bare(Family::Nc2TwoToken, 3, Variant::C2)),
      std::invalid_argument);
  REQUIRE_THROWS_AS(
      exact_expected_visits(parse_gen("((3,0,5),\xE2\x88\x9E)", Family::SnowballSingle, 5)),
      std::invalid_argument);
}

TEST_CASE("state budget overruns raise a resource error") {
  REQUIRE_THROWS_AS(
      exact_expected_visits(bare(Family::SingleCounter, 8, Variant::B2), 5),
      ResourceError);
}
