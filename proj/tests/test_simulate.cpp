#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "ultra/rng.hpp"
#include "ultra/simulate.hpp"

using namespace ultra;
using namespace fixtures;
using fixtures::b2::l1;
using fixtures::b2::o;

namespace {

JumpProcessSpec b2_spec(SigmaMeasure sigma, bool strict = true) {
  return JumpProcessSpec::validate(b2::tree(), b2::phi(), b2::uniform_measure(), std::move(sigma), strict);
}

}  // namespace

TEST_CASE("walk absorption frequencies on B2") {
  SimConfig c;
  c.seed = 42;
  c.trials = 100000;
  c.start = o;
  SimulationStats s = simulate_walk(b2::walk(), c);
  REQUIRE(s.empirical.size() == 4);
  for (double p : s.empirical) CHECK(std::abs(p - 0.25) <= 0.006);
  for (double p : s.exact) CHECK(p == 0.25);
  CHECK(s.truncated == 0);
  CHECK(s.within_bound());
  MESSAGE("B2 walk TV at seed 42: " << s.tv);
}

TEST_CASE("walk edge cases") {
  SimConfig c;
  c.seed = 3;
  c.start = o;
  SimulationStats one = simulate_walk(b2::walk(), c);
  std::size_t hits = 0;
  for (std::size_t k : one.counts) hits += k;
  CHECK(hits == 1);
  CHECK(std::count(one.empirical.begin(), one.empirical.end(), 1.0) == 1);

  c.trials = 1000;
  c.start = l1;
  SimulationStats absorbed = simulate_walk(b2::walk(), c);
  CHECK(absorbed.counts == std::vector<std::size_t>{1000, 0, 0, 0});
  CHECK(absorbed.tv == 0);

  c.start = o;
  c.max_steps = 1;
  CHECK(simulate_walk(b2::walk(), c).truncated == 1000);

  c.trials = 0;
  CHECK_THROWS_AS(simulate_walk(b2::walk(), c), InvalidInput);
}

TEST_CASE("runs are deterministic and independent of the thread count") {
  SimConfig c;
  c.seed = 11;
  c.trials = 30000;
  c.start = o;
  c.threads = 1;
  SimulationStats a = simulate_walk(b2::walk(), c);
  c.threads = 5;
  SimulationStats b = simulate_walk(b2::walk(), c);
  CHECK(a.counts == b.counts);
  CHECK(a.tv == b.tv);
  c.seed = 12;
  CHECK(simulate_walk(b2::walk(), c).counts != a.counts);

  JumpProcessSpec spec = b2_spec(SigmaMeasure::standard());
  c.start = l1;
  c.threads = 1;
  SimulationStats j1 = simulate_jump_chain(spec, c);
  c.threads = 3;
  CHECK(simulate_jump_chain(spec, c).counts == j1.counts);
}

TEST_CASE("jump chain on B2 with the standard law") {
  JumpProcessSpec spec = b2_spec(SigmaMeasure::standard());
  SimConfig c;
  c.seed = 7;
  c.trials = 100000;
  c.start = l1;
  SimulationStats one = simulate_jump_chain(spec, c);
  RealOperator P = semigroup_operator(spec, 1.0);
  for (std::size_t j = 0; j < 4; ++j) CHECK(one.exact[j] == doctest::Approx(P.entries[0][j]).epsilon(1e-15));
  CHECK(one.tv <= 0.01);
  MESSAGE("one-step TV: " << one.tv);

  c.steps = 2;
  SimulationStats two = simulate_jump_chain(spec, c);
  for (std::size_t j = 0; j < 4; ++j) {
    double square = 0;
    for (std::size_t k = 0; k < 4; ++k) square += P.entries[0][k] * P.entries[k][j];
    CHECK(two.exact[j] == doctest::Approx(square).epsilon(1e-12));
  }
  CHECK(two.tv <= 0.01);

  c.start = o;
  CHECK_THROWS_AS(simulate_jump_chain(spec, c), InvalidInput);
}

TEST_CASE("a law with all mass above phi(o) lands mu-distributed") {
  // F = 0 up to 2, so every radius is 2 and every ball is the whole boundary.
  SigmaMeasure sigma = SigmaMeasure::tabulated({{ratio(2, 1), ratio(0, 1)}});
  CHECK_THROWS_AS(b2_spec(sigma), InvalidInput);
  JumpProcessSpec spec = b2_spec(sigma, false);
  SimConfig c;
  c.seed = 5;
  c.trials = 40000;
  c.start = l1;
  SimulationStats s = simulate_jump_chain(spec, c);
  for (double p : s.exact) CHECK(p == doctest::Approx(0.25));
  CHECK(s.within_bound());
}

TEST_CASE("tabulated quantile hits each atom at its mass") {
  SigmaMeasure sigma =
      SigmaMeasure::tabulated({{ratio(1, 4), ratio(1, 10)}, {ratio(1, 2), ratio(1, 2)}, {ratio(2, 1), ratio(7, 10)}});
  // Atoms: 1/10 at 1/8, 2/5 at 1/4, 1/5 at 1/2, 3/10 at 2.
  std::vector<Rational> radius{ratio(1, 8), ratio(1, 4), ratio(1, 2), ratio(2, 1)};
  std::vector<double> mass{0.1, 0.4, 0.2, 0.3};
  std::vector<std::size_t> hits(4, 0);
  std::size_t misses = 0;
  Xoshiro256 rng(2024);
  const std::size_t N = 200000;
  for (std::size_t n = 0; n < N; ++n) {
    SigmaMeasure::Radius r = sigma.quantile(rng.uniform_open());
    auto it = std::find(radius.begin(), radius.end(), r.value);
    if (!r.exact || it == radius.end()) {
      ++misses;
      continue;
    }
    ++hits[static_cast<std::size_t>(it - radius.begin())];
  }
  CHECK(misses == 0);
  for (std::size_t i = 0; i < 4; ++i) {
    double p = static_cast<double>(hits[i]) / N;
    double se = std::sqrt(mass[i] * (1 - mass[i]) / N);
    CHECK(std::abs(p - mass[i]) <= 4.5 * se);
  }
}

TEST_CASE("empirical measures on random instances stay within the TV bound") {
  std::mt19937_64 rng(31);
  for (int rep = 0; rep < 4; ++rep) {
    Tree t = random_tree(rng, 20 + 10 * rep);
    Walk w = random_walk(rng, t);
    SimConfig c;
    c.seed = 100 + rep;
    c.trials = 100000;
    c.start = t.root();
    SimulationStats s = simulate_walk(w, c);
    CHECK(s.truncated == 0);
    CHECK(s.within_bound());

    UltrametricElement phi = random_phi(rng, t);
    JumpProcessSpec spec =
        JumpProcessSpec::validate(t, phi, random_measure(rng, t), random_tabulated_sigma(rng, t, phi));
    c.start = t.leaves().front();
    c.steps = 3;
    SimulationStats j = simulate_jump_chain(spec, c);
    CHECK(j.within_bound());
    double total = 0;
    for (double p : j.exact) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}
