#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "ultra/oracle.hpp"
#include "ultra/walk.hpp"

using namespace ultra;
using namespace fixtures;
using fixtures::b2::a;
using fixtures::b2::b;
using fixtures::b2::l1;
using fixtures::b2::l2;
using fixtures::b2::l3;
using fixtures::b2::l4;
using fixtures::b2::o;

namespace {

Rational q(long n, long d = 1) { return ratio(n, d); }

// Position of vertex v among the oracle's interior states.
std::size_t state(const oracle::AbsorbingChain& chain, VertexId v) {
  for (std::size_t i = 0; i < chain.states.size(); ++i)
    if (chain.states[i] == v) return i;
  FAIL("not an interior state");
  return 0;
}

}  // namespace

TEST_CASE("oracle reproduces the B2 reference values") {
  Walk w = b2::walk();
  auto chain = oracle::absorbing_chain(w);
  auto F = oracle::hitting_probabilities(w);
  CHECK(F[a][o] == q(1, 3));
  CHECK(F[o][a] == q(3, 5));
  CHECK(F[l1][o] == 0);
  CHECK(F[a][l1] == q(5, 12));
  CHECK(chain.green[state(chain, o)][state(chain, o)] == q(3, 2));
  CHECK(chain.green[state(chain, a)][state(chain, a)] == q(5, 4));
  CHECK(chain.green[state(chain, a)][state(chain, o)] == q(1, 2));
  for (const auto& v : chain.absorption[state(chain, o)]) CHECK(v == q(1, 4));
  const auto& from_a = chain.absorption[state(chain, a)];
  CHECK(from_a[0] + from_a[1] == q(5, 6));
}

TEST_CASE("validate_walk") {
  Tree t = b2::tree();
  Walk::Table p = b2::walk().table();
  CHECK_NOTHROW(validate_walk(t, p));

  SUBCASE("row sum") {
    p[o][a] = q(1, 3);
    p[o][b] = q(1, 3);
    CHECK_THROWS_WITH_AS(validate_walk(t, p), doctest::Contains("sums to 2/3"), InvalidInput);
  }
  SUBCASE("zero on an edge") {
    p[a][l1] = 0;
    CHECK_THROWS_WITH_AS(validate_walk(t, p), doctest::Contains("non-positive"), InvalidInput);
  }
  SUBCASE("missing edge") {
    p[a].erase(l1);
    CHECK_THROWS_AS(validate_walk(t, p), InvalidInput);
  }
  SUBCASE("non-edge") {
    p[a][b] = q(1, 10);
    CHECK_THROWS_WITH_AS(validate_walk(t, p), doctest::Contains("non-edge"), InvalidInput);
  }
  SUBCASE("leaf row") {
    p[l1][a] = 1;
    CHECK_THROWS_WITH_AS(validate_walk(t, p), doctest::Contains("leaf"), InvalidInput);
  }
  SUBCASE("unknown vertex") {
    p[a][99] = q(1, 10);
    CHECK_THROWS_AS(validate_walk(t, p), InvalidInput);
  }
}

TEST_CASE("B2 kernels") {
  Walk w = b2::walk();
  WalkKernels k(w);
  CHECK(k.F(a, o) == q(1, 3));
  CHECK(k.F(o, a) == q(3, 5));
  CHECK(k.F(l1, o) == 0);
  CHECK(k.F(a, a) == 1);
  CHECK(k.F(a, l1) == q(5, 12));
  CHECK(k.U(o) == q(1, 3));
  CHECK(k.U(a) == q(1, 5));
  CHECK(k.G_diag(o) == q(3, 2));
  CHECK(k.G_diag(a) == q(5, 4));
  CHECK(k.G(a, o) == q(1, 2));
  CHECK(k.m(a) == q(3, 2));
  CHECK(k.conductance(a) == q(1, 2));
  CHECK(k.conductance(l1) == q(1, 2));
  CHECK(k.m(a) * w.to_parent(a) == k.conductance(a));
}

TEST_CASE("B2 limit distributions and Poisson transform") {
  Walk w = b2::walk();
  WalkKernels k(w);
  Tree t = b2::tree();
  CHECK(limit_distribution(w, k, o) == b2::uniform());
  CHECK(branch_mass(t, limit_distribution(w, k, a), a) == q(5, 6));
  CHECK(harmonic_measure_of_branch(w, k, a, a) == q(5, 6));
  CHECK(limit_distribution(w, k, l1) == LeafVector{1, 0, 0, 0});

  LeafVector u{1, 1, 0, 0};
  VertexVector h = poisson_transform(w, k, u);
  CHECK(h[o] == q(1, 2));
  CHECK(h[a] == q(5, 6));
  CHECK(h[b] == q(1, 6));
  CHECK(h[l1] == 1);
  CHECK(h[l3] == 0);
  CHECK(w.apply(h) == h);

  VertexVector ones = poisson_transform(w, k, LeafVector(4, 1));
  for (const auto& v : ones) CHECK(v == 1);

  CHECK(dirichlet_form_tree(t, h, h, k.conductances()) == q(1, 6));
  CHECK(dirichlet_form_tree(t, ones, ones, k.conductances()) == 0);
  CHECK(dirichlet_form_tree(t, h, ones, k.conductances()) == 0);
}

TEST_CASE("B2 Green column") {
  Walk w = b2::walk();
  WalkKernels k(w);
  VertexVector g = green_function_column(w, k, o);
  CHECK(g[o] == q(3, 2));
  CHECK(g[a] == q(1, 2));
  CHECK(g[l1] == 0);
  VertexVector pg = w.apply(g);
  CHECK(pg[a] == q(1, 2));
  CHECK(pg[o] == g[o] - 1);
  CHECK_THROWS_AS(green_function_column(w, k, l1), InvalidInput);

  // Green identity for a function vanishing on the leaves.
  VertexVector f{q(2), q(-1, 3), q(5), 0, 0, 0, 0};
  CHECK(dirichlet_form_tree(b2::tree(), f, g, k.conductances()) == k.m(o) * f[o]);
}

TEST_CASE("B2 identity report") {
  Walk w = b2::walk();
  WalkKernels k(w);
  IdentityReport r = check_kernel_identities(w, k);
  CHECK(r.all_pass());
  bool saw_edge = false, saw_diag = false, saw_exit = false;
  for (const auto& c : r.checks) {
    if (c.identity == "green_edge" && c.location == std::vector<VertexId>{a, o}) {
      saw_edge = true;
      CHECK(c.lhs == q(5, 12));
    }
    if (c.identity == "green_diagonal" && c.location == std::vector<VertexId>{o}) {
      saw_diag = true;
      CHECK(c.rhs == q(3, 2));
    }
    if (c.identity == "branch_exit" && c.location == std::vector<VertexId>{a}) {
      saw_exit = true;
      CHECK(c.lhs == q(5, 6));
      CHECK(c.rhs == q(5, 6));
    }
  }
  CHECK(saw_edge);
  CHECK(saw_diag);
  CHECK(saw_exit);
}

TEST_CASE("random walks agree with the dense oracle") {
  std::mt19937_64 rng(20240611);
  for (int instance = 0; instance < 25; ++instance) {
    Tree t = random_tree(rng, 7 + instance * 3);
    Walk w = random_walk(rng, t);
    WalkKernels k(w);
    auto F = oracle::hitting_probabilities(w);
    auto chain = oracle::absorbing_chain(w);
    for (VertexId x = 0; x < t.size(); ++x) {
      VertexVector row = k.F().from(x);
      for (VertexId y = 0; y < t.size(); ++y) {
        REQUIRE(row[y] == F[x][y]);
        REQUIRE(k.F(x, y) == F[x][y]);
      }
    }
    for (std::size_t i = 0; i < chain.states.size(); ++i) {
      VertexId x = chain.states[i];
      for (std::size_t j = 0; j < chain.states.size(); ++j) {
        REQUIRE(k.G(x, chain.states[j]) == chain.green[i][j]);
      }
      LeafVector nu = limit_distribution(w, k, x);
      REQUIRE(nu == chain.absorption[i]);
      Rational total = 0;
      for (const auto& v : nu) total += v;
      REQUIRE(total == 1);
    }

    LeafVector u(t.leaf_count());
    for (auto& v : u) v = random_rational(rng);
    VertexVector h = poisson_transform(w, k, u);
    REQUIRE(w.apply(h) == h);
    for (VertexId x = 0; x < t.size(); ++x) {
      LeafVector nu = limit_distribution(w, k, x);
      Rational direct = 0;
      for (std::size_t i = 0; i < nu.size(); ++i) direct += u[i] * nu[i];
      REQUIRE(h[x] == direct);
    }

    IdentityReport r = check_kernel_identities(w, k);
    REQUIRE(r.all_pass());
  }
}
