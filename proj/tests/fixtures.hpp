#pragma once

// Shared test fixtures: the seven-vertex binary tree "B2" and seeded random
// trees and walks.

#include <algorithm>
#include <random>
#include <vector>

#include "ultra/boundary_process.hpp"
#include "ultra/tree.hpp"
#include "ultra/walk.hpp"

namespace fixtures {

using ultra::Rational;
using ultra::VertexId;

namespace b2 {
inline constexpr VertexId o = 0, a = 1, b = 2, l1 = 3, l2 = 4, l3 = 5, l4 = 6;

inline ultra::Tree tree() {
  ultra::TreeDescription d;
  d.root = o;
  d.children = {{a, b}, {l1, l2}, {l3, l4}, {}, {}, {}, {}};
  return ultra::Tree::build(d);
}

/// Simple random walk: uniform over neighbours, leaves absorbing.
inline ultra::Walk walk() {
  ultra::Walk::Table p;
  p[o] = {{a, Rational(1, 2)}, {b, Rational(1, 2)}};
  p[a] = {{o, Rational(1, 3)}, {l1, Rational(1, 3)}, {l2, Rational(1, 3)}};
  p[b] = {{o, Rational(1, 3)}, {l3, Rational(1, 3)}, {l4, Rational(1, 3)}};
  return ultra::validate_walk(tree(), p);
}

/// φ(o) = 3/2, φ(a) = φ(b) = 1/2.
inline ultra::UltrametricElement phi() {
  return ultra::UltrametricElement(tree(), {Rational(3, 2), Rational(1, 2), Rational(1, 2), 0, 0, 0, 0});
}

inline ultra::LeafVector uniform() { return ultra::LeafVector(4, Rational(1, 4)); }
inline ultra::BoundaryMeasure uniform_measure() { return ultra::BoundaryMeasure::validate(tree(), uniform()); }
}  // namespace b2

/// Random tree with at most `max_vertices` vertices: leaves are split into
/// 2..4 children until the budget is spent. Every interior vertex has at least
/// two children.
inline ultra::Tree random_tree(std::mt19937_64& rng, std::size_t max_vertices) {
  std::vector<VertexId> parent{ultra::kNoVertex, 0, 0};
  std::vector<VertexId> leaves{1, 2};
  std::uniform_int_distribution<std::size_t> width(2, 4);
  while (true) {
    std::size_t k = width(rng);
    if (parent.size() + k > max_vertices) {
      k = 2;
      if (parent.size() + k > max_vertices) break;
    }
    std::uniform_int_distribution<std::size_t> pick(0, leaves.size() - 1);
    std::size_t i = pick(rng);
    VertexId v = leaves[i];
    leaves.erase(leaves.begin() + static_cast<std::ptrdiff_t>(i));
    for (std::size_t c = 0; c < k; ++c) {
      leaves.push_back(parent.size());
      parent.push_back(v);
    }
  }
  return ultra::Tree::from_parents(parent);
}

/// Random rational walk: each interior row gets integer weights in [1, 9],
/// normalised.
inline ultra::Walk random_walk(std::mt19937_64& rng, const ultra::Tree& tree) {
  std::uniform_int_distribution<int> weight(1, 9);
  ultra::Walk::Table p;
  for (VertexId x : tree.interior()) {
    auto nbrs = tree.neighbours(x);
    std::vector<int> w(nbrs.size());
    int total = 0;
    for (auto& v : w) total += (v = weight(rng));
    for (std::size_t i = 0; i < nbrs.size(); ++i) p[x][nbrs[i]] = ultra::ratio(w[i], total);
  }
  return ultra::validate_walk(tree, p);
}

/// Random ultrametric element: root value in [8, 12], each child a random
/// fraction k/10 (k in 1..9) of its parent.
inline ultra::UltrametricElement random_phi(std::mt19937_64& rng, const ultra::Tree& t) {
  std::vector<Rational> v(t.size(), Rational(0));
  std::uniform_int_distribution<int> frac(1, 9);
  v[t.root()] = Rational(8 + frac(rng) % 5);
  for (VertexId x : t.interior()) {
    if (x == t.root()) continue;
    v[x] = v[t.parent(x)] * ultra::ratio(frac(rng), 10);
  }
  return ultra::UltrametricElement(t, v);
}

/// Fully supported leaf measure from integer weights in [1, 9].
inline ultra::BoundaryMeasure random_measure(std::mt19937_64& rng, const ultra::Tree& t) {
  std::uniform_int_distribution<int> weight(1, 9);
  std::vector<long> w(t.leaf_count());
  long total = 0;
  for (auto& v : w) total += (v = weight(rng));
  ultra::LeafVector mu(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) mu[i] = ultra::ratio(w[i], total);
  return ultra::BoundaryMeasure::validate(t, mu);
}

/// Tabulated σ with one threshold per distinct φ value and random rational
/// values strictly increasing in (0, 1), so it is strictly valid for φ.
inline ultra::SigmaMeasure random_tabulated_sigma(std::mt19937_64& rng, const ultra::Tree& t,
                                                  const ultra::UltrametricElement& phi) {
  std::vector<Rational> radii;
  for (VertexId x : t.interior()) radii.push_back(phi(x));
  std::sort(radii.begin(), radii.end());
  radii.erase(std::unique(radii.begin(), radii.end()), radii.end());
  std::uniform_int_distribution<int> gap(1, 5);
  std::vector<long> cum;
  long total = 0;
  for (std::size_t i = 0; i < radii.size(); ++i) cum.push_back(total += gap(rng));
  total += gap(rng);
  std::vector<std::pair<Rational, Rational>> table;
  for (std::size_t i = 0; i < radii.size(); ++i) table.emplace_back(radii[i], ultra::ratio(cum[i], total));
  return ultra::SigmaMeasure::tabulated(table);
}

/// Random rational in [-5, 5] with denominator up to 7.
inline Rational random_rational(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> num(-35, 35), den(1, 7);
  return ultra::ratio(num(rng), den(rng));
}

}  // namespace fixtures
