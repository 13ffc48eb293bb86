#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ultra/tree.hpp"

namespace ultra {

/// Values indexed by vertex id.
using VertexVector = std::vector<Rational>;
/// Values indexed by leaf index (Tree::leaves() order).
using LeafVector = std::vector<Rational>;

/// Sum of `values` over the leaves below `v`.
Rational branch_mass(const Tree& tree, const LeafVector& values, VertexId v);

/// Probability weights on the leaves: every weight strictly positive, total
/// exactly 1.
class BoundaryMeasure {
 public:
  /// Throws InvalidInput on a wrong length, a non-positive weight or a total
  /// other than 1.
  static BoundaryMeasure validate(const Tree& tree, LeafVector weights);

  const LeafVector& weights() const { return weights_; }
  const Rational& operator[](std::size_t leaf_index) const { return weights_.at(leaf_index); }
  std::size_t size() const { return weights_.size(); }
  /// μ(∂T_v).
  Rational mass(const Tree& tree, VertexId v) const { return branch_mass(tree, weights_, v); }
  /// μ(∂T_v) for every vertex, in O(n).
  VertexVector branch_masses(const Tree& tree) const;

  bool operator==(const BoundaryMeasure&) const = default;

 private:
  explicit BoundaryMeasure(LeafVector weights) : weights_(std::move(weights)) {}
  LeafVector weights_;
};

/// Nearest-neighbour transition probabilities. Every interior vertex moves to
/// each neighbour with positive probability; leaves are absorbing and carry no
/// outgoing entries.
class Walk {
 public:
  /// Sparse row form: table[x][y] = p(x,y).
  using Table = std::map<VertexId, std::map<VertexId, Rational>>;

  /// Throws InvalidInput on: a row from a leaf, an entry on a non-edge or an
  /// unknown vertex, a missing or non-positive entry on an edge, or an interior
  /// row that does not sum to 1 exactly.
  static Walk validate(const Tree& tree, const Table& table);

  const Tree& tree() const { return *tree_; }
  const std::shared_ptr<const Tree>& shared_tree() const { return tree_; }
  /// p(x,y); zero when y is not a neighbour of x or x is a leaf.
  Rational p(VertexId x, VertexId y) const;
  /// p(x, parent(x)); zero at leaves, undefined at the root.
  const Rational& to_parent(VertexId x) const { return to_parent_.at(x); }
  /// p(parent(x), x); undefined at the root.
  const Rational& to_child(VertexId x) const { return to_child_.at(x); }

  Table table() const;

  /// (P f)(x) = Σ_y p(x,y) f(y) for interior x; f(x) at leaves.
  VertexVector apply(const VertexVector& f) const;

 private:
  explicit Walk(std::shared_ptr<const Tree> tree) : tree_(std::move(tree)) {}

  std::shared_ptr<const Tree> tree_;
  std::vector<Rational> to_parent_;
  std::vector<Rational> to_child_;
};

inline Walk validate_walk(const Tree& tree, const Walk::Table& table) { return Walk::validate(tree, table); }

/// First-hitting probabilities F(x,y) = P_x[walk ever visits y].
///
/// Only the neighbour values are stored; F(x,y) for distant vertices is the
/// product along the geodesic.
class HittingKernel {
 public:
  HittingKernel(std::shared_ptr<const Tree> tree, std::vector<Rational> up, std::vector<Rational> down);

  /// F(x, parent(x)); 0 at leaves.
  const Rational& up(VertexId x) const { return up_.at(x); }
  /// F(parent(x), x).
  const Rational& down(VertexId x) const { return down_.at(x); }
  /// F along an edge in either direction.
  const Rational& step(VertexId from, VertexId to) const;

  Rational operator()(VertexId x, VertexId y) const;
  /// F(x, ·) for all vertices, in O(n).
  VertexVector from(VertexId x) const;
  /// F(·, y) for all vertices, in O(n).
  VertexVector to(VertexId y) const;

 private:
  std::shared_ptr<const Tree> tree_;
  std::vector<Rational> up_;
  std::vector<Rational> down_;
};

/// Two linear sweeps over the tree: leaves to root for F(x,x⁻), then root to
/// leaves for F(x⁻,x). Every denominator is at least the direct step
/// probability, so no division by zero can occur.
HittingKernel compute_F(const Walk& walk);

struct GreenKernel {
  /// U(x,x) at interior x; 0 at leaves.
  std::vector<Rational> return_probability;
  /// G(x,x); 1 at leaves (an absorbed walk is counted once at its leaf).
  std::vector<Rational> diagonal;
};

GreenKernel compute_UG(const Walk& walk, const HittingKernel& F);

struct ReversibleMeasure {
  /// m(root) = 1, product formula along interior paths; 0 at leaves (unused).
  std::vector<Rational> m;
  /// a(x⁻,x) = m(x⁻) p(x⁻,x), indexed by the lower endpoint x; unused at the root.
  std::vector<Rational> conductance;
};

ReversibleMeasure reversible_measure(const Walk& walk);

/// F, U, G, m and a bundled together. Computed once, immutable afterwards.
class WalkKernels {
 public:
  explicit WalkKernels(const Walk& walk);

  const HittingKernel& F() const { return F_; }
  Rational F(VertexId x, VertexId y) const { return F_(x, y); }
  const Rational& U(VertexId x) const { return green_.return_probability.at(x); }
  /// G(x,y) = F(x,y) G(y,y).
  Rational G(VertexId x, VertexId y) const { return F_(x, y) * green_.diagonal.at(y); }
  const Rational& G_diag(VertexId x) const { return green_.diagonal.at(x); }
  const Rational& m(VertexId x) const { return measure_.m.at(x); }
  const Rational& conductance(VertexId x) const { return measure_.conductance.at(x); }
  const std::vector<Rational>& conductances() const { return measure_.conductance; }

  /// A copy with G(x,x) shifted by `delta`, for exercising the checks.
  WalkKernels with_corrupted_green(VertexId x, const Rational& delta) const;

 private:
  HittingKernel F_;
  GreenKernel green_;
  ReversibleMeasure measure_;
};

/// Harmonic measure from x: ν_x({l}) = F(x,l), one entry per leaf.
LeafVector limit_distribution(const Walk& walk, const WalkKernels& kernels, VertexId x);

/// Branch mass ν_x(∂T_y) by the two-case closed formula (y ≠ root). Used to
/// cross-check the leaf sums of limit_distribution.
Rational harmonic_measure_of_branch(const Walk& walk, const WalkKernels& kernels, VertexId x, VertexId y);

/// h_u(x) = Σ_l u(l) ν_x({l}), evaluated in O(n) by one upward and one
/// downward pass.
VertexVector poisson_transform(const Walk& walk, const WalkKernels& kernels, const LeafVector& u);

/// Σ over edges [x⁻,x] of (f(x)−f(x⁻))(g(x)−g(x⁻)) a(x⁻,x).
Rational dirichlet_form_tree(const Tree& tree, const VertexVector& f, const VertexVector& g,
                             const std::vector<Rational>& conductance);

/// g(x) = G(x, x0). Satisfies P g = g − 1_{x0} at interior vertices. Throws
/// InvalidInput if x0 is a leaf.
VertexVector green_function_column(const Walk& walk, const WalkKernels& kernels, VertexId x0);

struct IdentityCheck {
  std::string identity;
  std::vector<VertexId> location;
  Rational lhs;
  Rational rhs;
  bool pass = false;
};

struct IdentityReport {
  std::vector<IdentityCheck> checks;
  std::size_t failures() const;
  bool all_pass() const { return failures() == 0; }
};

/// Exact checks of the kernel identities at every applicable vertex, edge and
/// vertex pair:
///   green_factorization    G(x,y) = F(x,y) G(y,y), with G(·,y) taken from the
///                          first-step equations (P G(·,y) = G(·,y) − 1_y)
///   green_return           G(x,x) (1 − U(x,x)) = 1
///   return_first_step      U(x,x) = Σ_y p(x,y) F(y,x)
///   hitting_multiplicative F(·,y) harmonic off y, so path products are hitting probabilities
///   green_edge             G(x,x) p(x,y) = F(x,y) / (1 − F(x,y)F(y,x)), y ∼ x
///   green_diagonal         G(x,x) = 1 + Σ_{y∼x} F(x,y)F(y,x) / (1 − F(x,y)F(y,x))
///   hitting_from_measure   F(x⁻,x) recovered from ν_o(∂T_x) and F(x,x⁻)
///   branch_exit            ν_x(∂T_x) = 1 − p(x,x⁻)(G(x,x) − G(x⁻,x))
///   branch_measure         leaf sums of ν_x equal the closed branch formula
///   green_reversibility    m(x) G(x,y) = m(y) G(y,x)
///   return_below_one       F(x,x⁻) < 1 (lhs F, rhs 1)
IdentityReport check_kernel_identities(const Walk& walk, const WalkKernels& kernels);

}  // namespace ultra
