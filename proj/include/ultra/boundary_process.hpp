#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "ultra/tree.hpp"
#include "ultra/walk.hpp"

namespace ultra {

/// Distribution of the jump radius, given by F(r) = σ([0, r)).
///
/// Standard: the inverse exponential law, F(r) = exp(−1/r).
///
/// Tabulated: thresholds r_0 < r_1 < … < r_k with values c_0 ≤ … ≤ c_k fix
/// F(r_i) = c_i. In between, F is a left-continuous step function:
///   F = 0 on (0, r_0/2],  F = c_0 on (r_0/2, r_0],  F = c_i on (r_{i−1}, r_i],
///   F = 1 above r_k.
/// Equivalently σ has atoms c_0 at r_0/2, c_i − c_{i−1} at r_{i−1} and 1 − c_k
/// at r_k. Values are kept as doubles, together with the exact rational when
/// one is known.
class SigmaMeasure {
 public:
  enum class Kind { Standard, Tabulated };

  struct Step {
    Rational radius;
    double value = 0;
    std::optional<Rational> exact;
  };

  static SigmaMeasure standard();
  /// Throws InvalidInput unless radii are positive and strictly increasing and
  /// values lie in [0, 1] and are nondecreasing.
  static SigmaMeasure tabulated(std::vector<Step> steps);
  static SigmaMeasure tabulated(const std::vector<std::pair<Rational, Rational>>& cdf);

  Kind kind() const { return kind_; }
  const std::vector<Step>& steps() const { return steps_; }

  double cdf(const Rational& r) const;
  /// log F(r); exactly −1/r for the standard measure, so deep radii do not
  /// underflow.
  double log_cdf(const Rational& r) const;
  /// Exact F(r), when F(r) is rational and known (Tabulated only).
  std::optional<Rational> exact_cdf(const Rational& r) const;

  /// An atom of a Tabulated σ; `quantile` returns either this or a real radius.
  struct Radius {
    bool exact = false;
    Rational value;
    double real = 0;
  };
  /// Smallest r with σ([0, r]) ≥ u (inverse CDF), for u in (0, 1).
  Radius quantile(double u) const;

 private:
  Kind kind_ = Kind::Standard;
  std::vector<Step> steps_;
};

inline double standard_cdf(double r) { return r > 0 ? std::exp(-1.0 / r) : 0.0; }

/// The data (φ, μ, σ) of an isotropic jump process on the leaves.
struct JumpProcessSpec {
  Tree tree;
  UltrametricElement phi;
  BoundaryMeasure mu;
  SigmaMeasure sigma;

  /// With `strict`, σ must satisfy 0 < F(φ(x)) < 1 at every interior x and be
  /// strictly increasing along every root-to-leaf path; this is what the
  /// semigroup and standardization need. Without it only the component
  /// invariants are checked. Throws InvalidInput.
  static JumpProcessSpec validate(Tree tree, UltrametricElement phi, BoundaryMeasure mu, SigmaMeasure sigma,
                                  bool strict = true);
};

/// Throws InvalidInput naming the first interior vertex where the strict σ
/// conditions fail. The standard measure always passes.
void check_sigma_strict(const Tree& tree, const UltrametricElement& phi, const SigmaMeasure& sigma);

/// Dense leaf-by-leaf matrix; rows and columns follow Tree::leaves().
template <class T>
struct BoundaryOperator {
  std::vector<VertexId> leaves;
  std::vector<std::vector<T>> entries;

  std::size_t size() const { return leaves.size(); }
  const T& operator()(std::size_t i, std::size_t j) const { return entries[i][j]; }
};

using RealOperator = BoundaryOperator<double>;
using ExactOperator = BoundaryOperator<Rational>;

/// P_r: each row is μ restricted to the ball B(ξ, r) and normalized.
ExactOperator averaging_operator(const Tree& tree, const UltrametricElement& phi, const BoundaryMeasure& mu,
                                 const Rational& radius);

/// P^t of the (φ, μ, σ)-process. For a leaf ξ below x_0 = o, …, x_{k−1}:
///   P^t f(ξ) = Σ_n c_n P_{φ(x_n)} f(ξ) + c_atom f(ξ)
/// with c_0 = 1 − F(φ(x_0))^t, c_n = F(φ(x_{n−1}))^t − F(φ(x_n))^t and
/// c_atom = F(φ(x_{k−1}))^t. Requires t > 0 and a strictly valid spec.
RealOperator semigroup_operator(const JumpProcessSpec& spec, double t);

/// Same operator for the standard process of a real-valued element, e.g. the
/// output of `standardize`.
RealOperator semigroup_operator(const Tree& tree, const RealUltrametricElement& phi, const BoundaryMeasure& mu,
                                double t);

/// The t = 1 operator straight from F(φ(x)), without the strict σ checks. It
/// is the one-step law of the jump chain for any valid σ.
RealOperator one_step_operator(const JumpProcessSpec& spec);

/// Exact P^t for a Tabulated σ with rational values at every φ(x) and a
/// positive integer t. Throws InvalidInput otherwise.
ExactOperator semigroup_operator_exact(const JumpProcessSpec& spec, unsigned t);

/// φ_*(x) = −1 / log F(φ(x)). The (φ_*, μ, σ_*)-process equals the
/// (φ, μ, σ)-process.
RealUltrametricElement standardize(const Tree& tree, const UltrametricElement& phi, const SigmaMeasure& sigma);

/// Tabulated σ with F(φ_target(x)) = exp(−1/G(x, o)) on interior vertices, so
/// that the (φ_target, ν_o, σ)-process is the walk's boundary process. Throws
/// InvalidInput naming a vertex pair when φ_target is not a strictly
/// increasing function of G(·, o).
SigmaMeasure sigma_for_phi(const Tree& tree, const UltrametricElement& phi_target, const WalkKernels& kernels);

/// A symmetric kernel on distinct leaves that depends on the pair only through
/// its confluent with respect to `base`. The diagonal is never stored.
class ConfluentKernel {
 public:
  ConfluentKernel(std::shared_ptr<const Tree> tree, VertexId base, VertexVector by_confluent)
      : tree_(std::move(tree)), base_(base), by_confluent_(std::move(by_confluent)) {}

  VertexId base() const { return base_; }
  /// Throws InvalidInput when ξ = η or either is not a leaf.
  Rational operator()(VertexId xi, VertexId eta) const;
  /// Value on pairs whose confluent is c.
  const Rational& at_confluent(VertexId c) const { return by_confluent_.at(c); }
  const VertexVector& by_confluent() const { return by_confluent_; }
  const Tree& tree() const { return *tree_; }

 private:
  std::shared_ptr<const Tree> tree_;
  VertexId base_;
  VertexVector by_confluent_;
};

/// J(ξ, η) = 1/φ(o) + Σ_{x ∈ π(o, ξ∧η), x ≠ o} (1/φ(x) − 1/φ(x⁻)) / μ(∂T_x).
ConfluentKernel j_kernel(const Tree& tree, const UltrametricElement& phi, const BoundaryMeasure& mu);
Rational j_kernel(const Tree& tree, const UltrametricElement& phi, const BoundaryMeasure& mu, VertexId xi,
                  VertexId eta);

/// ½ Σ_{ξ≠η} (u(ξ)−u(η))(v(ξ)−v(η)) K(ξ,η) μ(ξ) μ(η), as a plain double sum.
Rational boundary_dirichlet_form(const LeafVector& u, const LeafVector& v, const ConfluentKernel& kernel,
                                 const LeafVector& mu);

/// The same sum for a kernel based at the root, grouped by confluent. With
/// subtree sums N = Σμ, A = Σuμ, B = Σvμ, W = Σuvμ and Q = WN − AB, the pairs
/// meeting at c contribute K(c)(Q_c − Σ_{children} Q), and Q vanishes at
/// leaves, so the form is Σ_c (K(c) − K(c⁻)) Q_c over interior c (K(o⁻) = 0).
/// O(n) per pair instead of O(L²).
class GroupedBoundaryForm {
 public:
  /// Throws InvalidInput unless the kernel is based at the root.
  GroupedBoundaryForm(const ConfluentKernel& kernel, const LeafVector& mu);

  /// Per-function data reused across pairs.
  struct Prepared {
    LeafVector weighted;  // u(ξ) μ(ξ)
    VertexVector sums;    // A
  };
  Prepared prepare(const LeafVector& u) const;
  Rational operator()(const Prepared& u, const Prepared& v, const LeafVector& v_values) const;

 private:
  const Tree* tree_;
  LeafVector mu_;
  VertexVector mass_;
  VertexVector increment_;
};

Rational boundary_dirichlet_form_grouped(const LeafVector& u, const LeafVector& v, const ConfluentKernel& kernel,
                                         const LeafVector& mu);

/// Λ[ξ][η] = −K(ξ,η) μ(η) off the diagonal, Λ[ξ][ξ] = Σ_{η≠ξ} K(ξ,η) μ(η).
ExactOperator generator_matrix(const ConfluentKernel& kernel, const LeafVector& mu);

/// max |P^t − exp(−tΛ)| with Λ the generator of the standardized process.
/// Diagnostic only; the two need not agree.
double semigroup_generator_gap(const JumpProcessSpec& spec, double t);

}  // namespace ultra
