#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ultra/boundary_process.hpp"
#include "ultra/tree.hpp"
#include "ultra/walk.hpp"

namespace ultra {

/// The boundary data (φ, μ) paired with a walk.
struct DualityResult {
  UltrametricElement phi;
  BoundaryMeasure mu;
};

/// φ(x) = G(x, o) on interior vertices and μ = ν_o.
DualityResult walk_to_process(const Walk& walk, const WalkKernels& kernels);

/// The would-be kernels of the reconstruction and the resulting walk.
struct ReconstructionTrace {
  Rational C;
  /// w̃F(x, x⁻) in up[x] and w̃F(x⁻, x) in down[x].
  HittingKernel wtF;
  /// w̃G(x, x) on interior vertices, 0 at leaves.
  VertexVector wtG_diag;
  Walk walk;
};

/// The unique walk whose boundary process is the standard (C·φ, μ)-process.
/// The result is checked before it is returned: every row sums to 1, the new
/// walk has G(x, o) = C·φ(x) and ν_o = μ. Any failure throws
/// VerificationFailure.
ReconstructionTrace process_to_walk(const Tree& tree, const UltrametricElement& phi, const BoundaryMeasure& mu);

/// w̃G(·, x0) from the trace: values of P g̃ and of g̃ − 1_{x0} at every
/// interior vertex.
struct GreenColumnCheck {
  VertexVector applied;
  VertexVector expected;
  bool pass() const { return applied == expected; }
};
GreenColumnCheck check_reconstructed_green_column(const ReconstructionTrace& trace, VertexId x0);

/// Θ_base(ξ, η) = m(base) / (G(base, base) F(base, c) F(c, base)), c the
/// confluent of ξ and η with respect to base. Requires an interior base.
ConfluentKernel naim_kernel(const Walk& walk, const WalkKernels& kernels, VertexId base);
Rational naim_kernel(const Walk& walk, const WalkKernels& kernels, VertexId base, VertexId xi, VertexId eta);

/// 𝔇_T(h_u, h_v).
Rational hd_form(const Walk& walk, const WalkKernels& kernels, const LeafVector& u, const LeafVector& v);

/// One exact comparison of two independently computed sides.
struct Comparison {
  std::string location;
  Rational lhs;
  Rational rhs;
  bool pass = false;
};

struct CheckReport {
  std::string theorem;
  std::size_t instances = 1;
  std::size_t checks = 0;
  /// Every comparison when recording is on, otherwise only the failures.
  std::vector<Comparison> entries;
  std::size_t failure_count = 0;

  bool all_pass() const { return failure_count == 0; }
  void add(std::string location, Rational lhs, Rational rhs);
  /// Folds another report on the same theorem into this one.
  void merge(const CheckReport& other);

  bool record_all = false;
};

struct TestFunction {
  std::string name;
  LeafVector values;
};

/// The indicators 1_{∂T_x} for every vertex x, followed by `random_count`
/// random rationals p/q with |p| ≤ 50, 1 ≤ q ≤ 12, drawn from Xoshiro256(seed).
std::vector<TestFunction> doob_naim_functions(const Tree& tree, std::size_t random_count, std::uint64_t seed);

enum class PairSelection {
  /// Every unordered pair, diagonal included.
  All,
  /// Every function with itself, and every random function with every other
  /// function.
  RandomAgainstAll,
};

/// hd_form(u, v) against the Θ_o-weighted boundary double sum, per pair. The
/// tree side is the edge sum over Poisson transforms; the boundary side is
/// the confluent-grouped double sum.
CheckReport check_doob_naim(const Walk& walk, const WalkKernels& kernels, const std::vector<TestFunction>& functions,
                            PairSelection pairs = PairSelection::All, bool record_all = false);

/// J for (G(·, o), ν_o) against Θ_o on every ordered pair of distinct leaves.
CheckReport check_theorem_I(const Walk& walk, const WalkKernels& kernels, bool record_all = false);

/// Θ_x(ξ,η) ν_x(ξ) ν_x(η) against the same product at the root, for every
/// interior x and every pair of distinct leaves; then the Martin kernel
/// ν_x(l)/ν_o(l) = G(x, c)/G(o, c) with c = x ∧ l, for every interior x and
/// leaf l.
CheckReport check_base_point_invariance(const Walk& walk, const WalkKernels& kernels, bool record_all = false);

/// walk → (φ, μ) → walk: C = 1 and the same transition probabilities.
CheckReport roundtrip(const Walk& walk, bool record_all = false);

/// (φ, μ) → walk → (φ′, μ′): φ′ = C·φ and μ′ = μ; and (c·φ, μ) gives C/c
/// with the same walk.
CheckReport roundtrip(const Tree& tree, const UltrametricElement& phi, const BoundaryMeasure& mu,
                      const Rational& scale, bool record_all = false);

}  // namespace ultra
