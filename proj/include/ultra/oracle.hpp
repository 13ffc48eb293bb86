#pragma once

#include <vector>

#include "ultra/walk.hpp"

/// Dense exact linear algebra on the absorbing chain. Shares nothing with the
/// tree recursions in walk.hpp and is used to validate them.
namespace ultra::oracle {

using Matrix = std::vector<std::vector<Rational>>;

/// Solves A X = B by Gaussian elimination in the given row order (first
/// nonzero pivot, zero entries skipped). Throws InvalidInput if A is singular.
Matrix solve(Matrix a, Matrix b);

struct AbsorbingChain {
  /// Interior vertices, in the row/column order of `green`.
  std::vector<VertexId> states;
  /// Fundamental matrix N = (I − Q)^{-1}: N[i][j] = G(states[i], states[j]).
  Matrix green;
  /// N R: absorption[i][l] = ν_{states[i]}({leaf l}), leaves in Tree::leaves() order.
  Matrix absorption;
};

AbsorbingChain absorbing_chain(const Walk& walk);

/// F(x,y) for all vertex pairs from one first-step system per target y.
Matrix hitting_probabilities(const Walk& walk);

}  // namespace ultra::oracle
