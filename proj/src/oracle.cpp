#include "ultra/oracle.hpp"

#include <algorithm>

namespace ultra::oracle {

Matrix solve(Matrix a, Matrix b) {
  const std::size_t n = a.size();
  if (b.size() != n) throw InvalidInput("solve: row count mismatch");
  const std::size_t m = n == 0 ? 0 : b.front().size();

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    while (pivot < n && a[pivot][col] == 0) ++pivot;
    if (pivot == n) throw InvalidInput("solve: singular matrix");
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      if (a[r][col] == 0) continue;
      Rational factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) {
        if (a[col][c] != 0) a[r][c] -= factor * a[col][c];
      }
      for (std::size_t c = 0; c < m; ++c) {
        if (b[col][c] != 0) b[r][c] -= factor * b[col][c];
      }
    }
  }

  Matrix x(n, std::vector<Rational>(m));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t c = 0; c < m; ++c) {
      Rational s = b[i][c];
      for (std::size_t j = i + 1; j < n; ++j) {
        if (a[i][j] != 0) s -= a[i][j] * x[j][c];
      }
      x[i][c] = s / a[i][i];
    }
  }
  return x;
}

namespace {

// Interior states with every child ahead of its parent, which keeps the
// elimination free of fill-in.
std::vector<VertexId> elimination_order(const Tree& tree) {
  std::vector<VertexId> order(tree.interior().rbegin(), tree.interior().rend());
  return order;
}

}  // namespace

AbsorbingChain absorbing_chain(const Walk& walk) {
  const Tree& t = walk.tree();
  AbsorbingChain out;
  out.states = elimination_order(t);
  const std::size_t k = out.states.size();
  const std::size_t leaves = t.leaf_count();
  std::vector<std::size_t> row_of(t.size(), kNoVertex);
  for (std::size_t i = 0; i < k; ++i) row_of[out.states[i]] = i;

  Matrix a(k, std::vector<Rational>(k));
  Matrix rhs(k, std::vector<Rational>(k + leaves));
  for (std::size_t i = 0; i < k; ++i) {
    VertexId x = out.states[i];
    a[i][i] = 1;
    rhs[i][i] = 1;
    for (VertexId y : t.neighbours(x)) {
      Rational p = walk.p(x, y);
      if (row_of[y] != kNoVertex) {
        a[i][row_of[y]] -= p;
      } else {
        rhs[i][k + t.leaf_index(y)] = p;
      }
    }
  }
  Matrix x = solve(std::move(a), std::move(rhs));
  out.green.assign(k, std::vector<Rational>(k));
  out.absorption.assign(k, std::vector<Rational>(leaves));
  for (std::size_t i = 0; i < k; ++i) {
    std::copy(x[i].begin(), x[i].begin() + static_cast<std::ptrdiff_t>(k), out.green[i].begin());
    std::copy(x[i].begin() + static_cast<std::ptrdiff_t>(k), x[i].end(), out.absorption[i].begin());
  }
  return out;
}

Matrix hitting_probabilities(const Walk& walk) {
  const Tree& t = walk.tree();
  const std::size_t n = t.size();
  Matrix F(n, std::vector<Rational>(n));
  const std::vector<VertexId> order = elimination_order(t);

  for (VertexId target = 0; target < n; ++target) {
    F[target][target] = 1;
    std::vector<VertexId> states;
    for (VertexId x : order)
      if (x != target) states.push_back(x);
    std::vector<std::size_t> row_of(n, kNoVertex);
    for (std::size_t i = 0; i < states.size(); ++i) row_of[states[i]] = i;

    // h(x) = Σ_z p(x,z) h(z) off the target, h(target) = 1, h = 0 on other leaves.
    Matrix a(states.size(), std::vector<Rational>(states.size()));
    Matrix rhs(states.size(), std::vector<Rational>(1));
    for (std::size_t i = 0; i < states.size(); ++i) {
      VertexId x = states[i];
      a[i][i] = 1;
      for (VertexId z : t.neighbours(x)) {
        Rational p = walk.p(x, z);
        if (z == target) {
          rhs[i][0] += p;
        } else if (row_of[z] != kNoVertex) {
          a[i][row_of[z]] -= p;
        }
      }
    }
    if (states.empty()) continue;
    Matrix h = solve(std::move(a), std::move(rhs));
    for (std::size_t i = 0; i < states.size(); ++i) F[states[i]][target] = h[i][0];
  }
  return F;
}

}  // namespace ultra::oracle
