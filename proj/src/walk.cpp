#include "ultra/walk.hpp"

#include <algorithm>

namespace ultra {

namespace {

std::string vid(VertexId v) { return std::to_string(v); }

}  // namespace

Rational branch_mass(const Tree& tree, const LeafVector& values, VertexId v) {
  auto [lo, hi] = tree.leaf_range(v);
  Rational sum = 0;
  for (std::size_t i = lo; i < hi; ++i) sum += values.at(i);
  return sum;
}

BoundaryMeasure BoundaryMeasure::validate(const Tree& tree, LeafVector weights) {
  if (weights.size() != tree.leaf_count()) {
    throw InvalidInput("boundary measure: expected " + std::to_string(tree.leaf_count()) + " weights, got " +
                       std::to_string(weights.size()));
  }
  Rational total = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i].canonicalize();
    if (weights[i] <= 0) {
      throw InvalidInput("boundary measure: non-positive weight at leaf " + vid(tree.leaves()[i]));
    }
    total += weights[i];
  }
  if (total != 1) throw InvalidInput("boundary measure: weights sum to " + format_rational(total));
  return BoundaryMeasure(std::move(weights));
}

VertexVector BoundaryMeasure::branch_masses(const Tree& tree) const {
  VertexVector mass(tree.size(), Rational(0));
  const auto& order = tree.preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    VertexId v = *it;
    if (tree.is_leaf(v)) {
      mass[v] = weights_[tree.leaf_index(v)];
    } else {
      for (VertexId c : tree.children(v)) mass[v] += mass[c];
    }
  }
  return mass;
}

// ---------------------------------------------------------------------------
// Walk

Walk Walk::validate(const Tree& tree, const Table& table) {
  Walk w(std::make_shared<const Tree>(tree));
  const std::size_t n = tree.size();
  w.to_parent_.assign(n, Rational(0));
  w.to_child_.assign(n, Rational(0));

  for (const auto& [x, row] : table) {
    if (x >= n) throw InvalidInput("walk: unknown vertex " + vid(x));
    if (tree.is_leaf(x)) {
      if (!row.empty()) throw InvalidInput("walk: outgoing probability from leaf " + vid(x));
      continue;
    }
    for (const auto& [y, prob] : row) {
      if (y >= n) throw InvalidInput("walk: unknown vertex " + vid(y));
      if (!tree.adjacent(x, y)) throw InvalidInput("walk: probability on non-edge (" + vid(x) + ", " + vid(y) + ")");
      if (prob <= 0) {
        throw InvalidInput("walk: non-positive probability " + format_rational(prob) + " on edge (" + vid(x) + ", " +
                           vid(y) + ")");
      }
    }
  }

  for (VertexId x : tree.interior()) {
    auto it = table.find(x);
    Rational sum = 0;
    for (VertexId y : tree.neighbours(x)) {
      const Rational* prob = nullptr;
      if (it != table.end()) {
        auto jt = it->second.find(y);
        if (jt != it->second.end()) prob = &jt->second;
      }
      if (prob == nullptr) throw InvalidInput("walk: zero probability on edge (" + vid(x) + ", " + vid(y) + ")");
      Rational value = *prob;
      value.canonicalize();
      sum += value;
      if (y == tree.parent(x)) {
        w.to_parent_[x] = value;
      } else {
        w.to_child_[y] = value;
      }
    }
    if (sum != 1) throw InvalidInput("walk: row " + vid(x) + " sums to " + format_rational(sum));
  }
  return w;
}

Rational Walk::p(VertexId x, VertexId y) const {
  const Tree& t = *tree_;
  if (x >= t.size() || y >= t.size() || t.is_leaf(x)) return 0;
  if (t.parent(x) == y) return to_parent_[x];
  if (t.parent(y) == x) return to_child_[y];
  return 0;
}

Walk::Table Walk::table() const {
  Table out;
  for (VertexId x : tree_->interior()) {
    auto& row = out[x];
    for (VertexId y : tree_->neighbours(x)) row[y] = p(x, y);
  }
  return out;
}

VertexVector Walk::apply(const VertexVector& f) const {
  const Tree& t = *tree_;
  VertexVector out(f);
  for (VertexId x : t.interior()) {
    Rational s = 0;
    if (t.parent(x) != kNoVertex) s += to_parent_[x] * f.at(t.parent(x));
    for (VertexId c : t.children(x)) s += to_child_[c] * f.at(c);
    out[x] = s;
  }
  return out;
}

// ---------------------------------------------------------------------------
// F

HittingKernel::HittingKernel(std::shared_ptr<const Tree> tree, std::vector<Rational> up, std::vector<Rational> down)
    : tree_(std::move(tree)), up_(std::move(up)), down_(std::move(down)) {}

const Rational& HittingKernel::step(VertexId from, VertexId to) const {
  if (tree_->parent(from) == to) return up_[from];
  if (tree_->parent(to) == from) return down_[to];
  throw InvalidInput("hitting kernel: " + vid(from) + " and " + vid(to) + " are not adjacent");
}

Rational HittingKernel::operator()(VertexId x, VertexId y) const {
  const Tree& t = *tree_;
  VertexId top = lowest_common_ancestor(t, x, y);
  Rational value = 1;
  for (VertexId v = x; v != top; v = t.parent(v)) value *= up_[v];
  for (VertexId v = y; v != top; v = t.parent(v)) value *= down_[v];
  return value;
}

VertexVector HittingKernel::from(VertexId x) const {
  const Tree& t = *tree_;
  VertexVector out(t.size(), Rational(0));
  out.at(x) = 1;
  // Ancestors of x first; every other vertex is entered from its parent.
  for (VertexId v = x; t.parent(v) != kNoVertex; v = t.parent(v)) out[t.parent(v)] = out[v] * up_[v];
  for (VertexId v : t.preorder()) {
    if (v == t.root() || t.is_ancestor_or_self(v, x)) continue;
    out[v] = out[t.parent(v)] * down_[v];
  }
  return out;
}

VertexVector HittingKernel::to(VertexId y) const {
  const Tree& t = *tree_;
  VertexVector out(t.size(), Rational(0));
  out.at(y) = 1;
  // F(x,y) = F(x, next) F(next, y), next being the neighbour of x towards y.
  for (VertexId v = y; t.parent(v) != kNoVertex; v = t.parent(v)) out[t.parent(v)] = down_[v] * out[v];
  for (VertexId v : t.preorder()) {
    if (v == t.root() || t.is_ancestor_or_self(v, y)) continue;
    out[v] = up_[v] * out[t.parent(v)];
  }
  return out;
}

HittingKernel compute_F(const Walk& walk) {
  const Tree& t = walk.tree();
  const std::size_t n = t.size();
  std::vector<Rational> up(n, Rational(0)), down(n, Rational(0));

  const auto& order = t.preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    VertexId x = *it;
    if (x == t.root() || t.is_leaf(x)) continue;
    Rational loop = 0;
    for (VertexId c : t.children(x)) loop += walk.to_child(c) * up[c];
    up[x] = walk.to_parent(x) / (1 - loop);
  }

  for (VertexId x : t.interior()) {
    // Probability of leaving x towards some neighbour z and coming back.
    Rational back = 0;
    if (t.parent(x) != kNoVertex) back += walk.to_parent(x) * down[x];
    for (VertexId c : t.children(x)) back += walk.to_child(c) * up[c];
    for (VertexId c : t.children(x)) {
      Rational others = back - walk.to_child(c) * up[c];
      down[c] = walk.to_child(c) / (1 - others);
    }
  }
  return HittingKernel(walk.shared_tree(), std::move(up), std::move(down));
}

GreenKernel compute_UG(const Walk& walk, const HittingKernel& F) {
  const Tree& t = walk.tree();
  GreenKernel out{std::vector<Rational>(t.size(), Rational(0)), std::vector<Rational>(t.size(), Rational(1))};
  for (VertexId x : t.interior()) {
    Rational u = 0;
    if (t.parent(x) != kNoVertex) u += walk.to_parent(x) * F.down(x);
    for (VertexId c : t.children(x)) u += walk.to_child(c) * F.up(c);
    if (u >= 1) throw VerificationFailure("return probability at vertex " + vid(x) + " is not below 1");
    out.return_probability[x] = u;
    out.diagonal[x] = 1 / (1 - u);
  }
  return out;
}

ReversibleMeasure reversible_measure(const Walk& walk) {
  const Tree& t = walk.tree();
  ReversibleMeasure out{std::vector<Rational>(t.size(), Rational(0)), std::vector<Rational>(t.size(), Rational(0))};
  out.m[t.root()] = 1;
  for (VertexId x : t.interior()) {
    for (VertexId c : t.children(x)) {
      out.conductance[c] = out.m[x] * walk.to_child(c);
      if (!t.is_leaf(c)) out.m[c] = out.conductance[c] / walk.to_parent(c);
    }
  }
  return out;
}

WalkKernels::WalkKernels(const Walk& walk)
    : F_(compute_F(walk)), green_(compute_UG(walk, F_)), measure_(reversible_measure(walk)) {}

WalkKernels WalkKernels::with_corrupted_green(VertexId x, const Rational& delta) const {
  WalkKernels out = *this;
  out.green_.diagonal.at(x) += delta;
  return out;
}

// ---------------------------------------------------------------------------
// Boundary quantities

LeafVector limit_distribution(const Walk& walk, const WalkKernels& kernels, VertexId x) {
  const Tree& t = walk.tree();
  VertexVector row = kernels.F().from(x);
  LeafVector nu(t.leaf_count());
  for (std::size_t i = 0; i < nu.size(); ++i) nu[i] = row[t.leaves()[i]];
  return nu;
}

Rational harmonic_measure_of_branch(const Walk& walk, const WalkKernels& kernels, VertexId x, VertexId y) {
  const Tree& t = walk.tree();
  if (y == t.root()) throw InvalidInput("branch formula needs a non-root target");
  const Rational& up = kernels.F().up(y);      // F(y, y⁻)
  const Rational& down = kernels.F().down(y);  // F(y⁻, y)
  Rational denom = 1 - down * up;
  if (x == y || !t.is_ancestor_or_self(y, x)) return kernels.F(x, y) * (1 - up) / denom;
  return 1 - kernels.F(x, y) * (up - down * up) / denom;
}

VertexVector poisson_transform(const Walk& walk, const WalkKernels& kernels, const LeafVector& u) {
  const Tree& t = walk.tree();
  if (u.size() != t.leaf_count()) throw InvalidInput("poisson transform: function must have one value per leaf");
  const auto& F = kernels.F();
  // inside[x] = Σ_{l below x} u(l) F(x,l); the walk may leave T_x and return.
  VertexVector inside(t.size(), Rational(0));
  const auto& order = t.preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    VertexId x = *it;
    if (t.is_leaf(x)) {
      inside[x] = u[t.leaf_index(x)];
      continue;
    }
    for (VertexId c : t.children(x)) inside[x] += F.down(c) * inside[c];
  }
  VertexVector h(t.size());
  h[t.root()] = inside[t.root()];
  for (VertexId x : order) {
    if (x == t.root()) continue;
    VertexId p = t.parent(x);
    // Leaves outside T_x are reached only through p.
    h[x] = inside[x] + F.up(x) * (h[p] - F.down(x) * inside[x]);
  }
  return h;
}

Rational dirichlet_form_tree(const Tree& tree, const VertexVector& f, const VertexVector& g,
                             const std::vector<Rational>& conductance) {
  if (f.size() != tree.size() || g.size() != tree.size()) {
    throw InvalidInput("dirichlet form: functions must have one value per vertex");
  }
  Rational sum = 0;
  for (VertexId x = 0; x < tree.size(); ++x) {
    if (x == tree.root()) continue;
    VertexId p = tree.parent(x);
    sum += (f[x] - f[p]) * (g[x] - g[p]) * conductance.at(x);
  }
  return sum;
}

VertexVector green_function_column(const Walk& walk, const WalkKernels& kernels, VertexId x0) {
  if (walk.tree().is_leaf(x0)) throw InvalidInput("green column: vertex " + vid(x0) + " is a leaf");
  VertexVector g = kernels.F().to(x0);
  for (auto& v : g) v *= kernels.G_diag(x0);
  return g;
}

// ---------------------------------------------------------------------------
// Identity report

std::size_t IdentityReport::failures() const {
  return static_cast<std::size_t>(std::count_if(checks.begin(), checks.end(), [](const auto& c) { return !c.pass; }));
}

IdentityReport check_kernel_identities(const Walk& walk, const WalkKernels& k) {
  const Tree& t = walk.tree();
  const auto& F = k.F();
  const VertexId o = t.root();
  IdentityReport report;
  auto add = [&](std::string name, std::vector<VertexId> at, Rational lhs, Rational rhs) {
    bool pass = lhs == rhs;
    report.checks.push_back({std::move(name), std::move(at), std::move(lhs), std::move(rhs), pass});
  };

  for (VertexId x : t.interior()) {
    add("green_return", {x}, k.G_diag(x) * (1 - k.U(x)), Rational(1));

    Rational u = 0, diag = 1;
    for (VertexId y : t.neighbours(x)) {
      const Rational& fxy = F.step(x, y);
      Rational fyx = t.is_leaf(y) ? Rational(0) : F.step(y, x);
      u += walk.p(x, y) * fyx;
      diag += fxy * fyx / (1 - fxy * fyx);
      add("green_edge", {x, y}, k.G_diag(x) * walk.p(x, y), fxy / (1 - fxy * fyx));
    }
    add("return_first_step", {x}, k.U(x), u);
    add("green_diagonal", {x}, k.G_diag(x), diag);
  }

  // Columns G(·,y) must solve the first-step equations P g = g − 1_y, and
  // F(·,y) must be harmonic away from y with F(y,y) = 1.
  for (VertexId y = 0; y < t.size(); ++y) {
    VertexVector f = F.to(y);
    VertexVector pf = walk.apply(f);
    for (VertexId x : t.interior()) {
      if (x != y) add("hitting_multiplicative", {x, y}, pf[x], f[x]);
    }
    if (t.is_leaf(y)) continue;
    VertexVector g = f;
    for (auto& v : g) v *= k.G_diag(y);
    VertexVector pg = walk.apply(g);
    for (VertexId x : t.interior()) {
      add("green_factorization", {x, y}, pg[x], g[x] - (x == y ? 1 : 0));
    }
  }

  LeafVector nu_o = limit_distribution(walk, k, o);
  {
    Rational total = 0;
    for (const auto& v : nu_o) total += v;
    add("limit_distribution_total", {o}, total, Rational(1));
  }
  for (VertexId x : t.preorder()) {
    if (x == o) continue;
    VertexId xm = t.parent(x);
    const Rational f_up = F.up(x);
    Rational q = branch_mass(t, nu_o, x) / F(o, xm);
    add("hitting_from_measure", {xm, x}, F.down(x), q / (1 - f_up + f_up * q));

    // Starting points covering both cases of the branch formula.
    std::vector<VertexId> starts{o};
    if (!t.is_leaf(x)) {
      starts.push_back(x);
      for (VertexId c : t.children(x))
        if (!t.is_leaf(c)) starts.push_back(c);
    }
    for (VertexId s : starts) {
      add("branch_measure", {s, x}, branch_mass(t, limit_distribution(walk, k, s), x),
          harmonic_measure_of_branch(walk, k, s, x));
    }

    if (t.is_leaf(x)) continue;
    add("return_below_one", {x}, f_up, Rational(1));
    report.checks.back().pass = f_up < 1;
    add("branch_exit", {x}, branch_mass(t, limit_distribution(walk, k, x), x),
        1 - walk.to_parent(x) * (k.G_diag(x) - k.G(xm, x)));
  }

  for (VertexId x : t.interior()) {
    VertexVector row = F.from(x);
    for (VertexId y : t.interior()) {
      if (y <= x) continue;
      add("green_reversibility", {x, y}, k.m(x) * row[y] * k.G_diag(y), k.m(y) * k.G(y, x));
    }
  }
  return report;
}

}  // namespace ultra
