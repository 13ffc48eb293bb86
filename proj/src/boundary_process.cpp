#include "ultra/boundary_process.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace ultra {

namespace {

std::string vid(VertexId v) { return std::to_string(v); }

// Root-to-parent path of a leaf: x_0 = root, …, x_{k−1} = parent(leaf).
std::vector<VertexId> interior_path(const Tree& tree, VertexId leaf) {
  std::vector<VertexId> path;
  for (VertexId v = tree.parent(leaf); v != kNoVertex; v = tree.parent(v)) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

template <class T>
std::vector<T> subtree_sums(const Tree& tree, const std::vector<T>& leaf_values) {
  std::vector<T> mass(tree.size(), T(0));
  const auto& order = tree.preorder();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    VertexId v = *it;
    if (tree.is_leaf(v)) {
      mass[v] = leaf_values[tree.leaf_index(v)];
    } else {
      for (VertexId c : tree.children(v)) mass[v] += mass[c];
    }
  }
  return mass;
}

// Operator Σ_n c_n P_{φ(x_n)} + c_atom I from level(x) = F(φ(x))^t on interior
// vertices.
template <class T>
BoundaryOperator<T> assemble(const Tree& tree, const std::vector<T>& level, const std::vector<T>& mu) {
  const std::size_t L = tree.leaf_count();
  std::vector<T> mass = subtree_sums(tree, mu);
  BoundaryOperator<T> op{tree.leaves(), std::vector<std::vector<T>>(L, std::vector<T>(L, T(0)))};
  for (std::size_t i = 0; i < L; ++i) {
    VertexId xi = tree.leaves()[i];
    std::vector<VertexId> path = interior_path(tree, xi);
    auto& row = op.entries[i];
    T cumulative = T(0);
    T previous = T(1);
    for (std::size_t n = 0; n < path.size(); ++n) {
      VertexId x = path[n];
      T c = previous - level[x];
      previous = level[x];
      cumulative += c / mass[x];
      VertexId below = n + 1 < path.size() ? path[n + 1] : xi;
      auto [lo, hi] = tree.leaf_range(x);
      auto [blo, bhi] = tree.leaf_range(below);
      for (std::size_t j = lo; j < hi; ++j) {
        if (j >= blo && j < bhi) continue;
        row[j] = mu[j] * cumulative;
      }
    }
    row[i] = mu[i] * cumulative + previous;
  }
  return op;
}

std::vector<double> to_doubles(const LeafVector& values) {
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = to_double(values[i]);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// SigmaMeasure

SigmaMeasure SigmaMeasure::standard() { return SigmaMeasure(); }

SigmaMeasure SigmaMeasure::tabulated(std::vector<Step> steps) {
  if (steps.empty()) throw InvalidInput("sigma: empty table");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const Step& s = steps[i];
    if (s.radius <= 0) throw InvalidInput("sigma: non-positive radius " + format_rational(s.radius));
    if (!(s.value >= 0 && s.value <= 1)) {
      throw InvalidInput("sigma: value at radius " + format_rational(s.radius) + " outside [0, 1]");
    }
    if (i > 0) {
      if (s.radius <= steps[i - 1].radius) throw InvalidInput("sigma: radii not strictly increasing");
      bool decreasing = s.exact && steps[i - 1].exact ? *s.exact < *steps[i - 1].exact : s.value < steps[i - 1].value;
      if (decreasing) throw InvalidInput("sigma: decreasing at radius " + format_rational(s.radius));
    }
  }
  SigmaMeasure out;
  out.kind_ = Kind::Tabulated;
  out.steps_ = std::move(steps);
  return out;
}

SigmaMeasure SigmaMeasure::tabulated(const std::vector<std::pair<Rational, Rational>>& cdf) {
  std::vector<Step> steps;
  for (const auto& [r, c] : cdf) {
    if (c < 0 || c > 1) throw InvalidInput("sigma: value " + format_rational(c) + " outside [0, 1]");
    steps.push_back(Step{r, to_double(c), c});
  }
  return tabulated(std::move(steps));
}

double SigmaMeasure::cdf(const Rational& r) const {
  if (kind_ == Kind::Standard) return standard_cdf(to_double(r));
  if (r <= steps_.front().radius / 2) return 0;
  for (const Step& s : steps_) {
    if (r <= s.radius) return s.value;
  }
  return 1;
}

double SigmaMeasure::log_cdf(const Rational& r) const {
  if (kind_ == Kind::Standard) return -1.0 / to_double(r);
  return std::log(cdf(r));
}

std::optional<Rational> SigmaMeasure::exact_cdf(const Rational& r) const {
  if (kind_ == Kind::Standard) return std::nullopt;
  if (r <= steps_.front().radius / 2) return Rational(0);
  for (const Step& s : steps_) {
    if (r <= s.radius) return s.exact;
  }
  return Rational(1);
}

SigmaMeasure::Radius SigmaMeasure::quantile(double u) const {
  if (kind_ == Kind::Standard) return Radius{false, Rational(0), -1.0 / std::log(u)};
  if (u <= steps_.front().value) return Radius{true, steps_.front().radius / 2, 0};
  for (std::size_t i = 1; i < steps_.size(); ++i) {
    if (u <= steps_[i].value) return Radius{true, steps_[i - 1].radius, 0};
  }
  return Radius{true, steps_.back().radius, 0};
}

// ---------------------------------------------------------------------------
// Specs

void check_sigma_strict(const Tree& tree, const UltrametricElement& phi, const SigmaMeasure& sigma) {
  if (sigma.kind() == SigmaMeasure::Kind::Standard) return;
  auto value = [&](VertexId x) { return sigma.cdf(phi(x)); };
  for (VertexId x : tree.interior()) {
    double f = value(x);
    if (!(f > 0 && f < 1)) {
      throw InvalidInput("sigma: F(phi(" + vid(x) + ")) = " + std::to_string(f) + " is not in (0, 1)");
    }
    VertexId p = tree.parent(x);
    if (p == kNoVertex) continue;
    auto ex = sigma.exact_cdf(phi(x));
    auto ep = sigma.exact_cdf(phi(p));
    bool increasing = ex && ep ? *ex < *ep : f < value(p);
    if (!increasing) {
      throw InvalidInput("sigma: not strictly increasing between vertex " + vid(x) + " and its parent " + vid(p));
    }
  }
}

JumpProcessSpec JumpProcessSpec::validate(Tree tree, UltrametricElement phi, BoundaryMeasure mu, SigmaMeasure sigma,
                                          bool strict) {
  if (phi.values().size() != tree.size()) throw InvalidInput("spec: element does not match the tree");
  if (mu.size() != tree.leaf_count()) throw InvalidInput("spec: measure does not match the tree");
  if (strict) check_sigma_strict(tree, phi, sigma);
  return JumpProcessSpec{std::move(tree), std::move(phi), std::move(mu), std::move(sigma)};
}

// ---------------------------------------------------------------------------
// Operators

ExactOperator averaging_operator(const Tree& tree, const UltrametricElement& phi, const BoundaryMeasure& mu,
                                 const Rational& radius) {
  if (radius <= 0) throw InvalidInput("averaging operator: radius must be positive");
  const std::size_t L = tree.leaf_count();
  VertexVector mass = mu.branch_masses(tree);
  ExactOperator op{tree.leaves(), std::vector<std::vector<Rational>>(L, std::vector<Rational>(L, Rational(0)))};
  for (std::size_t i = 0; i < L; ++i) {
    VertexId x = ball(tree, phi, tree.leaves()[i], radius);
    auto [lo, hi] = tree.leaf_range(x);
    for (std::size_t j = lo; j < hi; ++j) op.entries[i][j] = mu[j] / mass[x];
  }
  return op;
}

RealOperator semigroup_operator(const JumpProcessSpec& spec, double t) {
  if (!(t > 0)) throw InvalidInput("semigroup: t must be positive");
  check_sigma_strict(spec.tree, spec.phi, spec.sigma);
  std::vector<double> level(spec.tree.size(), 0.0);
  for (VertexId x : spec.tree.interior()) level[x] = std::exp(t * spec.sigma.log_cdf(spec.phi(x)));
  return assemble(spec.tree, level, to_doubles(spec.mu.weights()));
}

RealOperator semigroup_operator(const Tree& tree, const RealUltrametricElement& phi, const BoundaryMeasure& mu,
                                double t) {
  if (!(t > 0)) throw InvalidInput("semigroup: t must be positive");
  std::vector<double> level(tree.size(), 0.0);
  for (VertexId x : tree.interior()) level[x] = std::exp(-t / phi(x));
  return assemble(tree, level, to_doubles(mu.weights()));
}

RealOperator one_step_operator(const JumpProcessSpec& spec) {
  std::vector<double> level(spec.tree.size(), 0.0);
  for (VertexId x : spec.tree.interior()) level[x] = spec.sigma.cdf(spec.phi(x));
  return assemble(spec.tree, level, to_doubles(spec.mu.weights()));
}

ExactOperator semigroup_operator_exact(const JumpProcessSpec& spec, unsigned t) {
  if (t == 0) throw InvalidInput("semigroup: t must be positive");
  check_sigma_strict(spec.tree, spec.phi, spec.sigma);
  VertexVector level(spec.tree.size(), Rational(0));
  for (VertexId x : spec.tree.interior()) {
    auto f = spec.sigma.exact_cdf(spec.phi(x));
    if (!f) throw InvalidInput("semigroup: no exact CDF value at phi(" + vid(x) + ")");
    Rational p = 1;
    for (unsigned k = 0; k < t; ++k) p *= *f;
    level[x] = p;
  }
  return assemble(spec.tree, level, spec.mu.weights());
}

RealUltrametricElement standardize(const Tree& tree, const UltrametricElement& phi, const SigmaMeasure& sigma) {
  check_sigma_strict(tree, phi, sigma);
  std::vector<double> out(tree.size(), 0.0);
  for (VertexId x : tree.interior()) out[x] = -1.0 / sigma.log_cdf(phi(x));
  return RealUltrametricElement(tree, std::move(out));
}

SigmaMeasure sigma_for_phi(const Tree& tree, const UltrametricElement& phi_target, const WalkKernels& kernels) {
  std::vector<VertexId> order = tree.interior();
  std::vector<Rational> g(tree.size());
  for (VertexId x : order) g[x] = kernels.G(x, tree.root());
  std::sort(order.begin(), order.end(), [&](VertexId x, VertexId y) {
    if (phi_target(x) != phi_target(y)) return phi_target(x) < phi_target(y);
    return g[x] < g[y];
  });
  std::vector<SigmaMeasure::Step> steps;
  for (std::size_t i = 0; i < order.size(); ++i) {
    VertexId x = order[i];
    if (i > 0) {
      VertexId y = order[i - 1];
      bool same_phi = phi_target(x) == phi_target(y);
      if (same_phi != (g[x] == g[y])) {
        throw InvalidInput("sigma_for_phi: equipotential violation at vertices " + vid(y) + " and " + vid(x));
      }
      if (same_phi) continue;
      if (g[x] < g[y]) {
        throw InvalidInput("sigma_for_phi: ordering of phi and G(., o) disagrees at vertices " + vid(y) + " and " +
                           vid(x));
      }
    }
    steps.push_back({phi_target(x), std::exp(-1.0 / to_double(g[x])), std::nullopt});
  }
  return SigmaMeasure::tabulated(std::move(steps));
}

// ---------------------------------------------------------------------------
// Kernels and forms

Rational ConfluentKernel::operator()(VertexId xi, VertexId eta) const {
  if (!tree_->is_leaf(xi) || !tree_->is_leaf(eta)) throw InvalidInput("kernel: arguments must be leaves");
  if (xi == eta) throw InvalidInput("kernel: undefined on the diagonal");
  return by_confluent_[confluent(*tree_, xi, eta, base_)];
}

ConfluentKernel j_kernel(const Tree& tree, const UltrametricElement& phi, const BoundaryMeasure& mu) {
  VertexVector mass = mu.branch_masses(tree);
  VertexVector j(tree.size(), Rational(0));
  for (VertexId x : tree.interior()) {
    VertexId p = tree.parent(x);
    if (p == kNoVertex) {
      j[x] = 1 / phi(x);
    } else {
      j[x] = j[p] + (1 / phi(x) - 1 / phi(p)) / mass[x];
    }
  }
  return ConfluentKernel(std::make_shared<const Tree>(tree), tree.root(), std::move(j));
}

Rational j_kernel(const Tree& tree, const UltrametricElement& phi, const BoundaryMeasure& mu, VertexId xi,
                  VertexId eta) {
  if (xi == eta) throw InvalidInput("j_kernel: undefined on the diagonal");
  return j_kernel(tree, phi, mu)(xi, eta);
}

Rational boundary_dirichlet_form(const LeafVector& u, const LeafVector& v, const ConfluentKernel& kernel,
                                 const LeafVector& mu) {
  const auto& leaves = kernel.tree().leaves();
  Rational sum = 0;
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    for (std::size_t j = i + 1; j < leaves.size(); ++j) {
      sum += (u[i] - u[j]) * (v[i] - v[j]) * kernel(leaves[i], leaves[j]) * mu[i] * mu[j];
    }
  }
  return sum;
}

GroupedBoundaryForm::GroupedBoundaryForm(const ConfluentKernel& kernel, const LeafVector& mu)
    : tree_(&kernel.tree()), mu_(mu) {
  const Tree& tree = *tree_;
  if (kernel.base() != tree.root()) throw InvalidInput("grouped form: kernel must be based at the root");
  mass_ = subtree_sums(tree, mu_);
  increment_.assign(tree.size(), Rational(0));
  for (VertexId c : tree.interior()) {
    VertexId p = tree.parent(c);
    increment_[c] = kernel.at_confluent(c) - (p == kNoVertex ? Rational(0) : kernel.at_confluent(p));
  }
}

GroupedBoundaryForm::Prepared GroupedBoundaryForm::prepare(const LeafVector& u) const {
  Prepared out;
  out.weighted.resize(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out.weighted[i] = u[i] * mu_[i];
  out.sums = subtree_sums(*tree_, out.weighted);
  return out;
}

Rational GroupedBoundaryForm::operator()(const Prepared& u, const Prepared& v, const LeafVector& v_values) const {
  const Tree& tree = *tree_;
  LeafVector w(v_values.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = u.weighted[i] * v_values[i];
  VertexVector W = subtree_sums(tree, w);
  Rational sum = 0;
  for (VertexId c : tree.interior()) {
    sum += increment_[c] * (W[c] * mass_[c] - u.sums[c] * v.sums[c]);
  }
  return sum;
}

Rational boundary_dirichlet_form_grouped(const LeafVector& u, const LeafVector& v, const ConfluentKernel& kernel,
                                         const LeafVector& mu) {
  GroupedBoundaryForm form(kernel, mu);
  return form(form.prepare(u), form.prepare(v), v);
}

ExactOperator generator_matrix(const ConfluentKernel& kernel, const LeafVector& mu) {
  const auto& leaves = kernel.tree().leaves();
  const std::size_t L = leaves.size();
  ExactOperator op{leaves, std::vector<std::vector<Rational>>(L, std::vector<Rational>(L, Rational(0)))};
  for (std::size_t i = 0; i < L; ++i) {
    for (std::size_t j = 0; j < L; ++j) {
      if (i == j) continue;
      Rational rate = kernel(leaves[i], leaves[j]) * mu[j];
      op.entries[i][j] = -rate;
      op.entries[i][i] += rate;
    }
  }
  return op;
}

double semigroup_generator_gap(const JumpProcessSpec& spec, double t) {
  const Tree& tree = spec.tree;
  RealUltrametricElement phi = standardize(tree, spec.phi, spec.sigma);
  std::vector<double> mu = to_doubles(spec.mu.weights());
  std::vector<double> mass = subtree_sums(tree, mu);
  std::vector<double> j(tree.size(), 0.0);
  for (VertexId x : tree.interior()) {
    VertexId p = tree.parent(x);
    j[x] = p == kNoVertex ? 1 / phi(x) : j[p] + (1 / phi(x) - 1 / phi(p)) / mass[x];
  }
  const auto& leaves = tree.leaves();
  const auto L = static_cast<Eigen::Index>(leaves.size());
  // D^{1/2} Λ D^{−1/2} is symmetric since μ(ξ)Λ[ξ][η] = μ(η)Λ[η][ξ].
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(L, L);
  for (Eigen::Index a = 0; a < L; ++a) {
    for (Eigen::Index b = 0; b < L; ++b) {
      if (a == b) continue;
      double rate = j[lowest_common_ancestor(tree, leaves[a], leaves[b])];
      S(a, b) = -rate * std::sqrt(mu[a] * mu[b]);
      S(a, a) += rate * mu[b];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
  Eigen::VectorXd decay = (-t * eig.eigenvalues().array()).exp();
  Eigen::MatrixXd E = eig.eigenvectors() * decay.asDiagonal() * eig.eigenvectors().transpose();
  RealOperator P = semigroup_operator(spec, t);
  double gap = 0;
  for (Eigen::Index a = 0; a < L; ++a) {
    for (Eigen::Index b = 0; b < L; ++b) {
      double e = E(a, b) * std::sqrt(mu[b] / mu[a]);
      gap = std::max(gap, std::abs(e - P.entries[a][b]));
    }
  }
  return gap;
}

}  // namespace ultra
