#include "ultra/duality.hpp"

#include "ultra/rng.hpp"

namespace ultra {

namespace {

std::string vid(VertexId v) { return std::to_string(v); }

std::string pair_label(VertexId a, VertexId b) { return "(" + vid(a) + "," + vid(b) + ")"; }

// F̃(x,y)F̃(y,x) for adjacent x, y.
Rational round_trip(const HittingKernel& F, VertexId x, VertexId y) { return F.step(x, y) * F.step(y, x); }

// v = num / den with den the lcm of the denominators.
struct Scaled {
  std::vector<mpz_class> num;
  mpz_class den = 1;
};

Scaled scale(const std::vector<Rational>& v) {
  Scaled s;
  for (const Rational& q : v) mpz_lcm(s.den.get_mpz_t(), s.den.get_mpz_t(), q.get_den_mpz_t());
  s.num.reserve(v.size());
  for (const Rational& q : v) s.num.push_back(q.get_num() * (s.den / q.get_den()));
  return s;
}

std::vector<mpz_class> prefix_sums(const std::vector<mpz_class>& v) {
  std::vector<mpz_class> out(v.size() + 1, mpz_class(0));
  for (std::size_t i = 0; i < v.size(); ++i) out[i + 1] = out[i] + v[i];
  return out;
}

}  // namespace

DualityResult walk_to_process(const Walk& walk, const WalkKernels& kernels) {
  const Tree& tree = walk.tree();
  std::vector<Rational> phi(tree.size(), Rational(0));
  for (VertexId x : tree.interior()) phi[x] = kernels.G(x, tree.root());
  return DualityResult{UltrametricElement(tree, std::move(phi)),
                       BoundaryMeasure::validate(tree, limit_distribution(walk, kernels, tree.root()))};
}

// ---------------------------------------------------------------------------
// Reconstruction

ReconstructionTrace process_to_walk(const Tree& tree, const UltrametricElement& phi, const BoundaryMeasure& mu) {
  const std::size_t n = tree.size();
  const VertexId o = tree.root();
  if (phi.values().size() != n || mu.size() != tree.leaf_count()) {
    throw InvalidInput("process_to_walk: element or measure does not match the tree");
  }
  VertexVector mass = mu.branch_masses(tree);

  // φ vanishes at leaves, so leaves never return: F̃(leaf, parent) = 0.
  std::vector<Rational> up(n, Rational(0)), down(n, Rational(0));
  VertexVector from_root(n, Rational(0));
  from_root[o] = 1;
  for (VertexId x : tree.preorder()) {
    if (x == o) continue;
    VertexId p = tree.parent(x);
    up[x] = phi(x) / phi(p);
    Rational q = mass[x] / from_root[p];
    down[x] = q / (1 - up[x] + up[x] * q);
    from_root[x] = from_root[p] * down[x];
    if (!(down[x] > 0 && down[x] <= 1)) {
      throw VerificationFailure("process_to_walk: F(" + vid(p) + "," + vid(x) + ") = " + format_rational(down[x]) +
                                " outside (0, 1]");
    }
    Rational remass = from_root[p] * down[x] * (1 - up[x]) / (1 - up[x] * down[x]);
    if (remass != mass[x] || !(mass[x] <= from_root[x] && from_root[x] <= 1)) {
      throw VerificationFailure("process_to_walk: measure recursion fails at vertex " + vid(x));
    }
  }
  HittingKernel wtF(std::make_shared<const Tree>(tree), std::move(up), std::move(down));

  Rational C = 1 / phi(o);
  for (VertexId x : tree.children(o)) C += (phi(x) / phi(o)) / (phi(o) - phi(x)) * mass[x];

  VertexVector green(n, Rational(0));
  Walk::Table table;
  for (VertexId x : tree.interior()) {
    Rational g = 1;
    for (VertexId y : tree.neighbours(x)) {
      Rational ff = round_trip(wtF, x, y);
      g += ff / (1 - ff);
    }
    green[x] = g;
    Rational row = 0;
    for (VertexId y : tree.neighbours(x)) {
      Rational p = wtF.step(x, y) / (g * (1 - round_trip(wtF, x, y)));
      table[x][y] = p;
      row += p;
    }
    if (row != 1) throw VerificationFailure("process_to_walk: row " + vid(x) + " sums to " + format_rational(row));
  }
  if (green[o] != C * phi(o)) {
    throw VerificationFailure("process_to_walk: G(o,o) = " + format_rational(green[o]) + " but C*phi(o) = " +
                              format_rational(C * phi(o)));
  }

  Walk walk = [&] {
    try {
      return validate_walk(tree, table);
    } catch (const InvalidInput& e) {
      throw VerificationFailure(std::string("process_to_walk: reconstructed walk rejected: ") + e.what());
    }
  }();
  WalkKernels kernels(walk);
  for (VertexId x : tree.interior()) {
    if (kernels.G(x, o) != C * phi(x)) {
      throw VerificationFailure("process_to_walk: G(" + vid(x) + ",o) differs from C*phi");
    }
  }
  if (limit_distribution(walk, kernels, o) != mu.weights()) {
    throw VerificationFailure("process_to_walk: limit distribution differs from mu");
  }
  return ReconstructionTrace{C, std::move(wtF), std::move(green), std::move(walk)};
}

GreenColumnCheck check_reconstructed_green_column(const ReconstructionTrace& trace, VertexId x0) {
  const Tree& tree = trace.walk.tree();
  if (tree.is_leaf(x0)) throw InvalidInput("green column: x0 must be interior");
  VertexVector g = trace.wtF.to(x0);
  for (auto& v : g) v *= trace.wtG_diag[x0];
  VertexVector pg = trace.walk.apply(g);
  GreenColumnCheck out;
  for (VertexId x : tree.interior()) {
    out.applied.push_back(pg[x]);
    out.expected.push_back(x == x0 ? g[x] - 1 : g[x]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Naïm kernel and forms

ConfluentKernel naim_kernel(const Walk& walk, const WalkKernels& kernels, VertexId base) {
  const Tree& tree = walk.tree();
  if (base >= tree.size() || tree.is_leaf(base)) throw InvalidInput("naim_kernel: base must be interior");
  VertexVector out_of = kernels.F().from(base), into = kernels.F().to(base);
  VertexVector theta(tree.size(), Rational(0));
  Rational scale = kernels.m(base) / kernels.G_diag(base);
  for (VertexId c : tree.interior()) theta[c] = scale / (out_of[c] * into[c]);
  return ConfluentKernel(walk.shared_tree(), base, std::move(theta));
}

Rational naim_kernel(const Walk& walk, const WalkKernels& kernels, VertexId base, VertexId xi, VertexId eta) {
  if (xi == eta) throw InvalidInput("naim_kernel: undefined on the diagonal");
  return naim_kernel(walk, kernels, base)(xi, eta);
}

Rational hd_form(const Walk& walk, const WalkKernels& kernels, const LeafVector& u, const LeafVector& v) {
  return dirichlet_form_tree(walk.tree(), poisson_transform(walk, kernels, u), poisson_transform(walk, kernels, v),
                             kernels.conductances());
}

// ---------------------------------------------------------------------------
// Reports

void CheckReport::add(std::string location, Rational lhs, Rational rhs) {
  ++checks;
  bool pass = lhs == rhs;
  if (!pass) ++failure_count;
  if (!pass || record_all) entries.push_back(Comparison{std::move(location), std::move(lhs), std::move(rhs), pass});
}

void CheckReport::merge(const CheckReport& other) {
  instances += other.instances;
  checks += other.checks;
  failure_count += other.failure_count;
  entries.insert(entries.end(), other.entries.begin(), other.entries.end());
}

std::vector<TestFunction> doob_naim_functions(const Tree& tree, std::size_t random_count, std::uint64_t seed) {
  std::vector<TestFunction> out;
  for (VertexId x = 0; x < tree.size(); ++x) {
    LeafVector u(tree.leaf_count(), Rational(0));
    auto [lo, hi] = tree.leaf_range(x);
    for (std::size_t i = lo; i < hi; ++i) u[i] = 1;
    out.push_back({"1[T_" + vid(x) + "]", std::move(u)});
  }
  Xoshiro256 rng(seed);
  for (std::size_t k = 0; k < random_count; ++k) {
    LeafVector u(tree.leaf_count());
    for (auto& v : u) {
      long num = static_cast<long>(rng.below(101)) - 50;
      long den = static_cast<long>(rng.below(12)) + 1;
      v = ratio(num, den);
    }
    out.push_back({"random_" + std::to_string(k), std::move(u)});
  }
  return out;
}

CheckReport check_doob_naim(const Walk& walk, const WalkKernels& kernels, const std::vector<TestFunction>& functions,
                            PairSelection pairs, bool record_all) {
  const Tree& tree = walk.tree();
  const VertexId o = tree.root();
  CheckReport report;
  report.theorem = "doob-naim";
  report.record_all = record_all;

  // Both sides run on integers over one denominator per vector, so a pair
  // costs integer multiply-adds and a single reduction at the end.
  Scaled a = scale(kernels.conductances());

  Scaled nu = scale(limit_distribution(walk, kernels, o));
  ConfluentKernel theta = naim_kernel(walk, kernels, o);
  VertexVector increment(tree.size(), Rational(0));
  for (VertexId c : tree.interior()) {
    VertexId p = tree.parent(c);
    increment[c] = theta.at_confluent(c) - (p == kNoVertex ? Rational(0) : theta.at_confluent(p));
  }
  Scaled inc = scale(increment);
  std::vector<mpz_class> nu_prefix = prefix_sums(nu.num);
  std::vector<mpz_class> inc_mass(tree.size());
  for (VertexId c : tree.interior()) {
    auto [lo, hi] = tree.leaf_range(c);
    inc_mass[c] = inc.num[c] * (nu_prefix[hi] - nu_prefix[lo]);
  }

  struct Side {
    Scaled diff;                        // h_u(x) − h_u(x⁻)
    std::vector<mpz_class> weighted;    // the same times a(x⁻, x)
    Scaled values;                      // u
    std::vector<mpz_class> u_nu;        // u(ξ) ν(ξ)
    std::vector<mpz_class> sums;        // Σ_{ξ ∈ ∂T_c} u ν
    std::vector<mpz_class> inc_sums;    // the same times increment(c)
    bool random;
  };
  std::vector<Side> sides;
  sides.reserve(functions.size());
  for (const TestFunction& f : functions) {
    Side s;
    s.random = f.name.rfind("1[", 0) != 0;
    VertexVector h = poisson_transform(walk, kernels, f.values);
    VertexVector diff(tree.size(), Rational(0));
    for (VertexId x = 0; x < tree.size(); ++x)
      if (x != o) diff[x] = h[x] - h[tree.parent(x)];
    s.diff = scale(diff);
    s.weighted.resize(tree.size());
    for (VertexId x = 0; x < tree.size(); ++x) s.weighted[x] = s.diff.num[x] * a.num[x];

    s.values = scale(f.values);
    s.u_nu.resize(f.values.size());
    for (std::size_t i = 0; i < f.values.size(); ++i) s.u_nu[i] = s.values.num[i] * nu.num[i];
    std::vector<mpz_class> prefix = prefix_sums(s.u_nu);
    s.sums.resize(tree.size());
    s.inc_sums.resize(tree.size());
    for (VertexId c : tree.interior()) {
      auto [lo, hi] = tree.leaf_range(c);
      s.sums[c] = prefix[hi] - prefix[lo];
      s.inc_sums[c] = inc.num[c] * s.sums[c];
    }
    sides.push_back(std::move(s));
  }

  const mpz_class nu_sq = nu.den * nu.den;
  std::vector<mpz_class> w_prefix(tree.leaf_count() + 1);
  for (std::size_t i = 0; i < functions.size(); ++i) {
    for (std::size_t j = i; j < functions.size(); ++j) {
      const Side& u = sides[i];
      const Side& v = sides[j];
      if (pairs == PairSelection::RandomAgainstAll && i != j && !u.random && !v.random) continue;

      mpz_class tree_num = 0;
      for (VertexId x = 0; x < tree.size(); ++x)
        if (x != o) mpz_addmul(tree_num.get_mpz_t(), u.diff.num[x].get_mpz_t(), v.weighted[x].get_mpz_t());
      Rational tree_side(tree_num, a.den * u.diff.den * v.diff.den);
      tree_side.canonicalize();

      // Σ_c increment(c) (Σ_{∂T_c} uvν · ν(∂T_c) − Σ_{∂T_c} uν · Σ_{∂T_c} vν)
      w_prefix[0] = 0;
      for (std::size_t l = 0; l < tree.leaf_count(); ++l) {
        w_prefix[l + 1] = w_prefix[l];
        mpz_addmul(w_prefix[l + 1].get_mpz_t(), u.u_nu[l].get_mpz_t(), v.values.num[l].get_mpz_t());
      }
      mpz_class boundary_num = 0;
      mpz_class w;
      for (VertexId c : tree.interior()) {
        auto [lo, hi] = tree.leaf_range(c);
        w = w_prefix[hi] - w_prefix[lo];
        mpz_addmul(boundary_num.get_mpz_t(), inc_mass[c].get_mpz_t(), w.get_mpz_t());
        mpz_submul(boundary_num.get_mpz_t(), u.inc_sums[c].get_mpz_t(), v.sums[c].get_mpz_t());
      }
      Rational boundary_side(boundary_num, inc.den * u.values.den * v.values.den * nu_sq);
      boundary_side.canonicalize();

      report.add(functions[i].name + " x " + functions[j].name, std::move(tree_side), std::move(boundary_side));
    }
  }
  return report;
}

CheckReport check_theorem_I(const Walk& walk, const WalkKernels& kernels, bool record_all) {
  const Tree& tree = walk.tree();
  CheckReport report;
  report.theorem = "theorem1";
  report.record_all = record_all;
  DualityResult d = walk_to_process(walk, kernels);
  ConfluentKernel J = j_kernel(tree, d.phi, d.mu);
  ConfluentKernel theta = naim_kernel(walk, kernels, tree.root());
  for (VertexId xi : tree.leaves()) {
    for (VertexId eta : tree.leaves()) {
      if (xi == eta) continue;
      report.add(pair_label(xi, eta), J(xi, eta), theta(xi, eta));
    }
  }
  return report;
}

CheckReport check_base_point_invariance(const Walk& walk, const WalkKernels& kernels, bool record_all) {
  const Tree& tree = walk.tree();
  const VertexId o = tree.root();
  const auto& leaves = tree.leaves();
  const std::size_t L = leaves.size();
  CheckReport report;
  report.theorem = "invariance";
  report.record_all = record_all;

  std::vector<std::vector<VertexId>> meet(L, std::vector<VertexId>(L, kNoVertex));
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t j = i + 1; j < L; ++j) meet[i][j] = lowest_common_ancestor(tree, leaves[i], leaves[j]);

  // Per base point: Θ_base at every confluent and ν_base on the leaves. A pair
  // is compared by cross-multiplying numerators and denominators, and only
  // turned into rationals when it is recorded.
  struct Factors {
    VertexVector theta;
    LeafVector nu;
    std::vector<VertexId> toward;
  };
  auto factors = [&](VertexId base) {
    ConfluentKernel theta = naim_kernel(walk, kernels, base);
    Factors f{VertexVector(tree.size(), Rational(0)), LeafVector(L), std::vector<VertexId>(L)};
    for (VertexId c : tree.interior()) f.theta[c] = theta.at_confluent(c);
    VertexVector from_base = kernels.F().from(base);
    for (std::size_t i = 0; i < L; ++i) {
      f.nu[i] = from_base[leaves[i]];
      f.toward[i] = lowest_common_ancestor(tree, base, leaves[i]);
    }
    return f;
  };

  Factors root = factors(o);
  std::vector<mpz_class> lhs_leaf(L), rhs_leaf(L);
  mpz_class lhs, rhs;
  for (VertexId x : tree.interior()) {
    if (x == o) continue;
    Factors at_x = factors(x);
    for (std::size_t i = 0; i < L; ++i) {
      lhs_leaf[i] = at_x.nu[i].get_num() * root.nu[i].get_den();
      rhs_leaf[i] = root.nu[i].get_num() * at_x.nu[i].get_den();
    }
    for (std::size_t i = 0; i < L; ++i) {
      for (std::size_t j = i + 1; j < L; ++j) {
        // Confluent with respect to x: the deepest of the three meeting points.
        VertexId c0 = meet[i][j];
        VertexId c = c0;
        for (VertexId cand : {at_x.toward[i], at_x.toward[j]})
          if (tree.depth(cand) > tree.depth(c)) c = cand;
        lhs = at_x.theta[c].get_num() * root.theta[c0].get_den();
        lhs *= lhs_leaf[i];
        lhs *= lhs_leaf[j];
        rhs = root.theta[c0].get_num() * at_x.theta[c].get_den();
        rhs *= rhs_leaf[i];
        rhs *= rhs_leaf[j];
        if (lhs == rhs && !record_all) {
          ++report.checks;
          continue;
        }
        report.add("base " + vid(x) + " " + pair_label(leaves[i], leaves[j]), at_x.theta[c] * at_x.nu[i] * at_x.nu[j],
                   root.theta[c0] * root.nu[i] * root.nu[j]);
      }
    }
  }

  VertexVector nu_o = kernels.F().from(o);
  for (VertexId x : tree.interior()) {
    VertexVector nu_x = kernels.F().from(x);
    for (VertexId l : leaves) {
      VertexId c = lowest_common_ancestor(tree, x, l);
      report.add("martin " + vid(x) + " " + vid(l), nu_x[l] / nu_o[l], kernels.G(x, c) / kernels.G(o, c));
    }
  }
  return report;
}

CheckReport roundtrip(const Walk& walk, bool record_all) {
  const Tree& tree = walk.tree();
  CheckReport report;
  report.theorem = "roundtrip-walk";
  report.record_all = record_all;
  WalkKernels kernels(walk);
  DualityResult d = walk_to_process(walk, kernels);
  ReconstructionTrace trace = process_to_walk(tree, d.phi, d.mu);
  report.add("C", trace.C, Rational(1));
  for (VertexId x : tree.interior())
    for (VertexId y : tree.neighbours(x)) report.add("p" + pair_label(x, y), trace.walk.p(x, y), walk.p(x, y));
  return report;
}

CheckReport roundtrip(const Tree& tree, const UltrametricElement& phi, const BoundaryMeasure& mu,
                      const Rational& scale, bool record_all) {
  CheckReport report;
  report.theorem = "roundtrip-process";
  report.record_all = record_all;
  if (scale <= 0) throw InvalidInput("roundtrip: scale must be positive");
  ReconstructionTrace trace = process_to_walk(tree, phi, mu);
  WalkKernels kernels(trace.walk);
  DualityResult d = walk_to_process(trace.walk, kernels);
  for (VertexId x : tree.interior()) report.add("phi'(" + vid(x) + ")", d.phi(x), trace.C * phi(x));
  for (std::size_t i = 0; i < mu.size(); ++i) report.add("mu'(" + vid(tree.leaves()[i]) + ")", d.mu[i], mu[i]);

  std::vector<Rational> scaled(phi.values());
  for (auto& v : scaled) v *= scale;
  ReconstructionTrace other = process_to_walk(tree, UltrametricElement(tree, std::move(scaled)), mu);
  report.add("C(scaled)", other.C, trace.C / scale);
  for (VertexId x : tree.interior())
    for (VertexId y : tree.neighbours(x))
      report.add("p(scaled)" + pair_label(x, y), other.walk.p(x, y), trace.walk.p(x, y));
  return report;
}

}  // namespace ultra
