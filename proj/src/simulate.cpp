#include "ultra/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

#include "ultra/rng.hpp"

namespace ultra {

namespace {

// Runs `trial` over all trials in fixed blocks, one stream per block, and sums
// the per-leaf counts. The split of blocks over threads does not affect the
// result.
std::vector<std::size_t> run_blocks(const SimConfig& config, std::size_t leaf_count, std::size_t& truncated,
                                    const std::function<std::size_t(Xoshiro256&)>& trial) {
  const std::size_t blocks = (config.trials + kTrialBlock - 1) / kTrialBlock;
  std::vector<std::vector<std::size_t>> counts(blocks, std::vector<std::size_t>(leaf_count + 1, 0));
  auto run = [&](std::size_t b) {
    Xoshiro256 rng(split_seed(config.seed, b));
    std::size_t end = std::min(config.trials, (b + 1) * kTrialBlock);
    for (std::size_t n = b * kTrialBlock; n < end; ++n) ++counts[b][trial(rng)];
  };
  unsigned workers = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, blocks));
  if (workers <= 1) {
    for (std::size_t b = 0; b < blocks; ++b) run(b);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t b = w; b < blocks; b += workers) run(b);
      });
    }
    for (auto& t : pool) t.join();
  }
  std::vector<std::size_t> total(leaf_count + 1, 0);
  for (const auto& c : counts)
    for (std::size_t i = 0; i <= leaf_count; ++i) total[i] += c[i];
  truncated = total[leaf_count];
  total.pop_back();
  return total;
}

SimulationStats finish(const Tree& tree, const SimConfig& config, std::vector<std::size_t> counts,
                       std::vector<double> exact, std::size_t truncated) {
  SimulationStats s;
  s.leaves = tree.leaves();
  s.trials = config.trials;
  s.seed = config.seed;
  s.truncated = truncated;
  const double N = static_cast<double>(config.trials);
  for (std::size_t c : counts) {
    double p = static_cast<double>(c) / N;
    s.empirical.push_back(p);
    s.standard_error.push_back(std::sqrt(p * (1 - p) / N));
  }
  s.counts = std::move(counts);
  s.exact = std::move(exact);
  s.tv = total_variation(s.empirical, s.exact);
  return s;
}

// Index of the first entry of `cumulative` (nondecreasing, last entry the
// total) exceeding u·total.
std::size_t pick(const std::vector<double>& cumulative, std::size_t lo, std::size_t hi, double u) {
  double base = lo == 0 ? 0.0 : cumulative[lo - 1];
  double target = base + u * (cumulative[hi - 1] - base);
  auto it = std::upper_bound(cumulative.begin() + static_cast<std::ptrdiff_t>(lo),
                             cumulative.begin() + static_cast<std::ptrdiff_t>(hi), target);
  std::size_t j = static_cast<std::size_t>(it - cumulative.begin());
  return std::min(j, hi - 1);
}

}  // namespace

void SimConfig::validate() const {
  if (trials == 0) throw InvalidInput("simulate: trials must be at least 1");
  if (max_steps == 0) throw InvalidInput("simulate: max_steps must be at least 1");
  if (steps == 0) throw InvalidInput("simulate: steps must be at least 1");
}

double SimulationStats::tv_bound() const {
  return 4.5 * std::sqrt(static_cast<double>(leaves.size()) / (4.0 * static_cast<double>(trials)));
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double sum = 0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return sum / 2;
}

SimulationStats simulate_walk(const Walk& walk, const SimConfig& config) {
  config.validate();
  const Tree& tree = walk.tree();
  if (config.start >= tree.size()) throw InvalidInput("simulate: unknown start vertex " + std::to_string(config.start));
  const std::size_t L = tree.leaf_count();

  // Neighbours and cumulative step probabilities per interior vertex.
  std::vector<std::vector<VertexId>> next(tree.size());
  std::vector<std::vector<double>> cumulative(tree.size());
  for (VertexId x : tree.interior()) {
    double c = 0;
    for (VertexId y : tree.neighbours(x)) {
      c += to_double(walk.p(x, y));
      next[x].push_back(y);
      cumulative[x].push_back(c);
    }
  }

  std::size_t truncated = 0;
  auto counts = run_blocks(config, L, truncated, [&](Xoshiro256& rng) -> std::size_t {
    VertexId x = config.start;
    for (std::size_t step = 0; !tree.is_leaf(x); ++step) {
      if (step == config.max_steps) return L;
      x = next[x][pick(cumulative[x], 0, next[x].size(), rng.uniform())];
    }
    return tree.leaf_index(x);
  });

  std::vector<double> exact(L, 0.0);
  if (tree.is_leaf(config.start)) {
    exact[tree.leaf_index(config.start)] = 1;
  } else {
    WalkKernels kernels(walk);
    LeafVector nu = limit_distribution(walk, kernels, config.start);
    for (std::size_t i = 0; i < L; ++i) exact[i] = to_double(nu[i]);
  }
  return finish(tree, config, std::move(counts), std::move(exact), truncated);
}

SimulationStats simulate_jump_chain(const JumpProcessSpec& spec, const SimConfig& config) {
  config.validate();
  const Tree& tree = spec.tree;
  if (config.start >= tree.size() || !tree.is_leaf(config.start))
    throw InvalidInput("simulate: the jump chain starts at a leaf");
  const std::size_t L = tree.leaf_count();
  const auto& leaves = tree.leaves();
  const bool standard = spec.sigma.kind() == SigmaMeasure::Kind::Standard;

  // Ancestors of each leaf from the root down, with φ as double for the
  // standard law.
  std::vector<std::vector<VertexId>> path(L);
  for (std::size_t i = 0; i < L; ++i) {
    for (VertexId x = tree.parent(leaves[i]); x != kNoVertex; x = tree.parent(x)) path[i].push_back(x);
    std::reverse(path[i].begin(), path[i].end());
  }
  std::vector<double> phi(tree.size(), 0.0);
  for (VertexId x : tree.interior()) phi[x] = to_double(spec.phi(x));
  std::vector<double> cumulative(L);
  double c = 0;
  for (std::size_t i = 0; i < L; ++i) cumulative[i] = (c += to_double(spec.mu[i]));

  const std::size_t start = tree.leaf_index(config.start);
  std::size_t truncated = 0;
  auto counts = run_blocks(config, L, truncated, [&](Xoshiro256& rng) -> std::size_t {
    std::size_t at = start;
    for (std::size_t step = 0; step < config.steps; ++step) {
      SigmaMeasure::Radius r = spec.sigma.quantile(rng.uniform_open());
      // Highest ancestor x with φ(x) ≤ r; none means the ball is {ξ}.
      auto inside = [&](VertexId x) { return standard ? phi[x] <= r.real : spec.phi(x) <= r.value; };
      const auto& p = path[at];
      auto it = std::partition_point(p.begin(), p.end(), [&](VertexId x) { return !inside(x); });
      if (it == p.end()) continue;
      auto [lo, hi] = tree.leaf_range(*it);
      at = pick(cumulative, lo, hi, rng.uniform());
    }
    return at;
  });

  std::vector<double> row(L, 0.0);
  row[start] = 1;
  RealOperator P = one_step_operator(spec);
  for (std::size_t step = 0; step < config.steps; ++step) {
    std::vector<double> out(L, 0.0);
    for (std::size_t i = 0; i < L; ++i)
      for (std::size_t j = 0; j < L; ++j) out[j] += row[i] * P.entries[i][j];
    row = std::move(out);
  }
  return finish(tree, config, std::move(counts), std::move(row), truncated);
}

}  // namespace ultra
