#pragma once

#include <cstdint>
#include <vector>

#include "ultra/boundary_process.hpp"
#include "ultra/tree.hpp"
#include "ultra/walk.hpp"

namespace ultra {

struct SimConfig {
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  VertexId start = 0;
  /// Cap on walk steps per trajectory.
  std::size_t max_steps = 1'000'000;
  /// Number of jump-chain steps per trial; the exact row is that power of P¹.
  std::size_t steps = 1;
  /// Worker threads, 0 for one per core. Results do not depend on it.
  unsigned threads = 0;

  /// Throws InvalidInput when trials, max_steps or steps is 0.
  void validate() const;
};

/// Trials are split into blocks of this many; block k draws from
/// Xoshiro256(split_seed(seed, k)).
inline constexpr std::size_t kTrialBlock = 4096;

/// Empirical distribution over the leaves, against the exact one.
struct SimulationStats {
  std::vector<VertexId> leaves;
  std::vector<std::size_t> counts;
  std::vector<double> empirical;
  std::vector<double> exact;
  /// √(p(1−p)/N) with p the empirical frequency.
  std::vector<double> standard_error;
  double tv = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  /// Walk trajectories stopped at max_steps before absorption. They are not
  /// counted on any leaf.
  std::size_t truncated = 0;

  /// 4.5·√(k/(4N)) for k leaves and N trials.
  double tv_bound() const;
  bool within_bound() const { return tv <= tv_bound(); }
};

/// Runs the walk from config.start until it is absorbed at a leaf. The exact
/// side is ν_start.
SimulationStats simulate_walk(const Walk& walk, const SimConfig& config);

/// Runs config.steps steps of the jump chain from the leaf config.start: draw
/// r from σ, then land μ-distributed in the closed ball B(current, r). The
/// exact side is the start row of the one-step operator raised to
/// config.steps.
SimulationStats simulate_jump_chain(const JumpProcessSpec& spec, const SimConfig& config);

double total_variation(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace ultra
