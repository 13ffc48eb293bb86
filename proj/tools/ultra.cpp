// Command-line front end. Reports go to stdout (or --out), diagnostics to
// stderr. Exit codes: 0 pass, 1 check failure, 2 parse error, 3 ultrametric
// violation, 4 invalid input, 5 internal verification failure.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "ultra/boundary_process.hpp"
#include "ultra/duality.hpp"
#include "ultra/io.hpp"
#include "ultra/simulate.hpp"
#include "ultra/tree.hpp"
#include "ultra/walk.hpp"

using namespace ultra;
using io::Json;

namespace {

enum Exit : int { kPass = 0, kCheckFailure = 1, kParse = 2, kMetric = 3, kInvalid = 4, kVerification = 5 };

struct Global {
  std::string out;
  bool pretty = false;
  std::string numeric = "exact";
};

// --pretty: nested objects as indented "key: value" lines, arrays of arrays
// as aligned tables.
std::string scalar(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

bool is_table(const Json& v) {
  if (!v.is_array() || v.empty()) return false;
  for (const Json& row : v) {
    if (!row.is_array()) return false;
    for (const Json& x : row)
      if (x.is_structured()) return false;
  }
  return true;
}

void render(std::ostream& os, const Json& v, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  if (is_table(v)) {
    std::size_t width = 0;
    for (const Json& row : v)
      for (const Json& x : row) width = std::max(width, scalar(x).size());
    for (const Json& row : v) {
      os << pad;
      for (const Json& x : row) {
        std::string s = scalar(x);
        os << std::string(width - s.size() + 2, ' ') << s;
      }
      os << '\n';
    }
  } else if (v.is_object()) {
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (it.value().is_structured() && !it.value().empty()) {
        bool flat = it.value().is_array() && !is_table(it.value()) &&
                    std::none_of(it.value().begin(), it.value().end(), [](const Json& x) { return x.is_structured(); });
        if (flat) {
          os << pad << it.key() << ':';
          for (const Json& x : it.value()) os << ' ' << scalar(x);
          os << '\n';
        } else {
          os << pad << it.key() << ":\n";
          render(os, it.value(), indent + 2);
        }
      } else {
        os << pad << it.key() << ": " << scalar(it.value()) << '\n';
      }
    }
  } else if (v.is_array()) {
    for (const Json& x : v) {
      if (x.is_structured()) {
        os << pad << "-\n";
        render(os, x, indent + 2);
      } else {
        os << pad << "- " << scalar(x) << '\n';
      }
    }
  } else {
    os << pad << scalar(v) << '\n';
  }
}

void emit(const Global& g, const Json& value) {
  std::ostringstream text;
  if (g.pretty)
    render(text, value, 0);
  else
    text << value.dump(2) << '\n';
  if (g.out.empty()) {
    std::cout << text.str();
  } else {
    std::ofstream f(g.out);
    if (!f) throw InvalidInput("cannot write " + g.out);
    f << text.str();
  }
}

std::string key(VertexId v) { return std::to_string(v); }

// "2", "1/2" or "0.5".
struct TimeValue {
  std::optional<Rational> exact;
  double real = 0;
  std::string text;
};

TimeValue parse_time(const std::string& text) {
  TimeValue t;
  t.text = text;
  try {
    t.exact = parse_rational(text);
    t.real = to_double(*t.exact);
  } catch (const ParseError&) {
    std::size_t used = 0;
    try {
      t.real = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size() || used == 0) throw InvalidInput("--t: not a number: " + text);
  }
  if (!(t.real > 0) || !std::isfinite(t.real)) throw InvalidInput("--t: values must be positive, got " + text);
  return t;
}

double max_gap(const RealOperator& a, const RealOperator& b) {
  double gap = 0;
  for (std::size_t i = 0; i < a.entries.size(); ++i)
    for (std::size_t j = 0; j < a.entries.size(); ++j) gap = std::max(gap, std::abs(a.entries[i][j] - b.entries[i][j]));
  return gap;
}

RealOperator product(const RealOperator& a, const RealOperator& b) {
  RealOperator out{a.leaves, std::vector<std::vector<double>>(a.entries.size(), std::vector<double>(a.entries.size(), 0.0))};
  const std::size_t L = a.entries.size();
  for (std::size_t i = 0; i < L; ++i)
    for (std::size_t k = 0; k < L; ++k)
      for (std::size_t j = 0; j < L; ++j) out.entries[i][j] += a.entries[i][k] * b.entries[k][j];
  return out;
}

Json identities_json(const IdentityReport& r, bool record_all) {
  Json comparisons = Json::array(), failures = Json::array();
  for (const Json& c : io::to_json(r)) {
    if (record_all) comparisons.push_back(c);
    if (!c["pass"].get<bool>()) failures.push_back(c);
  }
  Json out{{"theorem", "identities"}, {"instances", 1}, {"checks", r.checks.size()}};
  if (record_all) out["comparisons"] = std::move(comparisons);
  out["failures"] = std::move(failures);
  return out;
}

// ---------------------------------------------------------------------------
// Subcommands

struct MetricArgs {
  std::string space, tree_out, phi_out;
};

int cmd_build_from_metric(const Global& g, const MetricArgs& a) {
  UltrametricSpace space = io::space_from_json(io::read_file(a.space));
  BallTree bt = tree_from_ultrametric(space);
  Json tree = io::to_json(bt.tree);
  Json phi = io::to_json(bt.tree, bt.phi);
  Json leaves = Json::object();
  for (std::size_t p = 0; p < space.points.size(); ++p) leaves[space.points[p]] = bt.leaf_of_point[p];
  if (!a.tree_out.empty()) io::write_file(a.tree_out, tree);
  if (!a.phi_out.empty()) io::write_file(a.phi_out, phi);
  emit(g, Json{{"tree", std::move(tree)}, {"phi", std::move(phi)}, {"leaves", std::move(leaves)}});
  return kPass;
}

struct WalkArgs {
  std::string tree, walk;
};

int cmd_analyze(const Global& g, const WalkArgs& a) {
  Tree tree = io::tree_from_json(io::read_file(a.tree));
  Walk walk = io::walk_from_json(tree, io::read_file(a.walk));
  WalkKernels k(walk);
  Json F = Json::object(), G = Json::object(), m = Json::object(), cond = Json::object();
  for (VertexId x = 0; x < tree.size(); ++x) {
    Json frow = Json::object(), grow = Json::object();
    for (VertexId y = 0; y < tree.size(); ++y) {
      frow[key(y)] = io::from_rational(k.F(x, y));
      grow[key(y)] = io::from_rational(k.G(x, y));
    }
    F[key(x)] = std::move(frow);
    G[key(x)] = std::move(grow);
    m[key(x)] = io::from_rational(k.m(x));
    if (x != tree.root()) cond[key(x)] = io::from_rational(k.conductance(x));
  }
  IdentityReport identities = check_kernel_identities(walk, k);
  Json out{{"F", std::move(F)},
           {"G", std::move(G)},
           {"m", std::move(m)},
           {"a", std::move(cond)},
           {"nu_o", io::measure_to_json(tree, limit_distribution(walk, k, tree.root()))},
           {"identities", io::to_json(identities)},
           {"pass", identities.all_pass()}};
  emit(g, out);
  if (!identities.all_pass()) std::cerr << identities.failures() << " identity checks failed\n";
  return identities.all_pass() ? kPass : kCheckFailure;
}

struct DualizeArgs {
  std::string direction, tree, walk, phi, mu, phi_out, mu_out, walk_out;
};

int cmd_dualize(const Global& g, const DualizeArgs& a) {
  Tree tree = io::tree_from_json(io::read_file(a.tree));
  if (a.direction == "walk-to-process") {
    if (a.walk.empty()) throw InvalidInput("walk-to-process needs --walk");
    Walk walk = io::walk_from_json(tree, io::read_file(a.walk));
    WalkKernels k(walk);
    DualityResult d = walk_to_process(walk, k);
    CheckReport verify = roundtrip(walk);
    verify.merge(check_theorem_I(walk, k));
    if (!verify.all_pass()) throw VerificationFailure("walk-to-process: round trip or kernel identity failed");
    Json phi = io::to_json(tree, d.phi), mu = io::measure_to_json(tree, d.mu.weights());
    if (!a.phi_out.empty()) io::write_file(a.phi_out, phi);
    if (!a.mu_out.empty()) io::write_file(a.mu_out, mu);
    emit(g, Json{{"phi", std::move(phi)}, {"mu", std::move(mu)}});
    return kPass;
  }
  if (a.direction == "process-to-walk") {
    if (a.phi.empty() || a.mu.empty()) throw InvalidInput("process-to-walk needs --phi and --mu");
    UltrametricElement phi = io::phi_from_json(tree, io::read_file(a.phi));
    BoundaryMeasure mu = io::measure_from_json(tree, io::read_file(a.mu));
    ReconstructionTrace r = process_to_walk(tree, phi, mu);
    Json walk = io::to_json(r.walk);
    if (!a.walk_out.empty()) io::write_file(a.walk_out, walk);
    emit(g, Json{{"C", io::from_rational(r.C)}, {"walk", std::move(walk)}});
    return kPass;
  }
  throw InvalidInput("dualize: direction must be walk-to-process or process-to-walk");
}

struct CheckArgs {
  std::string tree, walk, suite = "all";
  std::size_t random_functions = 20;
  std::uint64_t seed = 0;
  bool failures_only = false;
  std::optional<VertexId> corrupt;
};

int cmd_check(const Global& g, const CheckArgs& a) {
  Tree tree = io::tree_from_json(io::read_file(a.tree));
  Walk walk = io::walk_from_json(tree, io::read_file(a.walk));
  WalkKernels k(walk);
  if (a.corrupt) {
    if (*a.corrupt >= tree.size()) throw InvalidInput("--debug-corrupt-green: unknown vertex");
    std::cerr << "debug: G(" << *a.corrupt << "," << *a.corrupt << ") shifted by 1\n";
    k = k.with_corrupted_green(*a.corrupt, Rational(1));
  }
  const bool record = !a.failures_only;
  const bool all = a.suite == "all";
  Json suites = Json::array();
  bool pass = true;
  auto add = [&](const CheckReport& r) {
    pass = pass && r.all_pass();
    suites.push_back(io::to_json(r));
  };
  if (all || a.suite == "identities") {
    IdentityReport r = check_kernel_identities(walk, k);
    pass = pass && r.all_pass();
    suites.push_back(identities_json(r, record));
  }
  if (all || a.suite == "doob-naim")
    add(check_doob_naim(walk, k, doob_naim_functions(tree, a.random_functions, a.seed), PairSelection::All, record));
  if (all || a.suite == "theorem1") add(check_theorem_I(walk, k, record));
  if (all || a.suite == "invariance") add(check_base_point_invariance(walk, k, record));
  emit(g, Json{{"suites", std::move(suites)}, {"pass", pass}});
  if (!pass) std::cerr << "check failed\n";
  return pass ? kPass : kCheckFailure;
}

struct ProcessArgs {
  std::string tree, phi, mu, sigma;
};

JumpProcessSpec read_spec(const ProcessArgs& a, bool strict) {
  Tree tree = io::tree_from_json(io::read_file(a.tree));
  UltrametricElement phi = io::phi_from_json(tree, io::read_file(a.phi));
  BoundaryMeasure mu = io::measure_from_json(tree, io::read_file(a.mu));
  SigmaMeasure sigma = a.sigma.empty() ? SigmaMeasure::standard() : io::sigma_from_json(io::read_file(a.sigma));
  return JumpProcessSpec::validate(std::move(tree), std::move(phi), std::move(mu), std::move(sigma), strict);
}

struct SemigroupArgs {
  ProcessArgs process;
  std::vector<std::string> t;
  bool generator_gap = false;
};

int cmd_semigroup(const Global& g, const SemigroupArgs& a) {
  JumpProcessSpec spec = read_spec(a.process, true);
  std::vector<TimeValue> times;
  for (const std::string& s : a.t) times.push_back(parse_time(s));
  if (times.empty()) throw InvalidInput("semigroup: give at least one --t");

  Json operators = Json::array();
  std::vector<RealOperator> real;
  for (const TimeValue& t : times) {
    RealOperator P = semigroup_operator(spec, t.real);
    double row_error = 0;
    for (const auto& row : P.entries) {
      double sum = 0;
      for (double v : row) sum += v;
      row_error = std::max(row_error, std::abs(sum - 1));
    }
    Json entry{{"t", t.text}, {"row_sum_error", row_error}};
    bool integral = t.exact && t.exact->get_den() == 1 && t.exact->get_num().fits_uint_p();
    bool exact_sigma = spec.sigma.kind() == SigmaMeasure::Kind::Tabulated &&
                       std::all_of(spec.sigma.steps().begin(), spec.sigma.steps().end(),
                                   [](const SigmaMeasure::Step& s) { return s.exact.has_value(); });
    if (g.numeric == "exact" && integral && exact_sigma) {
      ExactOperator E = semigroup_operator_exact(spec, static_cast<unsigned>(t.exact->get_num().get_ui()));
      double gap = 0;
      for (std::size_t i = 0; i < E.entries.size(); ++i)
        for (std::size_t j = 0; j < E.entries.size(); ++j)
          gap = std::max(gap, std::abs(to_double(E.entries[i][j]) - P.entries[i][j]));
      entry["mode"] = "exact";
      entry["matrix"] = io::to_json(E);
      entry["float_gap"] = gap;
    } else {
      if (g.numeric == "exact")
        std::cerr << "note: P^" << t.text << " has irrational entries; written in float mode\n";
      entry["mode"] = "float";
      entry["matrix"] = io::to_json(P);
    }
    if (a.generator_gap) entry["generator_gap"] = semigroup_generator_gap(spec, t.real);
    operators.push_back(std::move(entry));
    real.push_back(std::move(P));
  }

  // Consecutive s < t: ‖P^s P^(t−s) − P^t‖_max.
  Json residuals = Json::array();
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    std::size_t lo = times[i].real <= times[i + 1].real ? i : i + 1;
    std::size_t hi = lo == i ? i + 1 : i;
    double d = times[hi].real - times[lo].real;
    if (!(d > 0)) continue;
    RealOperator rest = semigroup_operator(spec, d);
    residuals.push_back(Json{{"s", times[lo].text},
                             {"t", times[hi].text},
                             {"residual", max_gap(product(real[lo], rest), real[hi])}});
  }
  emit(g, Json{{"operators", std::move(operators)}, {"residuals", std::move(residuals)}});
  return kPass;
}

struct SimulateArgs {
  std::string kind;
  WalkArgs walk;
  ProcessArgs process;
  SimConfig config;
  std::optional<VertexId> start;
};

int cmd_simulate(const Global& g, SimulateArgs a) {
  SimulationStats stats;
  if (a.kind == "walk") {
    Tree tree = io::tree_from_json(io::read_file(a.walk.tree));
    Walk walk = io::walk_from_json(tree, io::read_file(a.walk.walk));
    a.config.start = a.start.value_or(tree.root());
    stats = simulate_walk(walk, a.config);
  } else if (a.kind == "jump-chain") {
    a.process.tree = a.walk.tree;
    JumpProcessSpec spec = read_spec(a.process, false);
    a.config.start = a.start.value_or(spec.tree.leaves().front());
    stats = simulate_jump_chain(spec, a.config);
  } else {
    throw InvalidInput("simulate: kind must be walk or jump-chain");
  }
  Json out = io::to_json(stats);
  out["within_bound"] = stats.within_bound();
  emit(g, out);
  if (stats.truncated) std::cerr << stats.truncated << " trajectories hit --max-steps\n";
  if (!stats.within_bound()) std::cerr << "TV " << stats.tv << " exceeds the bound " << stats.tv_bound() << "\n";
  return stats.within_bound() ? kPass : kCheckFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random walks on trees and jump processes on their boundaries"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--out", g.out, "Write the report here instead of stdout");
  app.add_flag("--pretty", g.pretty, "Human-readable output instead of JSON");
  app.add_option("--numeric", g.numeric, "exact or float")->check(CLI::IsMember({"exact", "float"}));

  MetricArgs metric;
  auto* build = app.add_subcommand("build-from-metric", "Ball tree and phi from an ultrametric distance matrix");
  build->add_option("--space", metric.space)->required();
  build->add_option("--tree-out", metric.tree_out);
  build->add_option("--phi-out", metric.phi_out);

  WalkArgs analyze_args;
  auto* analyze = app.add_subcommand("analyze", "Kernels F, G, m, a, nu_o and the identity checks");
  analyze->add_option("--tree", analyze_args.tree)->required();
  analyze->add_option("--walk", analyze_args.walk)->required();

  DualizeArgs dual;
  auto* dualize = app.add_subcommand("dualize", "Walk to boundary process or back");
  dualize->add_option("direction", dual.direction, "walk-to-process or process-to-walk")
      ->required()
      ->check(CLI::IsMember({"walk-to-process", "process-to-walk"}));
  dualize->add_option("--tree", dual.tree)->required();
  dualize->add_option("--walk", dual.walk);
  dualize->add_option("--phi", dual.phi);
  dualize->add_option("--mu", dual.mu);
  dualize->add_option("--phi-out", dual.phi_out);
  dualize->add_option("--mu-out", dual.mu_out);
  dualize->add_option("--walk-out", dual.walk_out);

  CheckArgs check_args;
  VertexId corrupt = kNoVertex;
  auto* check = app.add_subcommand("check", "Exact identity suites");
  check->add_option("--tree", check_args.tree)->required();
  check->add_option("--walk", check_args.walk)->required();
  check->add_option("--suite", check_args.suite)
      ->check(CLI::IsMember({"all", "doob-naim", "theorem1", "invariance", "identities"}));
  check->add_option("--random-functions", check_args.random_functions, "Random boundary functions for doob-naim");
  check->add_option("--seed", check_args.seed, "Seed for the random boundary functions");
  check->add_flag("--failures-only", check_args.failures_only, "List only failing comparisons");
  check->add_option("--debug-corrupt-green", corrupt, "Shift G(x,x) by 1 before checking (harness self-test)")
      ->group("Debug");

  SemigroupArgs semi;
  auto* semigroup = app.add_subcommand("semigroup", "Transition operators P^t");
  semigroup->add_option("--tree", semi.process.tree)->required();
  semigroup->add_option("--phi", semi.process.phi)->required();
  semigroup->add_option("--mu", semi.process.mu)->required();
  semigroup->add_option("--sigma", semi.process.sigma, "Omit for the standard law");
  semigroup->add_option("--t", semi.t, "Times, e.g. --t 1 2 or --t 1,2")->required()->delimiter(',');
  semigroup->add_flag("--generator-gap", semi.generator_gap, "Also report max |P^t - exp(-t Lambda)|");

  SimulateArgs sim;
  VertexId start = kNoVertex;
  sim.config.trials = 100000;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo against the exact law");
  simulate->add_option("kind", sim.kind, "walk or jump-chain")->required()->check(CLI::IsMember({"walk", "jump-chain"}));
  simulate->add_option("--tree", sim.walk.tree)->required();
  simulate->add_option("--walk", sim.walk.walk);
  simulate->add_option("--phi", sim.process.phi);
  simulate->add_option("--mu", sim.process.mu);
  simulate->add_option("--sigma", sim.process.sigma, "Omit for the standard law");
  simulate->add_option("--seed", sim.config.seed);
  simulate->add_option("--trials", sim.config.trials);
  simulate->add_option("--start", start, "Default: the root for walk, the first leaf for jump-chain");
  simulate->add_option("--steps", sim.config.steps, "Jump-chain steps per trial");
  simulate->add_option("--max-steps", sim.config.max_steps, "Cap on walk steps per trajectory");
  simulate->add_option("--threads", sim.config.threads, "0 for one per core");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kPass : kParse;
  }

  try {
    if (*build) return cmd_build_from_metric(g, metric);
    if (*analyze) return cmd_analyze(g, analyze_args);
    if (*dualize) return cmd_dualize(g, dual);
    if (*check) {
      if (corrupt != kNoVertex) check_args.corrupt = corrupt;
      return cmd_check(g, check_args);
    }
    if (*semigroup) return cmd_semigroup(g, semi);
    if (*simulate) {
      if (sim.kind == "jump-chain" && (sim.process.phi.empty() || sim.process.mu.empty()))
        throw InvalidInput("jump-chain needs --phi and --mu");
      if (sim.kind == "walk" && sim.walk.walk.empty()) throw InvalidInput("walk needs --walk");
      if (start != kNoVertex) sim.start = start;
      return cmd_simulate(g, sim);
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const MetricViolation& e) {
    auto t = e.triple();
    std::cerr << "ultrametric violation at points (" << t[0] << ", " << t[1] << ", " << t[2] << "): " << e.what()
              << '\n';
    return kMetric;
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInvalid;
  } catch (const VerificationFailure& e) {
    std::cerr << "verification failure: " << e.what() << '\n';
    return kVerification;
  }
  return kInvalid;
}
