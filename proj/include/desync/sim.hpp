#pragma once

// Round-based runner. One round is one application of the analysed map:
// a single firing + relabel for single-hop, one synchronous transition for
// multi-hop.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "desync/core.hpp"
#include "desync/dwarf.hpp"
#include "desync/mdwarf.hpp"

namespace desync {

/// max_i |D_i - T/n|.
inline double desync_error(const GapVector& gaps, double period) {
  const double target = period / gaps.size();
  double e = 0.0;
  for (double g : gaps.values()) e = std::max(e, std::abs(g - target));
  return e;
}

enum class SimMode { single_hop, multi_hop };
enum class InitKind { equilibrium, random, explicit_gaps };

struct Perturbation {
  double magnitude;  // phase shift applied to `node`, |magnitude| < T/n
  int node;
};

struct SimConfig {
  SimMode mode = SimMode::single_hop;
  int n = 0;
  double period = 1000.0;
  std::optional<double> coupling;  // overrides the derived K
  std::optional<Topology> topology;  // multi-hop only; defaults to the star
  PerceptionMode perception = PerceptionMode::two_hop;
  InitKind init = InitKind::equilibrium;
  std::uint64_t seed = 0;
  std::vector<double> gaps;  // for InitKind::explicit_gaps
  std::optional<Perturbation> perturbation;
  int rounds = 1;
  int stride = 1;
  bool sweep = false;  // single-hop: one round = n firings
  double convergence_threshold = 1e-6;  // relative to T
};

struct TraceRecord {
  int round;
  std::vector<double> gaps;
  double desync_error;
  double max_force;  // largest phase adjustment the recorded state produces
};

struct RunFailure {
  int round;  // round whose update failed
  std::size_t gap_index;
  double value;
  std::string message;
};

struct RunResult {
  std::vector<TraceRecord> trace;
  bool converged = false;
  double initial_error = 0.0;
  double final_error = 0.0;
  int rounds_executed = 0;
  std::optional<RunFailure> failure;
  int rejected_initial_states = 0;
  bool topology_connected = true;
};

namespace detail {

// Uniform on the simplex via normalised exponentials, rejecting any gap below T/(10 n^2).
inline std::vector<double> random_gaps(int n, double period, std::uint64_t seed, int& rejected) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  const double floor_gap = period / (10.0 * n * n);
  rejected = 0;
  for (;;) {
    std::vector<double> g(static_cast<std::size_t>(n));
    double total = 0.0;
    for (auto& v : g) total += (v = expo(rng));
    for (auto& v : g) v = v / total * period;
    // Put the rounding residue on the largest gap so the sum is T.
    double sum = 0.0;
    for (double v : g) sum += v;
    *std::max_element(g.begin(), g.end()) += period - sum;
    if (*std::min_element(g.begin(), g.end()) >= floor_gap) return g;
    ++rejected;
  }
}

}  // namespace detail

inline void validate(const SimConfig& c) {
  if (c.n < 2) throw ConfigError("simulate: n must be >= 2");
  if (!(c.period > 0.0)) throw ConfigError("simulate: period must be positive");
  if (c.coupling && !(*c.coupling > 0.0)) throw ConfigError("simulate: coupling must be positive");
  if (c.rounds < 1) throw ConfigError("simulate: rounds must be >= 1");
  if (c.stride < 1) throw ConfigError("simulate: stride must be >= 1");
  if (c.mode == SimMode::single_hop && c.n < 3) throw ConfigError("simulate: single-hop needs n >= 3");
  if (c.mode == SimMode::multi_hop && c.n < 4) throw ConfigError("simulate: multi-hop needs n >= 4");
  if (c.topology && c.topology->size() != c.n)
    throw ConfigError("simulate: topology has " + std::to_string(c.topology->size()) + " nodes, n = " +
                      std::to_string(c.n));
  if (c.init == InitKind::explicit_gaps && static_cast<int>(c.gaps.size()) != c.n)
    throw ConfigError("simulate: explicit gaps must have n entries");
  if (c.perturbation) {
    if (c.perturbation->node < 0 || c.perturbation->node >= c.n)
      throw ConfigError("simulate: perturbation node out of range");
    if (!(std::abs(c.perturbation->magnitude) < c.period / c.n))
      throw ConfigError("simulate: perturbation magnitude must be below T/n");
  }
}

inline GapVector initial_state(const SimConfig& c, int& rejected) {
  rejected = 0;
  std::vector<double> g;
  switch (c.init) {
    case InitKind::equilibrium: g.assign(static_cast<std::size_t>(c.n), c.period / c.n); break;
    case InitKind::random: g = detail::random_gaps(c.n, c.period, c.seed, rejected); break;
    case InitKind::explicit_gaps: g = c.gaps; break;
  }
  if (c.perturbation) {
    // Moving node p forward lengthens the gap behind it and shortens the one ahead.
    const int p = c.perturbation->node;
    g[ring_index(p - 1, c.n)] += c.perturbation->magnitude;
    g[p] -= c.perturbation->magnitude;
  }
  try {
    return GapVector(std::move(g), c.period);
  } catch (const DegenerateStateError& e) {
    throw ConfigError(std::string("simulate: invalid initial state: ") + e.what());
  }
}

inline RunResult run_simulation(const SimConfig& c) {
  validate(c);
  const SystemConfig sys = c.coupling ? SystemConfig::with_coupling(c.n, c.period, *c.coupling)
                                      : SystemConfig::derived(c.n, c.period);
  RunResult result;
  GapVector state = initial_state(c, result.rejected_initial_states);

  std::optional<ForceWeights> weights;
  if (c.mode == SimMode::multi_hop) {
    const Topology topo = c.topology ? *c.topology : Topology::star(c.n);
    result.topology_connected = topo.is_connected();
    weights.emplace(perception_matrix(topo, c.perception));
  }

  auto max_force = [&](const GapVector& g) {
    if (c.mode == SimMode::single_hop) return std::abs(single_hop_force(g, sys).value);
    double m = 0.0;
    for (double f : detail::forces(g.values(), *weights, sys.period())) m = std::max(m, std::abs(f));
    return sys.coupling() * m;
  };
  auto record = [&](int round) {
    result.trace.push_back({round, state.vector(), desync_error(state, c.period), max_force(state)});
  };

  const int steps_per_round = (c.mode == SimMode::single_hop && c.sweep) ? c.n : 1;
  result.initial_error = desync_error(state, c.period);
  record(0);
  for (int round = 1; round <= c.rounds; ++round) {
    try {
      for (int s = 0; s < steps_per_round; ++s)
        state = c.mode == SimMode::single_hop ? step_single_hop(state, sys) : step_multihop(state, *weights, sys);
    } catch (const OvershootError& e) {
      result.failure = RunFailure{round, e.gap_index(), e.value(), e.what()};
      break;
    } catch (const DegenerateStateError& e) {
      result.failure = RunFailure{round, 0, 0.0, e.what()};
      break;
    }
    result.rounds_executed = round;
    if (round % c.stride == 0 || round == c.rounds) record(round);
  }
  if (result.failure && (result.trace.empty() || result.trace.back().round != result.rounds_executed))
    record(result.rounds_executed);
  result.final_error = desync_error(state, c.period);
  result.converged = !result.failure && result.final_error <= c.convergence_threshold * c.period;
  return result;
}

}  // namespace desync
