#pragma once

// Single-hop DWARF: node 0 fires, adjusts by the force of every other node
// except the one exactly opposite, then the ring is relabelled so that the
// old node 1 becomes node 0.

#include <span>
#include <string>
#include <vector>

#include "desync/core.hpp"

namespace desync {

struct ForceContribution {
  int source_offset;  // node [0 + offset]_n relative to the firing node
  double term;
};

struct SingleHopForce {
  double value = 0.0;
  std::vector<ForceContribution> contributions;
};

namespace detail {

inline void require_single_hop_state(std::span<const double> gaps) {
  if (gaps.size() < 3) throw DomainError("single-hop dynamics need n >= 3");
  for (std::size_t k = 0; k < gaps.size(); ++k)
    if (!(gaps[k] > 0.0))
      throw DegenerateStateError("single-hop: gap " + std::to_string(k) + " is not positive");
}

// KT * ( -sum_m 1/(D1+..+Dm) + sum_m 1/(Dn+..+D(n-m+1)) ), m = 1..terms_per_side(n).
// D1 = gaps[0], Dn = gaps[n-1].
inline SingleHopForce single_hop_force(std::span<const double> gaps, double coupling, double period,
                                       bool with_contributions) {
  require_single_hop_state(gaps);
  const int n = static_cast<int>(gaps.size());
  const int per_side = terms_per_side(n);
  const double kt = coupling * period;
  SingleHopForce f;
  if (with_contributions) f.contributions.reserve(2 * static_cast<std::size_t>(per_side));
  double ahead = 0.0;
  double behind = 0.0;
  double sum_ahead = 0.0;
  double sum_behind = 0.0;
  for (int m = 1; m <= per_side; ++m) {
    ahead += gaps[m - 1];
    behind += gaps[n - m];
    const double push_back = -kt / ahead;
    const double push_fwd = kt / behind;
    sum_ahead += push_back;
    sum_behind += push_fwd;
    if (with_contributions) {
      f.contributions.push_back({m, push_back});
      f.contributions.push_back({n - m, push_fwd});
    }
  }
  f.value = sum_ahead + sum_behind;
  return f;
}

inline std::vector<double> step_single_hop(std::span<const double> gaps, double coupling,
                                           double period) {
  const double force = single_hop_force(gaps, coupling, period, false).value;
  const std::size_t n = gaps.size();
  std::vector<double> next(n);
  for (std::size_t k = 0; k + 2 < n; ++k) next[k] = gaps[k + 1];
  next[n - 2] = gaps[n - 1] + force;
  next[n - 1] = gaps[0] - force;
  return next;
}

}  // namespace detail

inline SingleHopForce single_hop_force(const GapVector& gaps, const SystemConfig& config) {
  if (gaps.size() != config.n()) throw DomainError("single_hop_force: gap count != n");
  return detail::single_hop_force(gaps.values(), config.coupling(), config.period(), true);
}

/// One firing of node 0 followed by relabelling:
/// (D2, ..., D(n-1), Dn + F, D1 - F).
inline GapVector step_single_hop(const GapVector& gaps, const SystemConfig& config) {
  if (gaps.size() != config.n()) throw DomainError("step_single_hop: gap count != n");
  auto next = detail::step_single_hop(gaps.values(), config.coupling(), config.period());
  const std::size_t n = next.size();
  for (std::size_t k : {n - 2, n - 1})
    if (!(next[k] > 0.0))
      throw OvershootError("step_single_hop: gap " + std::to_string(k) + " driven to " +
                               std::to_string(next[k]),
                           k, next[k]);
  return GapVector(std::move(next), gaps.period());
}

}  // namespace desync
