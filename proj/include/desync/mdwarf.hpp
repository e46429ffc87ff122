#pragma once

// Multi-hop M-DWARF force algebra.
//
// Offsets are measured forward around the ring from the observer i: node
// [i + d]_n sits at offset d. With m = floor(n/2), offsets 1..m-1 push i
// backwards (negative forces), offsets m+1..n-1 push it forwards (positive
// forces) and offset m is ignored. Within each direction a perceived node
// contributes
//   closest    : it is the nearest perceived node          (R)
//   resistance : some perceived node lies farther out      (S)
//   absorption : some perceived node lies nearer to i      (T)
// and the total force is (closest + resistance - absorption)+ minus the same
// combination in the negative direction.

#include <span>
#include <string>
#include <vector>

#include "desync/core.hpp"

namespace desync {

enum class Direction { positive, negative };

struct MaskEntry {
  bool perceived = false;
  bool closest = false;     // R: no perceived node strictly nearer (not gated by c)
  bool resistance = false;  // c * S
  bool absorption = false;  // c * T

  // Multiplier of the pairwise force in the total force block of its direction.
  int weight() const noexcept {
    if (!perceived) return 0;
    return (closest ? 1 : 0) + (resistance ? 1 : 0) - (absorption ? 1 : 0);
  }
};

class ForceMasks {
 public:
  ForceMasks(int n, int observer) : n_(n), observer_(observer), entries_(static_cast<std::size_t>(n)) {}

  int size() const noexcept { return n_; }
  int observer() const noexcept { return observer_; }
  int half() const noexcept { return n_ / 2; }

  // Negative offsets 1..half-1, positive offsets half+1..n-1.
  int negative_begin() const noexcept { return 1; }
  int negative_end() const noexcept { return half(); }
  int positive_begin() const noexcept { return half() + 1; }
  int positive_end() const noexcept { return n_; }

  bool in_negative_range(int offset) const noexcept { return offset >= 1 && offset < half(); }
  bool in_positive_range(int offset) const noexcept { return offset > half() && offset < n_; }

  const MaskEntry& at(int offset) const noexcept { return entries_[offset]; }
  MaskEntry& at(int offset) noexcept { return entries_[offset]; }

 private:
  int n_;
  int observer_;
  std::vector<MaskEntry> entries_;  // index 0 and `half` stay all-false
};

/// Closest / resistance / absorption masks seen from node i.
inline ForceMasks force_masks(const PerceptionMatrix& perception, int i) {
  const int n = perception.size();
  if (n < 4) throw DomainError("force_masks: n must be >= 4");
  if (i < 0 || i >= n) throw DomainError("force_masks: node index out of range");
  ForceMasks masks(n, i);
  const int m = n / 2;
  auto seen = [&](int d) { return perception.at_offset(i, d); };

  // Negative side: nearest is offset 1, farthest m-1.
  bool any_nearer = false;
  for (int d = 1; d < m; ++d) {
    MaskEntry& e = masks.at(d);
    e.perceived = seen(d);
    e.closest = !any_nearer;
    bool any_farther = false;
    for (int f = d + 1; f < m && !any_farther; ++f) any_farther = seen(f);
    e.resistance = e.perceived && any_farther;
    e.absorption = e.perceived && any_nearer;
    any_nearer = any_nearer || e.perceived;
  }

  // Positive side: nearest is offset n-1, farthest m+1.
  any_nearer = false;
  for (int d = n - 1; d > m; --d) {
    MaskEntry& e = masks.at(d);
    e.perceived = seen(d);
    e.closest = !any_nearer;
    bool any_farther = false;
    for (int f = d - 1; f > m && !any_farther; --f) any_farther = seen(f);
    e.resistance = e.perceived && any_farther;
    e.absorption = e.perceived && any_nearer;
    any_nearer = any_nearer || e.perceived;
  }
  return masks;
}

// Per node, per offset multiplier of the pairwise force (see MaskEntry::weight).
// The single source of truth shared by the force and the analytic Jacobian.
class ForceWeights {
 public:
  explicit ForceWeights(const PerceptionMatrix& perception)
      : n_(perception.size()), w_(static_cast<std::size_t>(n_) * n_, 0) {
    for (int i = 0; i < n_; ++i) {
      const ForceMasks masks = force_masks(perception, i);
      for (int d = 1; d < n_; ++d) w_[static_cast<std::size_t>(i) * n_ + d] = masks.at(d).weight();
    }
  }

  int size() const noexcept { return n_; }
  int half() const noexcept { return n_ / 2; }
  int operator()(int i, int offset) const noexcept { return w_[static_cast<std::size_t>(i) * n_ + offset]; }

 private:
  int n_;
  std::vector<int> w_;
};

struct PairwiseForce {
  Direction direction;
  double magnitude;
};

/// f+ = T / sum_{k=j}^{i-1} D_[k],  f- = T / sum_{k=i}^{j-1} D_[k].
inline PairwiseForce pairwise_force(const GapVector& gaps, int i, int j, Direction direction) {
  const int n = gaps.size();
  if (i < 0 || j < 0 || i >= n || j >= n) throw DomainError("pairwise_force: index out of range");
  if (i == j) throw DomainError("pairwise_force: i == j");
  const int from = direction == Direction::positive ? j : i;
  const int to = direction == Direction::positive ? i : j;
  double window = 0.0;
  for (int k = from; k != to; k = ring_index(k + 1, n)) window += gaps[k];
  return {direction, gaps.period() / window};
}

struct ForceBreakdown {
  double closest_positive = 0.0;
  double resistance_positive = 0.0;
  double absorption_positive = 0.0;
  double closest_negative = 0.0;
  double resistance_negative = 0.0;
  double absorption_negative = 0.0;
};

struct TotalForce {
  double value = 0.0;
  ForceBreakdown breakdown;
};

namespace detail {

inline void require_multihop_state(std::span<const double> gaps, int n) {
  if (n < 4) throw DomainError("multi-hop dynamics need n >= 4");
  if (static_cast<int>(gaps.size()) != n) throw DomainError("multi-hop: gap count != n");
  for (std::size_t k = 0; k < gaps.size(); ++k)
    if (!(gaps[k] > 0.0))
      throw DegenerateStateError("multi-hop: gap " + std::to_string(k) + " is not positive");
}

// F_i from precomputed weights. Forward window for offset d covers gaps
// i..i+d-1, backward window for offset d covers gaps i+d..i+n-1.
inline double total_force(std::span<const double> gaps, const ForceWeights& w, int i, double period) {
  const int n = w.size();
  const int m = w.half();
  double negative = 0.0;
  double window = 0.0;
  for (int d = 1; d < m; ++d) {
    window += gaps[ring_index(i + d - 1, n)];
    if (const int wt = w(i, d)) negative += wt * (period / window);
  }
  double positive = 0.0;
  window = 0.0;
  for (int d = n - 1; d > m; --d) {
    window += gaps[ring_index(i + d, n)];
    if (const int wt = w(i, d)) positive += wt * (period / window);
  }
  return positive - negative;
}

inline std::vector<double> forces(std::span<const double> gaps, const ForceWeights& w, double period) {
  std::vector<double> f(static_cast<std::size_t>(w.size()));
  for (int i = 0; i < w.size(); ++i) f[i] = total_force(gaps, w, i, period);
  return f;
}

// Synchronous transition D_i' = D_i + K F_[i+1] - K F_i.
inline std::vector<double> step_multihop(std::span<const double> gaps, const ForceWeights& w,
                                         double coupling, double period) {
  require_multihop_state(gaps, w.size());
  const auto f = forces(gaps, w, period);
  const int n = w.size();
  std::vector<double> next(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) next[i] = gaps[i] + coupling * f[ring_index(i + 1, n)] - coupling * f[i];
  return next;
}

}  // namespace detail

/// F_i with its closest / resistance / absorption sub-sums.
inline TotalForce total_force(const GapVector& gaps, const PerceptionMatrix& perception, int i,
                              const SystemConfig& config) {
  const int n = config.n();
  if (gaps.size() != n || perception.size() != n)
    throw DomainError("total_force: size mismatch between gaps, perception and config");
  detail::require_multihop_state(gaps.values(), n);
  const ForceMasks masks = force_masks(perception, i);
  const double T = config.period();
  TotalForce out;
  ForceBreakdown& b = out.breakdown;
  const int m = n / 2;
  double window = 0.0;
  for (int d = 1; d < m; ++d) {
    window += gaps.at_ring(i + d - 1);
    const MaskEntry& e = masks.at(d);
    if (!e.perceived) continue;
    const double f = T / window;
    if (e.closest) b.closest_negative += f;
    if (e.resistance) b.resistance_negative += f;
    if (e.absorption) b.absorption_negative += f;
  }
  window = 0.0;
  for (int d = n - 1; d > m; --d) {
    window += gaps.at_ring(i + d);
    const MaskEntry& e = masks.at(d);
    if (!e.perceived) continue;
    const double f = T / window;
    if (e.closest) b.closest_positive += f;
    if (e.resistance) b.resistance_positive += f;
    if (e.absorption) b.absorption_positive += f;
  }
  out.value = (b.closest_positive + b.resistance_positive - b.absorption_positive) -
              (b.closest_negative + b.resistance_negative - b.absorption_negative);
  return out;
}

inline std::vector<double> multihop_forces(const GapVector& gaps, const PerceptionMatrix& perception,
                                           const SystemConfig& config) {
  if (gaps.size() != config.n() || perception.size() != config.n())
    throw DomainError("multihop_forces: size mismatch");
  detail::require_multihop_state(gaps.values(), config.n());
  return detail::forces(gaps.values(), ForceWeights(perception), config.period());
}

/// All forces from the pre-update state, applied simultaneously.
inline GapVector step_multihop(const GapVector& gaps, const ForceWeights& weights,
                               const SystemConfig& config) {
  if (gaps.size() != config.n() || weights.size() != config.n())
    throw DomainError("step_multihop: size mismatch");
  auto next = detail::step_multihop(gaps.values(), weights, config.coupling(), config.period());
  for (std::size_t k = 0; k < next.size(); ++k)
    if (!(next[k] > 0.0))
      throw OvershootError("step_multihop: gap " + std::to_string(k) + " driven to " +
                               std::to_string(next[k]),
                           k, next[k]);
  return GapVector(std::move(next), gaps.period());
}

inline GapVector step_multihop(const GapVector& gaps, const PerceptionMatrix& perception,
                               const SystemConfig& config) {
  if (perception.size() != config.n()) throw DomainError("step_multihop: size mismatch");
  return step_multihop(gaps, ForceWeights(perception), config);
}

}  // namespace desync
