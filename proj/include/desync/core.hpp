#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "desync/error.hpp"

namespace desync {

// [x]_n: x mod n, always in [0, n).
constexpr int ring_index(long long x, int n) noexcept {
  const long long r = x % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

enum class Parity { even, odd };

inline const char* to_string(Parity p) noexcept { return p == Parity::even ? "even" : "odd"; }

constexpr Parity parity_of(int n) noexcept { return n % 2 == 0 ? Parity::even : Parity::odd; }

/// K = 38.597 * n^-1.874 * T / 1000. T in milliseconds.
inline double coupling_constant(int n, double period) {
  if (n < 2) throw DomainError("coupling_constant: n must be >= 2, got " + std::to_string(n));
  if (!(period > 0.0)) throw DomainError("coupling_constant: period must be positive");
  return 38.597 * std::pow(static_cast<double>(n), -1.874) * period / 1000.0;
}

/// A = K n^2 / T = 0.038597 * n^0.126; the period cancels.
inline double amplification(int n) {
  if (n < 2) throw DomainError("amplification: n must be >= 2, got " + std::to_string(n));
  return 0.038597 * std::pow(static_cast<double>(n), 0.126);
}

/// Number of neighbours on each side that enter the single-hop force of the
/// firing node: ceil(n/2) - 1. For even n the opposite node is skipped, for
/// odd n both sides hold (n-1)/2 nodes.
constexpr int terms_per_side(int n) noexcept { return (n + 1) / 2 - 1; }

/// Sum_{i=s}^{M} 1/i^2 with M = terms_per_side(n). Empty sums are 0.
inline double partial_inverse_square_sum(int start, int n) {
  if (start < 1) throw DomainError("partial_inverse_square_sum: start index must be >= 1");
  if (n < 2) throw DomainError("partial_inverse_square_sum: n must be >= 2");
  double sum = 0.0;
  // Smallest terms first.
  for (int i = terms_per_side(n); i >= start; --i) sum += 1.0 / (static_cast<double>(i) * i);
  return sum;
}

// n nodes on a ring of length T with coupling K.
class SystemConfig {
 public:
  static SystemConfig derived(int n, double period) {
    return SystemConfig(n, period, coupling_constant(n, period), true);
  }

  static SystemConfig with_coupling(int n, double period, double coupling) {
    if (n < 2) throw DomainError("SystemConfig: n must be >= 2");
    if (!(period > 0.0)) throw DomainError("SystemConfig: period must be positive");
    if (!(coupling > 0.0)) throw DomainError("SystemConfig: coupling must be positive");
    return SystemConfig(n, period, coupling, false);
  }

  int n() const noexcept { return n_; }
  double period() const noexcept { return period_; }
  double coupling() const noexcept { return coupling_; }
  bool coupling_is_derived() const noexcept { return derived_; }

  // K n^2 / T for the configured K. Equals amplification(n) when K is derived.
  double amplification() const noexcept {
    return coupling_ * static_cast<double>(n_) * static_cast<double>(n_) / period_;
  }

  double equilibrium_gap() const noexcept { return period_ / n_; }

 private:
  SystemConfig(int n, double period, double coupling, bool derived)
      : n_(n), period_(period), coupling_(coupling), derived_(derived) {}

  int n_;
  double period_;
  double coupling_;
  bool derived_;
};

// Gap state: gaps[i] is the phase interval from node i to node i+1 on the ring.
class GapVector {
 public:
  static constexpr double kSumTolerance = 1e-9;

  GapVector(std::vector<double> gaps, double period) : gaps_(std::move(gaps)), period_(period) {
    if (!(period_ > 0.0)) throw DomainError("GapVector: period must be positive");
    if (gaps_.size() < 2) throw DomainError("GapVector: need at least two gaps");
    double sum = 0.0;
    for (std::size_t i = 0; i < gaps_.size(); ++i) {
      const double g = gaps_[i];
      if (!std::isfinite(g) || g <= 0.0 || g > period_ * (1.0 + kSumTolerance))
        throw DegenerateStateError("GapVector: gap " + std::to_string(i) + " = " +
                                   std::to_string(g) + " outside (0, T]");
      sum += g;
    }
    if (std::abs(sum - period_) > kSumTolerance * period_)
      throw DegenerateStateError("GapVector: gaps sum to " + std::to_string(sum) +
                                 ", expected " + std::to_string(period_));
  }

  static GapVector equilibrium(int n, double period) {
    if (n < 2) throw DomainError("GapVector::equilibrium: n must be >= 2");
    return GapVector(std::vector<double>(static_cast<std::size_t>(n), period / n), period);
  }

  int size() const noexcept { return static_cast<int>(gaps_.size()); }
  double period() const noexcept { return period_; }
  double operator[](std::size_t i) const noexcept { return gaps_[i]; }
  // Cyclic access, Delta_[k]_n.
  double at_ring(long long k) const noexcept { return gaps_[ring_index(k, size())]; }
  std::span<const double> values() const noexcept { return gaps_; }
  const std::vector<double>& vector() const noexcept { return gaps_; }

  double sum() const noexcept { return std::accumulate(gaps_.begin(), gaps_.end(), 0.0); }

  // Gap k of the result is gap k+shift of this one.
  GapVector rotated(int shift) const {
    std::vector<double> out(gaps_.size());
    for (int k = 0; k < size(); ++k) out[k] = at_ring(static_cast<long long>(k) + shift);
    return GapVector(std::move(out), period_);
  }

  GapVector reversed() const {
    return GapVector(std::vector<double>(gaps_.rbegin(), gaps_.rend()), period_);
  }

  friend bool operator==(const GapVector&, const GapVector&) = default;

 private:
  std::vector<double> gaps_;
  double period_;
};

// Firing phases of n nodes, each in [0, T). Order is arbitrary.
class PhaseVector {
 public:
  PhaseVector(std::vector<double> phases, double period)
      : phases_(std::move(phases)), period_(period) {
    if (!(period_ > 0.0)) throw DomainError("PhaseVector: period must be positive");
    for (double p : phases_)
      if (!std::isfinite(p) || p < 0.0 || p >= period_)
        throw DegenerateStateError("PhaseVector: phase " + std::to_string(p) + " outside [0, T)");
  }

  int size() const noexcept { return static_cast<int>(phases_.size()); }
  double period() const noexcept { return period_; }
  double operator[](std::size_t i) const noexcept { return phases_[i]; }
  std::span<const double> values() const noexcept { return phases_; }

 private:
  std::vector<double> phases_;
  double period_;
};

/// Sorts the phases around the ring and returns consecutive differences,
/// starting at the smallest phase. Duplicate phases are rejected.
inline GapVector ring_gaps(const PhaseVector& phases, double period) {
  if (phases.size() < 2) throw DomainError("ring_gaps: need at least two phases");
  if (period != phases.period()) throw DomainError("ring_gaps: period mismatch");
  std::vector<double> sorted(phases.values().begin(), phases.values().end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw DegenerateStateError("ring_gaps: duplicate phases");
  std::vector<double> gaps(sorted.size());
  for (std::size_t k = 0; k + 1 < sorted.size(); ++k) gaps[k] = sorted[k + 1] - sorted[k];
  gaps.back() = sorted.front() + period - sorted.back();
  return GapVector(std::move(gaps), period);
}

/// Inverse of ring_gaps up to rotation: node 0 at `anchor`, node k+1 at node k + gaps[k].
inline PhaseVector phases_from_gaps(const GapVector& gaps, double anchor = 0.0) {
  const double period = gaps.period();
  std::vector<double> phases(static_cast<std::size_t>(gaps.size()));
  double p = std::fmod(anchor, period);
  if (p < 0.0) p += period;
  for (int k = 0; k < gaps.size(); ++k) {
    phases[k] = p;
    p += gaps[k];
    if (p >= period) p -= period;
  }
  return PhaseVector(std::move(phases), period);
}

// Symmetric, loop-free physical connectivity. Labels follow phase order.
class Topology {
 public:
  using Edge = std::pair<int, int>;

  static Topology from_edges(int n, std::span<const Edge> edges) {
    if (n < 2) throw ConfigError("Topology: n must be >= 2");
    Topology t(n);
    for (const auto& [a, b] : edges) {
      if (a < 0 || b < 0 || a >= n || b >= n)
        throw ConfigError("Topology: edge (" + std::to_string(a) + "," + std::to_string(b) +
                          ") out of range");
      if (a == b) throw ConfigError("Topology: self edge at node " + std::to_string(a));
      if (t.adjacent(a, b))
        throw ConfigError("Topology: duplicate edge (" + std::to_string(a) + "," +
                          std::to_string(b) + ")");
      t.set(a, b);
    }
    return t;
  }

  static Topology star(int n, int hub = 0) {
    std::vector<Edge> e;
    for (int k = 0; k < n; ++k)
      if (k != hub) e.emplace_back(hub, k);
    return from_edges(n, e);
  }

  static Topology chain(int n) {
    std::vector<Edge> e;
    for (int k = 0; k + 1 < n; ++k) e.emplace_back(k, k + 1);
    return from_edges(n, e);
  }

  static Topology ring(int n) {
    if (n < 3) return chain(n);
    std::vector<Edge> e;
    for (int k = 0; k < n; ++k) e.emplace_back(k, (k + 1) % n);
    return from_edges(n, e);
  }

  static Topology full(int n) {
    std::vector<Edge> e;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) e.emplace_back(a, b);
    return from_edges(n, e);
  }

  int size() const noexcept { return n_; }
  bool adjacent(int a, int b) const noexcept { return adj_[index(a, b)] != 0; }

  std::vector<Edge> edges() const {
    std::vector<Edge> e;
    for (int a = 0; a < n_; ++a)
      for (int b = a + 1; b < n_; ++b)
        if (adjacent(a, b)) e.emplace_back(a, b);
    return e;
  }

  bool is_connected() const {
    std::vector<char> seen(static_cast<std::size_t>(n_), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n_; ++v)
        if (!seen[v] && adjacent(u, v)) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
    }
    return count == n_;
  }

 private:
  explicit Topology(int n) : n_(n), adj_(static_cast<std::size_t>(n) * n, 0) {}
  std::size_t index(int a, int b) const noexcept { return static_cast<std::size_t>(a) * n_ + b; }
  void set(int a, int b) {
    adj_[index(a, b)] = 1;
    adj_[index(b, a)] = 1;
  }

  int n_;
  std::vector<std::uint8_t> adj_;
};

enum class PerceptionMode { one_hop, two_hop };

inline const char* to_string(PerceptionMode m) noexcept {
  return m == PerceptionMode::one_hop ? "one-hop" : "two-hop";
}

// c(i, j) = 1 when node i knows node j's relative phase. Need not be symmetric.
class PerceptionMatrix {
 public:
  // Row-major n*n entries; any nonzero value counts as 1.
  PerceptionMatrix(int n, std::vector<std::uint8_t> entries) : n_(n), c_(std::move(entries)) {
    if (n_ < 2) throw DomainError("PerceptionMatrix: n must be >= 2");
    if (c_.size() != static_cast<std::size_t>(n_) * n_)
      throw DomainError("PerceptionMatrix: expected n*n entries");
    for (auto& v : c_) v = v ? 1 : 0;
    for (int i = 0; i < n_; ++i)
      if (c_[static_cast<std::size_t>(i) * n_ + i])
        throw DomainError("PerceptionMatrix: diagonal entry " + std::to_string(i) + " is set");
  }

  static PerceptionMatrix full(int n) {
    std::vector<std::uint8_t> c(static_cast<std::size_t>(n) * n, 1);
    for (int i = 0; i < n; ++i) c[static_cast<std::size_t>(i) * n + i] = 0;
    return PerceptionMatrix(n, std::move(c));
  }

  static PerceptionMatrix empty(int n) {
    return PerceptionMatrix(n, std::vector<std::uint8_t>(static_cast<std::size_t>(n) * n, 0));
  }

  int size() const noexcept { return n_; }
  bool operator()(int i, int j) const noexcept {
    return c_[static_cast<std::size_t>(i) * n_ + j] != 0;
  }
  // c(i, [i + offset]_n).
  bool at_offset(int i, int offset) const noexcept { return (*this)(i, ring_index(i + offset, n_)); }

  bool is_symmetric() const noexcept {
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        if ((*this)(i, j) != (*this)(j, i)) return false;
    return true;
  }

  // Relabel node k as node k - shift (mod n). Pairs with GapVector::rotated(shift).
  PerceptionMatrix rotated(int shift) const {
    std::vector<std::uint8_t> c(c_.size());
    for (int i = 0; i < n_; ++i)
      for (int j = 0; j < n_; ++j)
        c[static_cast<std::size_t>(i) * n_ + j] = (*this)(ring_index(i + shift, n_), ring_index(j + shift, n_));
    return PerceptionMatrix(n_, std::move(c));
  }

  friend bool operator==(const PerceptionMatrix&, const PerceptionMatrix&) = default;

 private:
  int n_;
  std::vector<std::uint8_t> c_;
};

/// one-hop: c = adjacency. two-hop: adjacency or a shared neighbour, diagonal cleared.
inline PerceptionMatrix perception_matrix(const Topology& topology, PerceptionMode mode) {
  const int n = topology.size();
  std::vector<std::uint8_t> c(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      bool seen = topology.adjacent(i, j);
      if (!seen && mode == PerceptionMode::two_hop)
        for (int k = 0; k < n && !seen; ++k) seen = topology.adjacent(i, k) && topology.adjacent(k, j);
      c[static_cast<std::size_t>(i) * n + j] = seen ? 1 : 0;
    }
  return PerceptionMatrix(n, std::move(c));
}

}  // namespace desync
