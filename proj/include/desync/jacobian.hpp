#pragma once

// Jacobians of the desynchronization maps at (and, for the general multi-hop
// builder, away from) the equilibrium, plus a central-difference oracle.

#include <Eigen/Dense>

#include <cmath>
#include <concepts>
#include <span>
#include <string>
#include <vector>

#include "desync/core.hpp"
#include "desync/dwarf.hpp"
#include "desync/mdwarf.hpp"

namespace desync {

enum class Provenance { analytic_single_hop, analytic_multihop, analytic_star, finite_difference };

inline const char* to_string(Provenance p) noexcept {
  switch (p) {
    case Provenance::analytic_single_hop: return "analytic-single-hop";
    case Provenance::analytic_multihop: return "analytic-multihop";
    case Provenance::analytic_star: return "analytic-star";
    case Provenance::finite_difference: return "finite-difference";
  }
  return "unknown";
}

struct JacobianMatrix {
  Eigen::MatrixXd entries;
  Provenance provenance;

  int size() const noexcept { return static_cast<int>(entries.rows()); }
  double operator()(int r, int c) const { return entries(r, c); }
};

/// Last two rows carry A*Sigma_s blocks around a zero band of one (odd n) or
/// two (even n) columns; every other row shifts the state by one.
/// A is taken from the configured coupling, so an overridden K is honoured.
inline JacobianMatrix jacobian_single_hop(const SystemConfig& config, Parity parity) {
  const int n = config.n();
  if (n < 4) throw DomainError("jacobian_single_hop: n must be >= 4");
  if (parity_of(n) != parity)
    throw DomainError(std::string("jacobian_single_hop: parity ") + to_string(parity) +
                      " does not match n = " + std::to_string(n));
  const double a = config.amplification();
  const int per_side = terms_per_side(n);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int r = 0; r + 2 < n; ++r) j(r, r + 1) = 1.0;
  // Row n-2 is d(D_{n-1}')/dD, row n-1 is d(D_n')/dD (1-based gap names).
  for (int s = 1; s <= per_side; ++s) {
    const double block = a * partial_inverse_square_sum(s, n);
    j(n - 2, s - 1) += block;
    j(n - 1, s - 1) -= block;
    j(n - 2, n - s) -= block;
    j(n - 1, n - s) += block;
  }
  j(n - 2, n - 1) += 1.0;
  j(n - 1, 0) += 1.0;
  return {std::move(j), Provenance::analytic_single_hop};
}

namespace detail {

// dF_i/dD_p for every p, accumulated window by window. A negative-side term
// -w T / W (W = D_i + .. + D_{i+d-1}) contributes +w T / W^2 to each gap in its
// window; a positive-side term +w T / W (W = D_{i+d} + .. + D_{i+n-1})
// contributes -w T / W^2. Gaps i+m-1 and i+m never fall in a window.
inline void force_gradient(std::span<const double> gaps, const ForceWeights& w, int i, double period,
                           std::span<double> out) {
  const int n = w.size();
  const int m = w.half();
  std::fill(out.begin(), out.end(), 0.0);
  double window = 0.0;
  for (int d = 1; d < m; ++d) {
    window += gaps[ring_index(i + d - 1, n)];
    if (const int wt = w(i, d)) {
      const double g = wt * period / (window * window);
      for (int k = 0; k < d; ++k) out[ring_index(i + k, n)] += g;
    }
  }
  window = 0.0;
  for (int d = n - 1; d > m; --d) {
    window += gaps[ring_index(i + d, n)];
    if (const int wt = w(i, d)) {
      const double g = wt * period / (window * window);
      for (int k = d; k < n; ++k) out[ring_index(i + k, n)] -= g;
    }
  }
}

}  // namespace detail

/// dD_i'/dD_p = [p == i] + K dF_[i+1]/dD_p - K dF_i/dD_p for any state and
/// perception, masks evaluated once from the perception matrix.
inline JacobianMatrix jacobian_multihop(const GapVector& gaps, const ForceWeights& weights,
                                        const SystemConfig& config) {
  const int n = config.n();
  if (n < 6) throw UnsupportedSizeError("jacobian_multihop: n must be >= 6, got " + std::to_string(n));
  if (gaps.size() != n || weights.size() != n) throw DomainError("jacobian_multihop: size mismatch");
  detail::require_multihop_state(gaps.values(), n);
  const double k = config.coupling();
  std::vector<Eigen::VectorXd> grad(static_cast<std::size_t>(n), Eigen::VectorXd(n));
  for (int i = 0; i < n; ++i)
    detail::force_gradient(gaps.values(), weights, i, config.period(),
                           std::span<double>(grad[i].data(), static_cast<std::size_t>(n)));
  Eigen::MatrixXd j(n, n);
  for (int i = 0; i < n; ++i) {
    j.row(i) = k * (grad[ring_index(i + 1, n)] - grad[i]).transpose();
    j(i, i) += 1.0;
  }
  return {std::move(j), Provenance::analytic_multihop};
}

inline JacobianMatrix jacobian_multihop(const GapVector& gaps, const PerceptionMatrix& perception,
                                        const SystemConfig& config) {
  if (perception.size() != config.n()) throw DomainError("jacobian_multihop: size mismatch");
  if (config.n() < 6)
    throw UnsupportedSizeError("jacobian_multihop: n must be >= 6, got " + std::to_string(config.n()));
  return jacobian_multihop(gaps, ForceWeights(perception), config);
}

// Closed forms for the star topology (every node perceives every other).
enum class StarForm {
  // Circulant obtained from the mask algebra itself: under full perception
  // each side reduces to 2 f(closest) - f(farthest). Matches finite differences.
  mask_exact,
  // Printed circulant with D0 = 1 - 2A(1 + sum_{j=1}^{n/2-2} 1/j^2).
  printed_derived_limit,
  // Printed circulant with D0 = 1 - 2A(1 + sum_{j=1}^{n-2} 1/j^2).
  printed_literal_limit,
};

inline const char* to_string(StarForm f) noexcept {
  switch (f) {
    case StarForm::mask_exact: return "mask-exact";
    case StarForm::printed_derived_limit: return "printed-derived-limit";
    case StarForm::printed_literal_limit: return "printed-literal-limit";
  }
  return "unknown";
}

namespace detail {

inline double inverse_square_sum(int first, int last) {
  double s = 0.0;
  for (int j = last; j >= first; --j) s += 1.0 / (static_cast<double>(j) * j);
  return s;
}

}  // namespace detail

/// First row of the star circulant for the requested form.
inline std::vector<double> star_first_row(const SystemConfig& config, StarForm form) {
  const int n = config.n();
  if (n < 6 || n % 2 != 0)
    throw UnsupportedSizeError("jacobian_star: n must be even and >= 6, got " + std::to_string(n));
  const double a = config.amplification();
  const int m = n / 2;
  std::vector<double> row(static_cast<std::size_t>(n), 0.0);
  row[1] = 2.0 * a;
  row[n - 1] = 2.0 * a;
  if (form == StarForm::mask_exact) {
    const double far = a / (static_cast<double>(m - 1) * (m - 1));
    row[m - 1] -= far;
    row[m + 1] -= far;
    row[0] = 1.0 - 4.0 * a + 2.0 * far;
    return row;
  }
  for (int j = 2; j <= m - 2; ++j) {
    const double v = a / (static_cast<double>(j) * j);
    row[j] = v;
    row[n - j] = v;
  }
  const int limit = form == StarForm::printed_derived_limit ? m - 2 : n - 2;
  row[0] = 1.0 - 2.0 * a * (1.0 + detail::inverse_square_sum(1, limit));
  return row;
}

inline JacobianMatrix jacobian_star(const SystemConfig& config, StarForm form = StarForm::mask_exact) {
  const auto first = star_first_row(config, form);
  const int n = config.n();
  Eigen::MatrixXd j(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) j(r, c) = first[ring_index(c - r, n)];
  return {std::move(j), Provenance::analytic_star};
}

template <typename Map>
concept StateMap = requires(Map f, std::span<const double> x) {
  { f(x) } -> std::convertible_to<std::vector<double>>;
};

/// Central differences (f(x + h e_j) - f(x - h e_j)) / 2h, column by column.
template <StateMap Map>
JacobianMatrix finite_difference_jacobian(Map&& map, std::span<const double> point, double h) {
  if (!(h > 0.0)) throw DomainError("finite_difference_jacobian: step must be positive");
  const int n = static_cast<int>(point.size());
  for (int k = 0; k < n; ++k)
    if (!(point[k] > 2.0 * h))
      throw DomainError("finite_difference_jacobian: coordinate " + std::to_string(k) +
                        " not interior for step h");
  Eigen::MatrixXd j(n, n);
  std::vector<double> probe(point.begin(), point.end());
  for (int c = 0; c < n; ++c) {
    std::vector<double> up, down;
    try {
      probe[c] = point[c] + h;
      up = map(std::span<const double>(probe));
      probe[c] = point[c] - h;
      down = map(std::span<const double>(probe));
    } catch (const std::exception& e) {
      throw ProbeError("finite_difference_jacobian: map failed probing column " + std::to_string(c) +
                           ": " + e.what(),
                       static_cast<std::size_t>(c));
    }
    probe[c] = point[c];
    if (static_cast<int>(up.size()) != n || static_cast<int>(down.size()) != n)
      throw ProbeError("finite_difference_jacobian: map changed dimension at column " + std::to_string(c),
                       static_cast<std::size_t>(c));
    for (int r = 0; r < n; ++r) j(r, c) = (up[r] - down[r]) / (2.0 * h);
  }
  return {std::move(j), Provenance::finite_difference};
}

inline double max_abs_difference(const JacobianMatrix& a, const JacobianMatrix& b) {
  if (a.size() != b.size()) throw DomainError("max_abs_difference: size mismatch");
  return (a.entries - b.entries).cwiseAbs().maxCoeff();
}

// State-update maps over raw gap vectors, as consumed by the FD oracle.
inline auto single_hop_map(const SystemConfig& config) {
  return [config](std::span<const double> x) {
    return detail::step_single_hop(x, config.coupling(), config.period());
  };
}

inline auto multihop_map(const PerceptionMatrix& perception, const SystemConfig& config) {
  return [weights = ForceWeights(perception), config](std::span<const double> x) {
    return detail::step_multihop(x, weights, config.coupling(), config.period());
  };
}

}  // namespace desync
