#pragma once

// Characteristic polynomials, eigenvalue bounds and stability certificates.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "desync/core.hpp"
#include "desync/jacobian.hpp"

namespace desync {

// Closed unit disc test |lambda| <= 1 + tol.
inline constexpr double kStabilityTolerance = 1e-9;

struct CharPoly {
  std::vector<double> coefficients;  // a_0 .. a_n, a_n == 1
  Parity parity;

  int degree() const noexcept { return static_cast<int>(coefficients.size()) - 1; }

  std::complex<double> operator()(std::complex<double> z) const {
    std::complex<double> acc = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * z + *it;
    return acc;
  }
};

/// f(l) = l^n - sum_{m=1}^{M} A/m^2 (l^{n-m} + l^m) + 2A Sigma_1 - 1, M = terms_per_side(n).
/// For even n the exponent n/2 is absent.
inline CharPoly char_poly_single_hop(const SystemConfig& config, Parity parity) {
  const int n = config.n();
  if (n < 4) throw DomainError("char_poly_single_hop: n must be >= 4");
  if (parity_of(n) != parity)
    throw DomainError(std::string("char_poly_single_hop: parity ") + to_string(parity) +
                      " does not match n = " + std::to_string(n));
  const double a = config.amplification();
  std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
  c[n] = 1.0;
  for (int m = 1; m <= terms_per_side(n); ++m) {
    const double v = a / (static_cast<double>(m) * m);
    c[n - m] -= v;
    c[m] -= v;
  }
  c[0] = 2.0 * a * partial_inverse_square_sum(1, n) - 1.0;
  return {std::move(c), parity};
}

/// Hirst-Macey: every zero z of a monic polynomial has |z| <= max(1, sum |a_i|).
inline double coefficient_sum_bound(const CharPoly& poly) {
  if (poly.coefficients.empty() || poly.coefficients.back() != 1.0)
    throw DomainError("coefficient_sum_bound: polynomial must be monic");
  double s = 0.0;
  for (int i = 0; i < poly.degree(); ++i) s += std::abs(poly.coefficients[i]);
  return std::max(1.0, s);
}

namespace detail {

inline void sort_spectrum(std::vector<std::complex<double>>& v) {
  std::sort(v.begin(), v.end(), [](const auto& x, const auto& y) {
    const double ax = std::abs(x), ay = std::abs(y);
    if (ax != ay) return ax > ay;
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
}

}  // namespace detail

/// Dense nonsymmetric eigensolve (Hessenberg reduction + shifted QR).
/// Sorted by decreasing modulus.
inline std::vector<std::complex<double>> eigenvalues(const JacobianMatrix& matrix) {
  if (matrix.entries.rows() != matrix.entries.cols())
    throw DomainError("eigenvalues: matrix is not square");
  if (!matrix.entries.allFinite())
    throw NumericalError(std::string("eigenvalues: non-finite entries in ") + to_string(matrix.provenance) +
                         " matrix");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(matrix.entries, false);
  if (solver.info() != Eigen::Success)
    throw NumericalError(std::string("eigenvalues: QR iteration did not converge for ") +
                         to_string(matrix.provenance) + " matrix of size " +
                         std::to_string(matrix.size()));
  std::vector<std::complex<double>> out(solver.eigenvalues().data(),
                                        solver.eigenvalues().data() + solver.eigenvalues().size());
  detail::sort_spectrum(out);
  return out;
}

inline double spectral_radius(const std::vector<std::complex<double>>& spectrum) {
  double r = 0.0;
  for (const auto& z : spectrum) r = std::max(r, std::abs(z));
  return r;
}

/// Roots via the eigenvalues of the companion matrix.
inline std::vector<std::complex<double>> polynomial_roots(const CharPoly& poly) {
  const int n = poly.degree();
  if (n < 1 || poly.coefficients.back() != 1.0) throw DomainError("polynomial_roots: need a monic polynomial");
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int r = 1; r < n; ++r) companion(r, r - 1) = 1.0;
  for (int r = 0; r < n; ++r) companion(r, n - 1) = -poly.coefficients[r];
  return eigenvalues({std::move(companion), Provenance::analytic_single_hop});
}

struct GershgorinDisc {
  std::complex<double> center;
  double radius;
};

struct GershgorinCertificate {
  std::vector<GershgorinDisc> discs;
  double max_extent = 0.0;  // max over rows of |center| + radius
  bool contained = false;   // max_extent <= 1
};

inline GershgorinCertificate gershgorin_certificate(const JacobianMatrix& matrix) {
  const int n = matrix.size();
  GershgorinCertificate cert;
  cert.discs.reserve(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    double radius = 0.0;
    for (int c = 0; c < n; ++c)
      if (c != r) radius += std::abs(matrix(r, c));
    const double center = matrix(r, r);
    cert.discs.push_back({center, radius});
    cert.max_extent = std::max(cert.max_extent, std::abs(center) + radius);
  }
  cert.contained = cert.max_extent <= 1.0;
  return cert;
}

struct Thresholds {
  double single_hop_eigen;        // 0.038597 n^0.126 zeta(2) <= 1
  double single_hop_hirst_macey;  // 0.038597 n^0.126 zeta(2) <= 1/2
  double star_gershgorin;         // 2 * 0.038597 (1 + zeta(2)) n^0.126 <= 1
};

/// Largest real n satisfying each closed-form inequality, with the partial
/// inverse-square sums replaced by zeta(2) = pi^2/6.
inline Thresholds stability_thresholds() {
  constexpr double zeta2 = std::numbers::pi * std::numbers::pi / 6.0;
  constexpr double a0 = 0.038597;
  constexpr double exponent = 0.126;
  auto solve = [&](double coefficient, double rhs) { return std::pow(rhs / coefficient, 1.0 / exponent); };
  return {
      solve(a0 * zeta2, 1.0),
      solve(a0 * zeta2, 0.5),
      solve(2.0 * a0 * (1.0 + zeta2), 1.0),
  };
}

/// sum |a_i| of f_even / f_odd with exact partial sums, without building the polynomial.
inline double hirst_macey_closed_form(int n) {
  const double s = 2.0 * amplification(n) * partial_inverse_square_sum(1, n);
  return std::abs(s - 1.0) + s;
}

/// |D0| + r of the (identical) star Gershgorin discs with exact partial sums.
/// The mask-exact rows sum to 1 with negative entries, so its extent is
/// 1 + 4A/(n/2-1)^2 and never certifies.
inline double star_disc_extent(int n, StarForm form) {
  if (n < 6 || n % 2 != 0) throw UnsupportedSizeError("star_disc_extent: n must be even and >= 6");
  const double a = amplification(n);
  const int m = n / 2;
  if (form == StarForm::mask_exact) {
    const double far = a / (static_cast<double>(m - 1) * (m - 1));
    return std::abs(1.0 - 4.0 * a + 2.0 * far) + 4.0 * a + 2.0 * far;
  }
  const int limit = form == StarForm::printed_derived_limit ? m - 2 : n - 2;
  const double center = 1.0 - 2.0 * a * (1.0 + detail::inverse_square_sum(1, limit));
  const double radius = 2.0 * a * (1.0 + detail::inverse_square_sum(1, m - 2));
  return std::abs(center) + radius;
}

enum class AnalysisMode { single_hop_even, single_hop_odd, star, general };

inline const char* to_string(AnalysisMode m) noexcept {
  switch (m) {
    case AnalysisMode::single_hop_even: return "single-hop-even";
    case AnalysisMode::single_hop_odd: return "single-hop-odd";
    case AnalysisMode::star: return "star";
    case AnalysisMode::general: return "general";
  }
  return "unknown";
}

enum class Verdict { stable, not_certified };

inline const char* to_string(Verdict v) noexcept { return v == Verdict::stable ? "stable" : "not-certified"; }

struct Certificate {
  std::string name;
  double bound;
  bool satisfied;
};

struct StabilityReport {
  int n = 0;
  AnalysisMode mode = AnalysisMode::general;
  std::vector<std::complex<double>> eigenvalues;
  double spectral_radius = 0.0;
  double margin = 0.0;  // 1 - spectral_radius; informational
  bool zero_eigenvalue = false;
  std::vector<Certificate> certificates;
  Thresholds thresholds{};
  Verdict verdict = Verdict::not_certified;
  std::optional<PerceptionMode> perception_mode;
  std::optional<StarForm> star_form;
};

struct StabilityOptions {
  // Used by the general mode; the Jacobian is taken at the equilibrium.
  std::optional<PerceptionMatrix> perception;
  std::optional<PerceptionMode> perception_mode;
  StarForm star_form = StarForm::mask_exact;
};

/// Jacobian + spectrum + certificates + thresholds for one configuration.
inline StabilityReport stability_report(const SystemConfig& config, AnalysisMode mode,
                                        const StabilityOptions& options = {}) {
  StabilityReport rep;
  rep.n = config.n();
  rep.mode = mode;
  rep.thresholds = stability_thresholds();

  JacobianMatrix jac{};
  switch (mode) {
    case AnalysisMode::single_hop_even:
    case AnalysisMode::single_hop_odd: {
      const Parity parity = mode == AnalysisMode::single_hop_even ? Parity::even : Parity::odd;
      jac = jacobian_single_hop(config, parity);
      const CharPoly poly = char_poly_single_hop(config, parity);
      const double hm = coefficient_sum_bound(poly);
      rep.certificates.push_back({"hirst-macey", hm, hm <= 1.0 + kStabilityTolerance});
      const double root_radius = spectral_radius(polynomial_roots(poly));
      rep.certificates.push_back({"char-poly-roots", root_radius, root_radius <= 1.0 + kStabilityTolerance});
      break;
    }
    case AnalysisMode::star: {
      rep.star_form = options.star_form;
      jac = jacobian_star(config, options.star_form);
      if (config.coupling_is_derived()) {
        const double extent = star_disc_extent(config.n(), options.star_form);
        rep.certificates.push_back({"gershgorin-closed-form", extent, extent <= 1.0 + kStabilityTolerance});
      }
      break;
    }
    case AnalysisMode::general: {
      if (!options.perception) throw ConfigError("stability_report: general mode needs a perception matrix");
      rep.perception_mode = options.perception_mode;
      jac = jacobian_multihop(GapVector::equilibrium(config.n(), config.period()), *options.perception, config);
      break;
    }
  }

  const GershgorinCertificate g = gershgorin_certificate(jac);
  rep.certificates.push_back({"gershgorin", g.max_extent, g.max_extent <= 1.0 + kStabilityTolerance});

  rep.eigenvalues = eigenvalues(jac);
  rep.spectral_radius = spectral_radius(rep.eigenvalues);
  rep.margin = 1.0 - rep.spectral_radius;
  rep.zero_eigenvalue = std::any_of(rep.eigenvalues.begin(), rep.eigenvalues.end(),
                                    [](const auto& z) { return std::abs(z) < 1e-8; });
  const bool certified = std::any_of(rep.certificates.begin(), rep.certificates.end(),
                                     [](const Certificate& c) { return c.satisfied; });
  rep.verdict = (rep.spectral_radius <= 1.0 + kStabilityTolerance || certified) ? Verdict::stable
                                                                                  : Verdict::not_certified;
  return rep;
}

}  // namespace desync
