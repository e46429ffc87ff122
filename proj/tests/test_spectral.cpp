#include <gtest/gtest.h>

#include <random>

#include "desync/desync.hpp"
#include "oracles.hpp"

using namespace desync;

namespace {
constexpr double kT = 1000.0;

std::vector<std::complex<double>> char_poly_from_matrix(const JacobianMatrix& j) {
  // Faddeev-LeVerrier as an oracle for the characteristic polynomial.
  const int n = j.size();
  std::vector<std::complex<double>> c(n + 1);
  c[n] = 1.0;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= n; ++k) {
    m = j.entries * m + c[n - k + 1].real() * id;
    c[n - k] = -(j.entries * m).trace() / k;
  }
  return c;
}
}  // namespace

TEST(CharPoly, FourNode) {
  const auto cfg = SystemConfig::derived(4, kT);
  const auto p = char_poly_single_hop(cfg, Parity::even);
  const double a = amplification(4);
  ASSERT_EQ(p.degree(), 4);
  const double want[] = {2 * a - 1, -a, 0, -a, 1};
  for (int k = 0; k <= 4; ++k) EXPECT_NEAR(p.coefficients[k], want[k], 1e-15);
  EXPECT_NEAR(coefficient_sum_bound(p), 1.0, 1e-15);
  EXPECT_THROW(char_poly_single_hop(cfg, Parity::odd), DomainError);
}

TEST(CharPoly, StructureAndConstantTerm) {
  for (int n = 4; n <= 40; ++n) {
    const auto cfg = SystemConfig::derived(n, kT);
    const auto p = char_poly_single_hop(cfg, parity_of(n));
    EXPECT_NEAR(p.coefficients[0], 2 * amplification(n) * partial_inverse_square_sum(1, n) - 1, 1e-15);
    if (n % 2 == 0) {
      EXPECT_EQ(p.coefficients[n / 2], 0.0);
    }
    // lambda = 1 is always a root (sum conservation).
    EXPECT_NEAR(std::abs(p(1.0)), 0.0, 1e-14);
  }
  EXPECT_EQ(char_poly_single_hop(SystemConfig::derived(6, kT), Parity::even).coefficients[3], 0.0);
}

TEST(CharPoly, EqualsDeterminantOfJacobian) {
  for (int n = 4; n <= 16; ++n) {
    const auto cfg = SystemConfig::derived(n, kT);
    const auto p = char_poly_single_hop(cfg, parity_of(n));
    const auto q = char_poly_from_matrix(jacobian_single_hop(cfg, parity_of(n)));
    for (int k = 0; k <= n; ++k) EXPECT_NEAR(p.coefficients[k], q[k].real(), 1e-12) << n << ' ' << k;
  }
}

TEST(CoefficientSumBound, TrivialPolynomials) {
  EXPECT_EQ(coefficient_sum_bound({{0, 0, 1}, Parity::even}), 1.0);
  EXPECT_EQ(coefficient_sum_bound({{-3, 0, 1}, Parity::even}), 3.0);
  EXPECT_THROW(coefficient_sum_bound({{1, 2}, Parity::even}), DomainError);
}

TEST(CoefficientSumBound, ExactCollapse) {
  for (int n = 4; n <= 200; ++n) {
    if (2 * amplification(n) * partial_inverse_square_sum(1, n) > 1) continue;
    const auto p = char_poly_single_hop(SystemConfig::derived(n, kT), parity_of(n));
    double s = 0;
    for (int k = 0; k < n; ++k) s += std::abs(p.coefficients[k]);
    EXPECT_NEAR(s, 1.0, 1e-12) << n;
    EXPECT_NEAR(hirst_macey_closed_form(n), s, 1e-12);
  }
}

TEST(Eigenvalues, IdentityAndErrors) {
  const auto ev = eigenvalues({Eigen::MatrixXd::Identity(5, 5), Provenance::finite_difference});
  ASSERT_EQ(ev.size(), 5u);
  for (const auto& z : ev) EXPECT_NEAR(std::abs(z - 1.0), 0.0, 1e-14);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(3, 3);
  bad(0, 1) = std::nan("");
  EXPECT_THROW(eigenvalues({bad, Provenance::analytic_star}), NumericalError);
}

TEST(Eigenvalues, CompanionRootsMatchAberthOracle) {
  for (int n = 4; n <= 30; ++n) {
    const auto p = char_poly_single_hop(SystemConfig::derived(n, kT), parity_of(n));
    const auto roots = polynomial_roots(p);
    const auto ref = oracle::aberth_roots(p.coefficients);
    EXPECT_LT(oracle::spectrum_distance(roots, ref), 1e-7) << n;
    for (const auto& z : roots) EXPECT_LT(std::abs(p(z)), 1e-9);
  }
}

TEST(Eigenvalues, StarMatchesDftOracle) {
  for (auto form : {StarForm::mask_exact, StarForm::printed_derived_limit}) {
    for (int n : {6, 8, 12, 16, 32}) {
      const auto cfg = SystemConfig::derived(n, kT);
      const auto ev = eigenvalues(jacobian_star(cfg, form));
      const auto dft = oracle::circulant_eigenvalues(star_first_row(cfg, form));
      EXPECT_LT(oracle::spectrum_distance(ev, dft), 1e-8) << n;
    }
  }
}

TEST(Eigenvalues, Residuals) {
  std::mt19937_64 rng(12);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + trial;
    Eigen::MatrixXd m(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = nd(rng);
    for (const auto& z : eigenvalues({m, Provenance::finite_difference})) {
      const Eigen::MatrixXcd shifted = m.cast<std::complex<double>>() - z * Eigen::MatrixXcd::Identity(n, n);
      const double smin = Eigen::JacobiSVD<Eigen::MatrixXcd>(shifted).singularValues().minCoeff();
      EXPECT_LT(smin, 1e-9 * m.norm());
    }
  }
}

TEST(Gershgorin, Trivial) {
  const auto z = gershgorin_certificate({Eigen::MatrixXd::Zero(3, 3), Provenance::finite_difference});
  EXPECT_TRUE(z.contained);
  EXPECT_EQ(z.discs[0].radius, 0.0);
  EXPECT_FALSE(gershgorin_certificate({2.0 * Eigen::MatrixXd::Identity(3, 3), Provenance::finite_difference}).contained);
}

TEST(Gershgorin, StarDiscsIdentical) {
  for (int n = 6; n <= 30; n += 2) {
    const double a = amplification(n);
    const auto cfg = SystemConfig::derived(n, kT);
    const auto g = gershgorin_certificate(jacobian_star(cfg, StarForm::printed_derived_limit));
    double sum = 0;
    for (int j = 1; j <= n / 2 - 2; ++j) sum += 1.0 / (j * j);
    for (const auto& d : g.discs) {
      EXPECT_NEAR(d.center.real(), 1 - 2 * a * (1 + sum), 1e-14);
      EXPECT_NEAR(d.radius, 2 * a * (1 + sum), 1e-14);
    }
    EXPECT_NEAR(g.max_extent, star_disc_extent(n, StarForm::printed_derived_limit), 1e-13);
    EXPECT_NEAR(gershgorin_certificate(jacobian_star(cfg)).max_extent, star_disc_extent(n, StarForm::mask_exact),
                1e-13);
  }
}

TEST(Gershgorin, SoundOnRandomMatrices) {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 15;
    Eigen::MatrixXd m(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = nd(rng);
    const JacobianMatrix j{m, Provenance::finite_difference};
    const auto cert = gershgorin_certificate(j);
    for (const auto& z : eigenvalues(j)) {
      bool inside = false;
      for (const auto& d : cert.discs) inside = inside || std::abs(z - d.center) <= d.radius + 1e-8;
      EXPECT_TRUE(inside);
    }
  }
}

TEST(Thresholds, ReproducePublishedValues) {
  const auto t = stability_thresholds();
  EXPECT_NEAR(t.single_hop_eigen / 3.178e9, 1.0, 0.01);
  EXPECT_NEAR(t.single_hop_hirst_macey / 1.29e7, 1.0, 0.01);
  EXPECT_NEAR(t.star_gershgorin / 299307.0, 1.0, 0.01);
}

TEST(Thresholds, StarClosedFormAboveThresholdUnsatisfied) {
  const int n = 2 * static_cast<int>(stability_thresholds().star_gershgorin);
  EXPECT_GT(star_disc_extent(n, StarForm::printed_derived_limit), 1.0);
  EXPECT_LE(star_disc_extent(1000, StarForm::printed_derived_limit), 1.0);
}

TEST(StabilityReport, StarEightGolden) {
  const auto rep = stability_report(SystemConfig::derived(8, kT), AnalysisMode::star);
  EXPECT_EQ(rep.verdict, Verdict::stable);
  EXPECT_NEAR(rep.spectral_radius, 1.0, 1e-9);
  EXPECT_FALSE(rep.zero_eigenvalue);
  ASSERT_TRUE(rep.star_form);
  EXPECT_EQ(*rep.star_form, StarForm::mask_exact);
  // The FD-matching form touches the unit circle at lambda = 1 with negative
  // off-diagonals, so Gershgorin overshoots by 4A/(n/2-1)^2; the verdict rests on the spectrum.
  const double a = amplification(8);
  bool seen = false;
  for (const auto& c : rep.certificates)
    if (c.name == "gershgorin-closed-form") {
      seen = true;
      EXPECT_NEAR(c.bound, 1.0 + 4.0 * a / 9.0, 1e-14);
      EXPECT_FALSE(c.satisfied);
    }
  EXPECT_TRUE(seen);
  // Printed form: discs reach exactly 1 while D0 >= 0.
  const auto printed = stability_report(SystemConfig::derived(8, kT), AnalysisMode::star,
                                        {std::nullopt, std::nullopt, StarForm::printed_derived_limit});
  EXPECT_TRUE(printed.certificates.front().satisfied);
  // Apart from lambda = 1 the star spectrum is strictly inside the unit disc.
  EXPECT_LT(std::abs(rep.eigenvalues[1]), 1.0);
}

TEST(StabilityReport, FourNodeSingleHop) {
  const auto rep = stability_report(SystemConfig::derived(4, kT), AnalysisMode::single_hop_even);
  EXPECT_EQ(rep.verdict, Verdict::stable);
  EXPECT_EQ(rep.mode, AnalysisMode::single_hop_even);
  ASSERT_GE(rep.certificates.size(), 3u);
  EXPECT_EQ(rep.certificates[0].name, "hirst-macey");
  EXPECT_TRUE(rep.certificates[0].satisfied);
  EXPECT_NEAR(rep.spectral_radius, 1.0, 1e-9);
  EXPECT_NEAR(rep.margin, 1.0 - rep.spectral_radius, 0.0);
}

TEST(StabilityReport, GeneralModeNeedsPerception) {
  EXPECT_THROW(stability_report(SystemConfig::derived(8, kT), AnalysisMode::general), ConfigError);
  StabilityOptions o;
  o.perception = perception_matrix(Topology::chain(8), PerceptionMode::two_hop);
  o.perception_mode = PerceptionMode::two_hop;
  const auto rep = stability_report(SystemConfig::derived(8, kT), AnalysisMode::general, o);
  EXPECT_EQ(rep.eigenvalues.size(), 8u);
  EXPECT_TRUE(rep.perception_mode.has_value());
}

TEST(StabilityReport, VerdictRequiresEvidence) {
  // A huge overridden coupling makes the single-hop map unstable.
  const auto rep = stability_report(SystemConfig::with_coupling(10, kT, 500.0), AnalysisMode::single_hop_even);
  EXPECT_GT(rep.spectral_radius, 1.0);
  EXPECT_EQ(rep.verdict, Verdict::not_certified);
}
