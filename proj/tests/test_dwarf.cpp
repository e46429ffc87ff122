#include <gtest/gtest.h>

#include <random>

#include "desync/dwarf.hpp"
#include "desync/sim.hpp"
#include "oracles.hpp"

using namespace desync;

TEST(SingleHopForce, EquilibriumIsZero) {
  for (int n = 3; n <= 64; ++n) {
    const auto cfg = SystemConfig::derived(n, 1000.0);
    EXPECT_NEAR(single_hop_force(GapVector::equilibrium(n, 1000.0), cfg).value, 0.0, 1e-12) << n;
  }
  const auto cfg3 = SystemConfig::derived(3, 900.0);
  EXPECT_EQ(single_hop_force(GapVector({300, 300, 300}, 900.0), cfg3).value, 0.0);
}

TEST(SingleHopForce, FourNodeExample) {
  const auto cfg = SystemConfig::derived(4, 1000.0);
  const GapVector g({260, 250, 250, 240}, 1000.0);
  const auto f = single_hop_force(g, cfg);
  EXPECT_NEAR(f.value, cfg.coupling() * 1000.0 * (-1.0 / 260 + 1.0 / 240), 1e-12);
  ASSERT_EQ(f.contributions.size(), 2u);
}

TEST(SingleHopStep, FourNodeExample) {
  const auto cfg = SystemConfig::derived(4, 1000.0);
  const GapVector g({260, 250, 250, 240}, 1000.0);
  const auto next = step_single_hop(g, cfg);
  // Golden values from the independent term-by-term oracle.
  EXPECT_DOUBLE_EQ(next[0], 250.0);
  EXPECT_DOUBLE_EQ(next[1], 250.0);
  EXPECT_NEAR(next[2], 240.92074322545952, 1e-11);
  EXPECT_NEAR(next[3], 259.07925677454045, 1e-11);
}

TEST(SingleHopStep, FixedPointAndZeroForceRotation) {
  for (int n = 3; n <= 64; ++n) {
    const auto eq = GapVector::equilibrium(n, 1000.0);
    const auto next = step_single_hop(eq, SystemConfig::derived(n, 1000.0));
    for (int k = 0; k < n; ++k) EXPECT_NEAR(next[k], eq[k], 1e-12);
  }
  // D1 = Dn and mirrored interior: F = 0, pure rotation.
  const GapVector g({150, 100, 200, 100, 200, 100, 150}, 1000.0);
  const auto cfg = SystemConfig::derived(7, 1000.0);
  EXPECT_NEAR(single_hop_force(g, cfg).value, 0.0, 1e-12);
  const auto next = step_single_hop(g, cfg);
  const auto rot = g.rotated(1);
  for (int k = 0; k < 7; ++k) EXPECT_NEAR(next[k], rot[k], 1e-12);
}

TEST(SingleHopForce, AntisymmetryUnderMirror) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 3 + trial % 30;
    int rej = 0;
    const GapVector g(detail::random_gaps(n, 1000.0, rng(), rej), 1000.0);
    const auto cfg = SystemConfig::derived(n, 1000.0);
    const double f = single_hop_force(g, cfg).value;
    const double fm = single_hop_force(g.reversed(), cfg).value;
    EXPECT_NEAR(f, -fm, 1e-12 * std::max(1.0, std::abs(f))) << n;
  }
}

TEST(SingleHopStep, MatchesOracleAndConservesSum) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 3 + trial % 40;
    int rej = 0;
    const auto raw = detail::random_gaps(n, 1000.0, rng(), rej);
    const auto cfg = SystemConfig::derived(n, 1000.0);
    const auto expect = oracle::single_hop_step(raw, oracle::K(n, 1000.0), 1000.0);
    GapVector next = GapVector::equilibrium(n, 1000.0);
    try {
      next = step_single_hop(GapVector(raw, 1000.0), cfg);
    } catch (const OvershootError&) {
      EXPECT_TRUE(expect[n - 1] <= 0.0 || expect[n - 2] <= 0.0);
      continue;
    }
    for (int k = 0; k < n; ++k) EXPECT_NEAR(next[k], expect[k], 1e-9);
    EXPECT_NEAR(next.sum(), 1000.0, 1e-9 * 1000.0);
  }
}

TEST(SingleHopStep, OvershootIsAnError) {
  // A huge coupling drives the last gap negative.
  const auto cfg = SystemConfig::with_coupling(4, 1000.0, 1e4);
  const GapVector g({400, 200, 200, 200}, 1000.0);
  try {
    (void)step_single_hop(g, cfg);
    FAIL() << "expected overshoot";
  } catch (const OvershootError& e) {
    EXPECT_TRUE(e.gap_index() == 2 || e.gap_index() == 3);
    EXPECT_LE(e.value(), 0.0);
  }
}

TEST(SingleHopDynamics, ContractsTowardEquilibrium) {
  for (int n : {4, 5, 8, 13}) {
    SimConfig c;
    c.n = n;
    c.perturbation = Perturbation{1000.0 / (100.0 * n), 1};
    c.rounds = 400;
    c.stride = 400;
    const auto r = run_simulation(c);
    ASSERT_FALSE(r.failure);
    EXPECT_LT(r.final_error, r.initial_error) << n;
  }
}
