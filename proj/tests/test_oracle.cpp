#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "fmmc/closed_form.hpp"
#include "fmmc/error.hpp"
#include "fmmc/oracle.hpp"
#include "fmmc/spectral.hpp"
#include "support.hpp"

using namespace fmmc;
namespace gen = fmmc::test_support;

namespace {

const EquilibriumDistribution kExample1({3, 1, 1, 1, 3});
const EquilibriumDistribution kExample2({1, 1, 1, 1, 2});

void expect_feasible(const EquilibriumDistribution& pi, const OracleSolution& s,
                     const Topology& t) {
  const auto report = validate_chain(pi, s.q_opt, t);
  EXPECT_TRUE(report.feasible());
  EXPECT_NEAR(slem(pi, s.q_opt, t).slem, s.slem, 1e-12);
}

}  // namespace

TEST(MinimizeSlem, UniformThreeBlades) {
  const EquilibriumDistribution pi(std::vector<double>(7, 1.0));
  const Topology t = build_friendship_graph(3);
  const auto s = minimize_slem(pi, t, {0, 0, 0});
  EXPECT_TRUE(s.converged);
  EXPECT_LE(s.certificate_gap, 1e-6);
  EXPECT_NEAR(s.slem, 5.0 / 6, 1e-6);
  expect_feasible(pi, s, t);
}

TEST(MinimizeSlem, Example1AtZeroFriendWeights) {
  const Topology t = build_friendship_graph(2);
  const auto s = minimize_slem(kExample1, t, {0, 0});
  EXPECT_TRUE(s.converged);
  EXPECT_NEAR(s.slem, 0.5, 1e-6);
  expect_feasible(kExample1, s, t);
}

TEST(MinimizeSlem, Example2AtZeroFriendWeights) {
  const Topology t = build_friendship_graph(2);
  const auto s = minimize_slem(kExample2, t, {0, 0});
  EXPECT_NEAR(s.slem, 0.8, 1e-6);
}

TEST(MinimizeSlem, TightToleranceReachesClosedForm) {
  OracleOptions o;
  o.tol = 1e-11;
  const auto s = minimize_slem(kExample2, build_friendship_graph(2), {0.1, 0.05}, o);
  EXPECT_TRUE(s.converged);
  EXPECT_NEAR(s.slem, 23.0 / 29, 1e-9);
  EXPECT_LE(s.certificate_gap, 1e-11);
}

TEST(MinimizeSlem, SubgradientAgreesLoosely) {
  OracleOptions o;
  o.method = OracleMethod::Subgradient;
  const EquilibriumDistribution pi(std::vector<double>(7, 1.0));
  const auto s = minimize_slem(pi, build_friendship_graph(3), {0, 0, 0}, o);
  EXPECT_NEAR(s.slem, 5.0 / 6, 1e-4);
  expect_feasible(pi, s, build_friendship_graph(3));
}

TEST(MinimizeSlem, SpanningStarMatchesFriendshipOptimum) {
  // qF = 0 leaves the star on all 2m leaves.
  std::mt19937_64 rng(11);
  OracleOptions o;
  o.tol = 1e-11;
  for (int k = 0; k < 4; ++k) {
    auto masses = gen::random_masses(rng, 7);
    if (k % 2) masses[0] *= 9.0;
    const EquilibriumDistribution pi(masses);
    const auto cf = solve(pi, {0, 0, 0});
    const auto star = minimize_slem(pi, build_star_graph(6), {}, o);
    EXPECT_NEAR(star.slem, cf.slem, 1e-9) << "instance " << k;
  }
}

TEST(MinimizeSlem, Deterministic) {
  OracleOptions o;
  o.seed = 5;
  const Topology t = build_friendship_graph(2);
  const auto a = minimize_slem(kExample1, t, {0.1, 0.02}, o);
  const auto b = minimize_slem(kExample1, t, {0.1, 0.02}, o);
  EXPECT_EQ(a.slem, b.slem);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.q_opt.entries(), b.q_opt.entries());
}

TEST(MinimizeSlem, NonConvergenceIsReported) {
  OracleOptions o;
  o.max_iter = 3;
  const auto s = minimize_slem(kExample2, build_friendship_graph(2), {0, 0}, o);
  EXPECT_FALSE(s.converged);
  EXPECT_LE(s.iterations, 3);
}

TEST(MinimizeSlem, RejectsBadFixedWeights) {
  const Topology t = build_friendship_graph(2);
  try {
    minimize_slem(kExample1, t, {0, 1.5});
    FAIL();
  } catch (const InfeasibleFixedWeight& e) {
    EXPECT_EQ(e.blade(), 2u);
  }
  EXPECT_THROW(minimize_slem(kExample1, t, {0}), InvalidArgument);
  EXPECT_THROW(minimize_slem(kExample1, t, {-0.1, 0}), InvalidArgument);
  OracleOptions bad;
  bad.tol = 0.0;
  EXPECT_THROW(minimize_slem(kExample1, t, {0, 0}, bad), InvalidArgument);
}

TEST(MinimizeSlem, AboveFixedWeightBoundIsStrictlyWorse) {
  std::mt19937_64 rng(19);
  OracleOptions o;
  o.tol = 1e-11;
  for (std::size_t m : {3u, 5u}) {
    const EquilibriumDistribution pi(gen::random_masses(rng, 2 * m + 1));
    const auto cf = solve(pi, std::vector<double>(m, 0.0));
    std::vector<double> qf(m, 0.0);
    qf[0] = std::min(1.1 * cf.qf_bounds[0].hi, std::min(pi[1], pi[2]));
    const auto s = minimize_slem(pi, build_friendship_graph(m), qf, o);
    EXPECT_GT(s.slem - cf.slem, 1e-6) << "m=" << m;
  }
}

TEST(Multistart, SpreadAndSchedulingIndependence) {
  const Topology t = build_friendship_graph(2);
  std::vector<double> values;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    OracleOptions o;
    o.seed = seed;
    values.push_back(minimize_slem(kExample2, t, {0.01, 0.01}, o).slem);
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  EXPECT_LE(*hi - *lo, 1e-5);

  OracleOptions o;
  ::setenv("FMRMC_THREADS", "1", 1);
  const auto serial = minimize_slem_multistart(kExample2, t, {0.01, 0.01}, o, 6);
  ::setenv("FMRMC_THREADS", "4", 1);
  const auto parallel = minimize_slem_multistart(kExample2, t, {0.01, 0.01}, o, 6);
  ::unsetenv("FMRMC_THREADS");
  EXPECT_EQ(serial.slem, parallel.slem);
  EXPECT_EQ(serial.q_opt.entries(), parallel.q_opt.entries());
}

TEST(BruteForceGrid, HeavyCenterTriangle) {
  // (p1, p2, c) = (1, 1, 2): p1 p2 / sqrt(p1 p2 (p1 + c)(p2 + c)) = 1/3
  const auto s = brute_force_grid(EquilibriumDistribution({2, 1, 1}), build_friendship_graph(1),
                                  {0.0}, 200);
  EXPECT_NEAR(s.slem, 1.0 / 3, 1e-9);
}

TEST(BruteForceGrid, Example3MiddleRange) {
  const double q = 0.195;
  const auto s = brute_force_grid(EquilibriumDistribution({1, 2, 1}), build_friendship_graph(1),
                                  {q}, 400);
  EXPECT_NEAR(s.slem, std::sqrt(18 * q * q - 8 * q + 1), 2e-4);
}

TEST(BruteForceGrid, LowRangeTwelveHundredthsBelowMiddleExpression) {
  // q = 0.19 sits below 6/31, where the low-range line is the optimum and
  // the middle expression overshoots it.
  const double q = 0.19;
  const auto s = brute_force_grid(EquilibriumDistribution({1, 2, 1}), build_friendship_graph(1),
                                  {q}, 400);
  EXPECT_NEAR(s.slem, (7 - 16 * q) / 11, 1e-8);
  EXPECT_GT(std::sqrt(18 * q * q - 8 * q + 1) - s.slem, 2e-4);
}

TEST(BruteForceGrid, RefinedValueNeverIncreasesWithResolution) {
  const Topology t = build_friendship_graph(2);
  double previous_grid = 2.0;
  for (int res : {4, 8, 16}) {
    const auto s = brute_force_grid(kExample2, t, {0.01, 0.01}, res);
    ASSERT_TRUE(s.grid_slem.has_value());
    EXPECT_LE(*s.grid_slem, previous_grid + 1e-15) << res;
    EXPECT_LE(s.slem, *s.grid_slem + 1e-15);
    previous_grid = *s.grid_slem;
  }
}

TEST(BruteForceGrid, AgreesWithBarrier) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 0.3);
  for (int k = 0; k < 6; ++k) {
    const std::size_t m = 1 + k % 2;
    const EquilibriumDistribution pi(gen::random_masses(rng, 2 * m + 1));
    const Topology t = build_friendship_graph(m);
    std::vector<double> qf;
    for (std::size_t i = 1; i <= m; ++i) qf.push_back(u(rng) * std::min(pi[2 * i - 1], pi[2 * i]));
    const auto grid = brute_force_grid(pi, t, qf, m == 1 ? 200 : 12);
    const auto barrier = minimize_slem(pi, t, qf);
    EXPECT_NEAR(grid.slem, barrier.slem, 1e-4) << "instance " << k;
    EXPECT_GE(grid.slem, barrier.slem - 1e-6);
  }
}

TEST(BruteForceGrid, RefusesLargeInstances) {
  EXPECT_THROW(brute_force_grid(EquilibriumDistribution(std::vector<double>(7, 1.0)),
                                build_friendship_graph(3), {0, 0, 0}, 4),
               TooLarge);
}

TEST(Compare, PassesInBoundsAndCatchesSwappedWeights) {
  const Topology t = build_friendship_graph(2);
  const auto cf = solve_m2(kExample2, {0.1, 0.05});
  const auto oracle = minimize_slem(kExample2, t, {0.1, 0.05});
  const auto ok = compare(cf, oracle, 1e-4);
  EXPECT_TRUE(ok.pass);
  EXPECT_LE(ok.slem_delta, 1e-6);
  EXPECT_EQ(ok.edge_deltas.size(), 6u);

  ClosedFormSolution wrong = cf;
  wrong.q_opt.set(0, 1, cf.q_opt.get(0, 3));
  wrong.q_opt.set(0, 3, cf.q_opt.get(0, 1));
  wrong.slem = slem(kExample2, wrong.q_opt, t).slem;
  const auto bad = compare(wrong, oracle, 1e-4);
  EXPECT_FALSE(bad.pass);
  EXPECT_GT(bad.slem_delta, 0.0);
  EXPECT_GT(bad.max_edge_delta, 0.0);
}

TEST(Compare, AboveBoundSolutionMatchesOracle) {
  const EquilibriumDistribution pi(std::vector<double>(7, 1.0));
  const std::vector<double> qf{0.95, 0.0, 0.0};
  const auto cf = solve(pi, qf);
  ASSERT_FALSE(cf.within_bounds);
  const auto oracle = minimize_slem(pi, build_friendship_graph(3), qf);
  EXPECT_TRUE(compare(cf, oracle, 1e-4).pass);
}
