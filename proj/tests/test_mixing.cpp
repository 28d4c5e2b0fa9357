#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fmmc/closed_form.hpp"
#include "fmmc/error.hpp"
#include "fmmc/mixing.hpp"
#include "support.hpp"

using namespace fmmc;
namespace gen = fmmc::test_support;

namespace {

std::vector<double> stationary(const EquilibriumDistribution& pi) {
  std::vector<double> p;
  for (double x : pi.values()) p.push_back(x / pi.total());
  return p;
}

}  // namespace

TEST(Evolve, StationaryStartStaysPut) {
  const EquilibriumDistribution pi({1, 1, 1, 1, 2});
  const auto s = solve(pi, {0.1, 0.05});
  const auto p = build_transition_matrix(pi, s.q_opt, build_friendship_graph(2));
  const DecayTrace t = evolve(p, stationary(pi), 50);
  ASSERT_EQ(t.tv_distances.size(), 51u);
  for (double d : t.tv_distances) EXPECT_LE(d, 1e-12);
  EXPECT_EQ(t.fitted_rate, 0.0);
  EXPECT_TRUE(t.degenerate);
}

TEST(Evolve, UniformThreeBladeOptimumDecaysAtSlem) {
  const EquilibriumDistribution pi(std::vector<double>(7, 1.0));
  const Topology topo = build_friendship_graph(3);
  const auto s = solve(pi, {0, 0, 0});
  const auto r = fitted_vs_slem(pi, s.q_opt, topo, 500);
  EXPECT_NEAR(r.slem, 5.0 / 6, 1e-12);
  EXPECT_GE(r.fitted_rate, 5.0 / 6 * 0.98);
  EXPECT_LE(r.fitted_rate, 5.0 / 6 * 1.02);
}

TEST(Evolve, IdentityChainDoesNotMix) {
  const EquilibriumDistribution pi({1, 2, 1});
  const auto p = build_transition_matrix(pi, WeightAssignment{}, build_friendship_graph(1));
  const DecayTrace t = evolve(p, {1, 0, 0}, 20);
  EXPECT_EQ(t.fitted_rate, 1.0);
  EXPECT_TRUE(t.non_mixing);
  EXPECT_THROW(fitted_vs_slem(pi, WeightAssignment{}, build_friendship_graph(1), 20),
               ReducibleChain);
}

TEST(Evolve, RejectsBadStart) {
  const EquilibriumDistribution pi({1, 2, 1});
  const auto p = build_transition_matrix(pi, WeightAssignment{}, build_friendship_graph(1));
  EXPECT_THROW(evolve(p, {0.5, 0.4, 0.0}, 5), InvalidArgument);
  EXPECT_THROW(evolve(p, {1.5, -0.5, 0.0}, 5), InvalidArgument);
  EXPECT_THROW(evolve(p, {1.0, 0.0}, 5), InvalidArgument);
  EXPECT_THROW(evolve(p, {1.0, 0.0, 0.0}, -1), InvalidArgument);
}

TEST(FittedVsSlem, Example3OptimumAtHighRange) {
  const auto s = solve_m1(TriangleMasses{2, 1, 1}, 0.3);
  const auto pi = TriangleMasses{2, 1, 1}.canonical();
  const auto r = fitted_vs_slem(pi, s.q_opt, build_friendship_graph(1), 2000);
  EXPECT_NEAR(r.slem, 0.4 / std::sqrt(3.0), 1e-12);
  EXPECT_LE(r.relative_gap, 0.02);
}

TEST(FittedVsSlem, Example2Optimum) {
  const EquilibriumDistribution pi({1, 1, 1, 1, 2});
  const auto s = solve(pi, {0.1, 0.05});
  const auto r = fitted_vs_slem(pi, s.q_opt, build_friendship_graph(2), 2000);
  EXPECT_NEAR(r.slem, 23.0 / 29, 1e-12);
  EXPECT_LE(r.relative_gap, 0.02);
}

TEST(FittedVsSlem, SuboptimalChainMixesSlower) {
  const EquilibriumDistribution pi({1, 1, 1, 1, 2});
  const Topology topo = build_friendship_graph(2);
  WeightAssignment q;
  for (std::size_t j = 1; j <= 4; ++j) q.set(0, j, 0.1);
  q.set(1, 2, 0.1);
  q.set(3, 4, 0.05);
  const auto r = fitted_vs_slem(pi, q, topo, 2000);
  EXPECT_GT(r.fitted_rate, 23.0 / 29);
}

TEST(Evolve, DistanceNeverIncreases) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t m = 1 + trial % 4;
    const Topology topo = build_friendship_graph(m);
    const EquilibriumDistribution pi(gen::random_masses(rng, 2 * m + 1));
    const auto q = gen::random_feasible_weights(rng, pi, topo);
    std::vector<double> p0(pi.size(), 0.0);
    p0[trial % pi.size()] = 1.0;
    const auto t = evolve(build_transition_matrix(pi, q, topo), p0, 200);
    for (std::size_t k = 1; k < t.tv_distances.size(); ++k) {
      EXPECT_LE(t.tv_distances[k], t.tv_distances[k - 1] + 1e-12) << trial << " step " << k;
    }
    EXPECT_LE(t.tv_distances[0], 1.0);
  }
}

TEST(WorstCaseStart, PointMassOnSlowModePeak) {
  const EquilibriumDistribution pi({1, 1, 1, 1, 2});
  const auto s = solve(pi, {0.1, 0.05});
  const auto p0 = worst_case_start(pi, s.q_opt, build_friendship_graph(2));
  double mass = 0.0;
  int ones = 0;
  for (double x : p0) {
    mass += x;
    ones += x == 1.0;
  }
  EXPECT_EQ(mass, 1.0);
  EXPECT_EQ(ones, 1);
}

TEST(FitDecayRate, ExactGeometricSequence) {
  std::vector<double> tv;
  for (int k = 0; k < 40; ++k) tv.push_back(0.5 * std::pow(0.7, k));
  EXPECT_NEAR(fit_decay_rate(tv), 0.7, 1e-12);
  EXPECT_EQ(fit_decay_rate({1e-14, 1e-15}), 0.0);
}

TEST(TraceCsv, Format) {
  DecayTrace t;
  t.tv_distances = {1.0, 0.25};
  std::ostringstream out;
  write_trace_csv(out, t);
  EXPECT_EQ(out.str(), "step,tv_distance\n0,1\n1,0.25\n");
}
