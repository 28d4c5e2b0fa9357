#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fmmc/closed_form.hpp"
#include "fmmc/error.hpp"
#include "fmmc/reduction.hpp"
#include "fmmc/spectral.hpp"
#include "support.hpp"

using namespace fmmc;
namespace gen = fmmc::test_support;

namespace {

const EquilibriumDistribution kExample1({3, 1, 1, 1, 3});
const EquilibriumDistribution kExample2({1, 1, 1, 1, 2});
const TriangleMasses kExample3{2, 1, 1};

double eig_slem(const ClosedFormSolution& s, const EquilibriumDistribution& pi) {
  return slem(pi, s.q_opt, build_friendship_graph((pi.size() - 1) / 2)).slem;
}

OracleOptions tight_oracle() {
  OracleOptions o;
  o.tol = 1e-11;
  return o;
}

}  // namespace

TEST(ClassifyRegime, Examples) {
  EXPECT_EQ(classify_regime(EquilibriumDistribution({10, 1, 1, 1, 1, 1, 1}), 3, {0, 0, 0}).tag,
            RegimeTag::MGe3Interior);
  EXPECT_EQ(classify_regime(EquilibriumDistribution(std::vector<double>(7, 1.0)), 3, {0, 0, 0}).tag,
            RegimeTag::MGe3Saturated);
  EXPECT_EQ(classify_regime(kExample1, 2, {0, 0}).tag, RegimeTag::M2Regime1);
  EXPECT_EQ(classify_regime(kExample2, 2, {0, 0}).tag, RegimeTag::M2Regime2);

  const auto pi3 = kExample3.canonical();
  EXPECT_EQ(classify_regime(pi3, 1, {0.1}).tag, RegimeTag::M1Low);
  EXPECT_EQ(classify_regime(pi3, 1, {0.195}).tag, RegimeTag::M1Middle);
  EXPECT_EQ(classify_regime(pi3, 1, {0.2}).tag, RegimeTag::M1High);
  EXPECT_EQ(classify_regime(pi3, 1, {0.3}).tag, RegimeTag::M1High);
  // Center mass dominates: high formulas everywhere.
  EXPECT_EQ(classify_regime(TriangleMasses{1, 1, 2}.canonical(), 1, {0.0}).tag, RegimeTag::M1High);
}

TEST(ClassifyRegime, BoundariesResolveToInteriorStyle) {
  // Pi = 2 pi0
  EXPECT_EQ(classify_regime(EquilibriumDistribution({3, 1, 1, 1, 1, 1, 1}), 3, {0, 0, 0}).tag,
            RegimeTag::MGe3Interior);
  // pi0^2 = S1 S2
  EXPECT_EQ(classify_regime(EquilibriumDistribution({2, 1, 1, 1, 1}), 2, {0, 0}).tag,
            RegimeTag::M2Regime1);
}

TEST(SolveMGe3, UniformIsSaturated) {
  const EquilibriumDistribution pi(std::vector<double>(7, 1.0));
  const auto s = solve_m_ge3(pi, 3, {0, 0, 0});
  EXPECT_EQ(s.regime.tag, RegimeTag::MGe3Saturated);
  EXPECT_EQ(s.source, SolutionSource::ClosedForm);
  EXPECT_NEAR(s.slem, 5.0 / 6, 1e-15);
  for (std::size_t j = 1; j <= 6; ++j) EXPECT_NEAR(s.q_opt.get(0, j), 1.0 / 6, 1e-15);
  for (const auto& b : s.qf_bounds) {
    EXPECT_EQ(b.lo, 0.0);
    EXPECT_NEAR(b.hi, 5.0 / 6, 1e-15);
  }
  EXPECT_NEAR(eig_slem(s, pi), 5.0 / 6, 1e-12);
  EXPECT_LE(s.kkt_residual, 1e-8);
}

TEST(SolveMGe3, HeavyCenterIsInterior) {
  const EquilibriumDistribution pi({10, 1, 1, 1, 1, 1, 1});
  const auto s = solve_m_ge3(pi, 3, {0, 0, 0});
  EXPECT_EQ(s.regime.tag, RegimeTag::MGe3Interior);
  EXPECT_NEAR(s.slem, 3.0 / 13, 1e-15);
  for (std::size_t j = 1; j <= 6; ++j) EXPECT_NEAR(s.q_opt.get(0, j), 10.0 / 13, 1e-15);
  for (const auto& b : s.qf_bounds) EXPECT_NEAR(b.hi, 3.0 / 13, 1e-15);
  EXPECT_NEAR(eig_slem(s, pi), 3.0 / 13, 1e-12);
}

TEST(SolveMGe3, BranchesAgreeAtBoundary) {
  const EquilibriumDistribution pi({3, 1, 1, 1, 1, 1, 1});
  const auto s = solve_m_ge3(pi, 3, {0, 0, 0});
  EXPECT_NEAR(s.slem, 0.5, 1e-15);
  // Saturated weights pi0 pi_j / Pi = 1/2; interior 2 pi0 pi_j / (2 pi0 + Pi) = 1/2.
  for (std::size_t j = 1; j <= 6; ++j) EXPECT_NEAR(s.q_opt.get(0, j), 0.5, 1e-15);
}

TEST(SolveMGe3, FriendWeightsInsideBoundsLeaveSlemUnchanged) {
  std::mt19937_64 rng(7);
  for (std::size_t m : {3u, 4u, 6u}) {
    const EquilibriumDistribution pi(gen::random_masses(rng, 2 * m + 1));
    const auto base = solve_m_ge3(pi, m, std::vector<double>(m, 0.0));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 10; ++k) {
      std::vector<double> qf(m);
      for (std::size_t i = 0; i < m; ++i) qf[i] = u(rng) * base.qf_bounds[i].hi;
      const auto s = solve_m_ge3(pi, m, qf);
      EXPECT_TRUE(s.within_bounds);
      EXPECT_EQ(s.source, SolutionSource::ClosedForm);
      EXPECT_NEAR(s.slem, base.slem, 1e-12);
      EXPECT_NEAR(eig_slem(s, pi), base.slem, 1e-9);
    }
  }
}

TEST(SolveMGe3, AboveBoundDefersToOracle) {
  const EquilibriumDistribution pi(std::vector<double>(7, 1.0));
  ClosedFormOptions opts;
  opts.oracle = tight_oracle();
  const double hi = 5.0 / 6;
  const auto s = solve_m_ge3(pi, 3, {1.1 * hi, 0, 0}, opts);
  EXPECT_FALSE(s.within_bounds);
  EXPECT_EQ(s.source, SolutionSource::Oracle);
  EXPECT_GT(s.slem, 5.0 / 6 + 1e-6);
  EXPECT_NEAR(eig_slem(s, pi), s.slem, 1e-12);
}

TEST(SolveMGe3, RejectsSmallBladeCounts) {
  EXPECT_THROW(solve_m_ge3(kExample1, 2, {0, 0}), WrongRegime);
  EXPECT_THROW(solve_m2(EquilibriumDistribution(std::vector<double>(7, 1.0)), {0, 0, 0}),
               WrongRegime);
}

TEST(SolveMGe3, ScaleInvariance) {
  const EquilibriumDistribution pi({1.5, 0.7, 2.0, 1.1, 0.3, 0.9, 1.4});
  const double c = 3.7;
  const auto a = solve(pi, {0.05, 0.02, 0.1});
  const auto b = solve(pi.scaled(c), {c * 0.05, c * 0.02, c * 0.1});
  EXPECT_NEAR(a.slem, b.slem, 1e-14);
  for (const auto& [key, w] : a.q_opt.entries()) {
    EXPECT_NEAR(b.q_opt.get(key.first, key.second), c * w, 1e-12);
  }
}

TEST(SolveM2, Example1) {
  const auto s = solve_m2(kExample1, {0, 0.1});
  EXPECT_EQ(s.regime.tag, RegimeTag::M2Regime1);
  EXPECT_EQ(s.source, SolutionSource::ClosedForm);
  EXPECT_NEAR(s.slem, std::sqrt(8.0 / 35), 1e-15);
  // q(0,j) = pi0 pi_j / (pi0 + S_i)
  EXPECT_NEAR(s.q_opt.get(0, 1), 0.6, 1e-15);
  EXPECT_NEAR(s.q_opt.get(0, 2), 0.6, 1e-15);
  EXPECT_NEAR(s.q_opt.get(0, 3), 3.0 / 7, 1e-15);
  EXPECT_NEAR(s.q_opt.get(0, 4), 9.0 / 7, 1e-15);
  EXPECT_EQ(s.qf_bounds[0].lo, 0.0);
  EXPECT_NEAR(s.qf_bounds[1].lo, 3.0 / 7 - 3.0 / std::sqrt(70.0), 1e-15);
  EXPECT_NEAR(eig_slem(s, kExample1), std::sqrt(8.0 / 35), 1e-12);
}

TEST(SolveM2, Example2) {
  const double q34 = 0.05;
  const auto s = solve_m2(kExample2, {0.1, q34});
  EXPECT_EQ(s.regime.tag, RegimeTag::M2Regime2);
  EXPECT_EQ(s.source, SolutionSource::ClosedForm);
  EXPECT_NEAR(s.slem, 23.0 / 29, 1e-15);
  const double expected[] = {7.0 / 29, 7.0 / 29, 5.0 / 29, 10.0 / 29};
  for (std::size_t j = 1; j <= 4; ++j) EXPECT_NEAR(s.q_opt.get(0, j), expected[j - 1], 1e-15);
  EXPECT_NEAR(s.qf_bounds[1].lo, 2.0 / 87, 1e-15);
  EXPECT_NEAR(s.q_opt.get(3, 4), q34, 0.0);
  EXPECT_LE(s.kkt_residual, 1e-8);
}

TEST(SolveM2, PaperLiteralBoundsDropTheBladeFactor) {
  ClosedFormOptions opts;
  opts.paper_literal_bounds = true;
  const auto s = solve_m2(kExample2, {0, 0.1}, opts);
  // 1 - mu_2 - s = 1 - 5/29 - 23/29
  EXPECT_NEAR(s.qf_bounds[1].lo, 1.0 / 29, 1e-15);
  EXPECT_NEAR(s.qf_bounds[1].hi, 24.0 / 29, 1e-15);
  const auto primitive = solve_m2(kExample2, {0, 0.1});
  EXPECT_NEAR(primitive.qf_bounds[1].lo, 2.0 / 87, 1e-15);
}

TEST(SolveM2, BelowLowerBoundIsSlowerAndFromOracle) {
  ClosedFormOptions opts;
  opts.oracle = tight_oracle();
  const auto s = solve_m2(kExample2, {0, 0});
  EXPECT_FALSE(s.within_bounds);
  EXPECT_EQ(s.source, SolutionSource::Oracle);
  // Example 2 curve at q34 = 0: (18 - sqrt(4)) / 20
  EXPECT_NEAR(s.slem, 0.8, 1e-9);
}

TEST(SolveM2, EqualBladeSumsCollapseBothLowerBounds) {
  const auto s = solve_m2(EquilibriumDistribution({1, 0.5, 1.5, 1.2, 0.8}), {0, 0});
  EXPECT_EQ(s.qf_bounds[0].lo, 0.0);
  EXPECT_EQ(s.qf_bounds[1].lo, 0.0);
  EXPECT_TRUE(s.within_bounds);
}

TEST(SolveM2, RegimeBoundaryGapFallsBackToOracle) {
  // S1 = 2, S2 = 0.5: pi0 = 1 is the nominal boundary. Just below it neither
  // regime formula yields a chain attaining its own value.
  const EquilibriumDistribution pi({0.96, 1, 1, 0.25, 0.25});
  ClosedFormOptions opts;
  opts.oracle = tight_oracle();
  // Fixed weights at their lower limits so the instance is in bounds.
  const std::vector<double> qf{solve_m2(pi, {0, 0}).qf_bounds[0].lo, 0.0};
  EXPECT_NEAR(qf[0], 0.1125, 1e-12);
  const auto s = solve_m2(pi, qf, opts);
  EXPECT_TRUE(s.within_bounds);
  ASSERT_EQ(s.candidates.size(), 2u);
  EXPECT_FALSE(s.candidates[0].valid);
  EXPECT_FALSE(s.candidates[1].valid);
  EXPECT_EQ(s.source, SolutionSource::Oracle);
  const auto ref = minimize_slem_multistart(pi, build_friendship_graph(2), qf, tight_oracle(), 4);
  EXPECT_NEAR(s.slem, ref.slem, 1e-8);
  EXPECT_NEAR(eig_slem(s, pi), s.slem, 1e-12);
}

TEST(SolveM2, RegimeFormulasDisagreeOnTheBoundary) {
  const EquilibriumDistribution pi({1, 1, 1, 0.25, 0.25});
  const auto s = solve_m2(pi, {0, 0});
  EXPECT_NEAR(s.candidates[0].formula_slem, std::sqrt(1.0 / 4.5), 1e-15);
  EXPECT_NEAR(s.candidates[1].formula_slem, 3.0 / 6.5, 1e-15);
}

TEST(SolveM1, Example3Ranges) {
  const auto high = solve_m1(kExample3, 0.3);
  EXPECT_EQ(high.regime.tag, RegimeTag::M1High);
  EXPECT_EQ(high.source, SolutionSource::ClosedForm);
  EXPECT_NEAR(high.slem, 0.4 / std::sqrt(3.0), 1e-15);

  const auto low = solve_m1(kExample3, 0.1);
  EXPECT_EQ(low.regime.tag, RegimeTag::M1Low);
  EXPECT_EQ(low.source, SolutionSource::ClosedForm);
  EXPECT_NEAR(low.slem, 5.4 / 11, 1e-15);
  // Full center budget.
  EXPECT_NEAR(low.q_opt.get(0, 1) + low.q_opt.get(0, 2), 1.0, 1e-15);

  const auto at_threshold = solve_m1(kExample3, 0.2);
  EXPECT_NEAR(at_threshold.slem, std::sqrt(0.12), 1e-15);
}

TEST(SolveM1, Example3MiddleRangeMatchesDerivedFormula) {
  ClosedFormOptions opts;
  opts.oracle = tight_oracle();
  for (double q : {0.195, 0.197, 0.199}) {
    const auto s = solve_m1(kExample3, q, opts);
    EXPECT_EQ(s.regime.tag, RegimeTag::M1Middle);
    EXPECT_EQ(s.source, SolutionSource::Oracle);
    EXPECT_NEAR(s.slem, std::sqrt(18 * q * q - 8 * q + 1), 1e-8) << q;
    const Candidate c = m1_middle_candidate(kExample3, q);
    EXPECT_TRUE(c.valid) << q;
    EXPECT_NEAR(c.formula_slem, std::sqrt(18 * q * q - 8 * q + 1), 1e-14);
  }
}

TEST(SolveM1, Example3Continuity) {
  const double b1 = 6.0 / 31;
  EXPECT_NEAR((7 - 16 * b1) / 11, 11.0 / 31, 1e-15);
  EXPECT_NEAR(std::sqrt(18 * b1 * b1 - 8 * b1 + 1), 11.0 / 31, 1e-15);
  EXPECT_NEAR(std::sqrt(18 * 0.04 - 1.6 + 1), std::sqrt(0.12), 1e-15);
  ClosedFormOptions opts;
  opts.oracle = tight_oracle();
  EXPECT_NEAR(solve_m1(kExample3, b1, opts).slem, 11.0 / 31, 1e-8);
}

TEST(SolveM1, Example3Thresholds) {
  EXPECT_NEAR(m1_high_threshold(kExample3), 0.2, 1e-15);
  EXPECT_NEAR(m1_collapse_point(kExample3), 0.5, 1e-15);
  EXPECT_NEAR(m1_low_limit(kExample3), 6.0 / 31, 1e-8);
}

TEST(SolveM1, EqualLeafMasses) {
  const TriangleMasses t{2, 2, 1};
  EXPECT_NEAR(m1_low_limit(t), 0.5, 1e-15);
  const auto s = solve_m1(t, 0.3);
  EXPECT_EQ(s.regime.tag, RegimeTag::M1Low);
  EXPECT_NEAR(s.slem, 0.45, 1e-15);
  EXPECT_NEAR(s.q_opt.get(0, 1), 0.5, 1e-15);
  EXPECT_NEAR(s.q_opt.get(0, 2), 0.5, 1e-15);
}

TEST(SolveM1, HeavyCenterUsesHighFormulaFromZero) {
  const auto s = solve_m1(TriangleMasses{1, 1, 2}, 0.0);
  EXPECT_EQ(s.regime.tag, RegimeTag::M1High);
  EXPECT_NEAR(s.slem, 1.0 / 3, 1e-15);
}

TEST(SolveM1, RejectsOversizedFixedWeight) {
  EXPECT_THROW(solve_m1(kExample3, 1.01), InfeasibleFixedWeight);
  EXPECT_THROW(solve_m1(kExample3, -0.1), InvalidArgument);
}

TEST(SolveM1, CanonicalRoundTrip) {
  const auto pi = kExample3.canonical();
  EXPECT_EQ(pi, EquilibriumDistribution({1, 2, 1}));
  const auto t = TriangleMasses::from_canonical(pi);
  EXPECT_EQ(t.p1, 2.0);
  EXPECT_EQ(t.center, 1.0);
}

TEST(KktResidual, ZeroAtOptimumPositiveWhenPerturbed) {
  const EquilibriumDistribution pi(std::vector<double>(7, 1.0));
  const Topology t = build_friendship_graph(3);
  const auto s = solve_m_ge3(pi, 3, {0, 0, 0});
  EXPECT_LE(kkt_residual(pi, s.q_opt, t, s.slem), 1e-8);

  // The saturated optimum spends the whole center budget, so bump an
  // interior optimum instead.
  const EquilibriumDistribution heavy({10, 1, 1, 1, 1, 1, 1});
  const auto h = solve_m_ge3(heavy, 3, {0, 0, 0});
  WeightAssignment bumped = h.q_opt;
  bumped.set(0, 1, bumped.get(0, 1) + 0.01);
  const double r = kkt_residual(heavy, bumped, t, h.slem);
  const double bumped_slem = slem(heavy, bumped, t).slem;
  EXPECT_TRUE(r > 0.0 || bumped_slem > h.slem);

  EXPECT_NEAR(kkt_residual(pi, WeightAssignment{}, t, s.slem), 1.0 / 6, 1e-12);
}

TEST(KktResidual, FlagsInfeasibleWeights) {
  const EquilibriumDistribution pi(std::vector<double>(3, 1.0));
  WeightAssignment q;
  q.set(0, 1, 0.8);
  q.set(0, 2, 0.8);
  EXPECT_GT(kkt_residual(pi, q, build_friendship_graph(1), 0.5), 0.0);
}

TEST(ClosedForm, AssembledChainMatchesFormulaAcrossRegimes) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int closed = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t m = 1 + trial % 4;
    auto masses = gen::random_masses(rng, 2 * m + 1);
    if (trial % 8 >= 4) masses[0] *= static_cast<double>(m);
    const EquilibriumDistribution pi(masses);
    std::vector<double> qf(m, 0.0);
    const auto probe = solve(pi, qf);
    for (std::size_t i = 0; i < m; ++i) {
      const auto& b = probe.qf_bounds[i];
      qf[i] = b.lo + u(rng) * (b.hi - b.lo);
    }
    const auto s = solve(pi, qf);
    const double eig = eig_slem(s, pi);
    EXPECT_NEAR(s.slem, eig, 1e-9) << "trial " << trial;
    EXPECT_TRUE(validate_chain(pi, s.q_opt, build_friendship_graph(m)).feasible());
    if (s.source == SolutionSource::ClosedForm) {
      ++closed;
      EXPECT_LE(s.kkt_residual, 1e-8) << "trial " << trial;
    }
  }
  EXPECT_GT(closed, 200);
}

TEST(ClosedForm, RegimeNames) {
  EXPECT_STREQ(to_string(RegimeTag::M2Regime1), "M2_REGIME1");
  EXPECT_STREQ(to_string(RegimeTag::M1Middle), "M1_MIDDLE");
  EXPECT_STREQ(to_string(SolutionSource::Oracle), "oracle");
}
