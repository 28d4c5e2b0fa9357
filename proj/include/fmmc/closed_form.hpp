#pragma once

// Exact fastest-mixing weights and SLEM on friendship graphs, by regime.
//
// Every closed form is checked against the chain it produces: the assembled
// chain must be feasible and its eigensolver SLEM must equal the formula to
// 1e-9. When that fails, or a fixed friend weight is outside the admissible
// interval, the answer comes from the numerical oracle instead and `source`
// says so.
//
// Distributions are in canonical labeling (center 0, blade i = {2i-1, 2i}).
// For m = 1 the formulas are written for the triangle (pi_1, pi_2, pi_3)
// with pi_3 the center; TriangleMasses carries that ordering.

#include <optional>
#include <string>
#include <vector>

#include "fmmc/chain.hpp"
#include "fmmc/oracle.hpp"

namespace fmmc {

enum class RegimeTag {
  MGe3Interior,
  MGe3Saturated,
  M2Regime1,
  M2Regime2,
  M1High,
  M1Low,
  M1Middle,
};

/// "M_GE3_INTERIOR", "M2_REGIME1", ...
const char* to_string(RegimeTag tag);

struct Regime {
  RegimeTag tag = RegimeTag::MGe3Interior;
  std::size_t m = 0;

  friend bool operator==(const Regime&, const Regime&) = default;
};

enum class SolutionSource { ClosedForm, Oracle };

const char* to_string(SolutionSource source);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x, double tol = 1e-12) const {
    return x >= lo - tol && x <= hi + tol;
  }
};

/// One closed-form branch evaluated at the instance, kept for diagnostics.
struct Candidate {
  std::string branch;
  double formula_slem = 0.0;
  /// Eigensolver SLEM of the assembled chain; nullopt when infeasible.
  std::optional<double> assembled_slem;
  bool feasible = false;
  /// Feasible and assembled SLEM equal to the formula within 1e-9.
  bool valid = false;
  WeightAssignment q;
};

struct ClosedFormSolution {
  Regime regime;
  /// Center weights plus the fixed friend weights.
  WeightAssignment q_opt;
  double slem = 1.0;
  /// Admissible fixed weight per blade.
  std::vector<Interval> qf_bounds;
  bool within_bounds = false;
  double kkt_residual = 0.0;
  SolutionSource source = SolutionSource::ClosedForm;
  /// Branch that produced q_opt, e.g. "m2-regime2" or "oracle".
  std::string branch;
  std::vector<Candidate> candidates;
};

struct TriangleMasses {
  double p1 = 0.0;
  double p2 = 0.0;
  double center = 0.0;

  static TriangleMasses from_canonical(const EquilibriumDistribution& pi);
  EquilibriumDistribution canonical() const;
};

struct ClosedFormOptions {
  /// Report the literal m = 2 bounds (without the
  /// pi_{2i-1} pi_{2i} / (pi_{2i-1} + pi_{2i}) factor).
  bool paper_literal_bounds = false;
  OracleOptions oracle;
};

/// Regime of (pi, qF). Equalities resolve to the interior-style tag. For
/// m = 1 below the high threshold, LOW is chosen when the full-center-budget
/// formula produces a chain attaining its own SLEM, MIDDLE otherwise.
Regime classify_regime(const EquilibriumDistribution& pi, std::size_t m,
                       const std::vector<double>& qf);

/// Throws WrongRegime for m < 3.
ClosedFormSolution solve_m_ge3(const EquilibriumDistribution& pi, std::size_t m,
                               const std::vector<double>& qf,
                               const ClosedFormOptions& opts = {});

/// Throws WrongRegime unless pi has five entries.
ClosedFormSolution solve_m2(const EquilibriumDistribution& pi,
                            const std::vector<double>& qf,
                            const ClosedFormOptions& opts = {});

/// Throws InfeasibleFixedWeight when q12 > min(p1, p2).
ClosedFormSolution solve_m1(const TriangleMasses& masses, double q12,
                            const ClosedFormOptions& opts = {});

/// Dispatch on m = (size - 1) / 2.
ClosedFormSolution solve(const EquilibriumDistribution& pi, const std::vector<double>& qf,
                         const ClosedFormOptions& opts = {});

/// Largest violation of the optimality-side constraints at a claimed SLEM s:
/// every non-Perron eigenvalue in [-s, s], |s_i| <= s for the single
/// eigenvalues when the ratio condition holds, vertex budgets and
/// nonnegativity, and |slem(P) - s| (the bound must be attained).
double kkt_residual(const EquilibriumDistribution& pi, const WeightAssignment& q,
                    const Topology& topology, double slem);

/// q12 where the m = 1 high-range formulas take over:
/// max(0, (p1 p2 - c^2) / (2c + p1 + p2)).
double m1_high_threshold(const TriangleMasses& masses);

/// Upper end of the m = 1 low range. (p1 - c)/2 when p1 == p2, otherwise
/// found by bisection on the low-range validity check. Zero when there is
/// no low range.
double m1_low_limit(const TriangleMasses& masses);

/// q12 where the m = 1 SLEM reaches zero: p1 p2 / (p1 + p2 + c).
double m1_collapse_point(const TriangleMasses& masses);

/// Middle-range optimum for p1 != p2: full center budget with
/// lambda_2 = -lambda_3, giving
///   s^2 = 1 - (p1 + p2 + c)(q12 c + q13 q23) / (p1 p2 c).
/// Returned as a diagnostic candidate; solve_m1 still answers the middle
/// range with the oracle.
Candidate m1_middle_candidate(const TriangleMasses& masses, double q12);

}  // namespace fmmc
