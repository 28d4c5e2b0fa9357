#pragma once

// Pareto frontier of (SLEM, friend-edge transition probabilities) over the
// fixed friend weights. With pi fixed, P(2i-1,2i) = qF_i / pi_{2i-1} is
// increasing in qF_i, so dominance is decided on (slem, qF).

#include <iosfwd>
#include <string>
#include <vector>

#include "fmmc/closed_form.hpp"

namespace fmmc {

struct ParetoPoint {
  std::vector<double> qf;
  /// qf_i / pi_{2i-1}
  std::vector<double> pf;
  double slem = 1.0;
  Regime regime;
};

struct Frontier {
  /// Sorted by slem descending, ties by qF ascending.
  std::vector<ParetoPoint> points;
  bool collapsed = false;
  /// Blades whose fixed weight was swept; the rest were held at 0 after the
  /// sampling check in trace_frontier.
  std::vector<std::size_t> active_blades;
};

struct FrontierOptions {
  /// Grid points per active blade, endpoints included.
  int grid = 200;
  /// Extra qF samples per blade used to confirm a blade is inactive.
  int inactive_samples = 5;
  ClosedFormOptions solver;
};

/// A blade is active when raising its fixed weight from 0 still lowers the
/// optimal SLEM: lower bound lo_i > 0 (for m = 1, the whole range up to the
/// collapse point). Active blades are swept over [0, lo_i]; past lo_i the
/// SLEM is flat and every point is dominated by the one at lo_i. Inactive
/// blades are pinned at 0 after checking that sampled qF_i values leave the
/// SLEM unchanged; a blade failing the check is swept over its feasible
/// range instead. Throws InvalidArgument for grid < 2.
Frontier trace_frontier(const EquilibriumDistribution& pi, std::size_t m,
                        const FrontierOptions& opts = {});

/// Points not weakly dominated by any other in (slem, qF), comparing with an
/// absolute tolerance. Of a set of duplicates only the lexicographically
/// smallest qF survives. Input order is otherwise kept.
std::vector<ParetoPoint> non_dominated_filter(const std::vector<ParetoPoint>& points,
                                              double tol = 1e-12);

enum class SegmentKind {
  /// s = c0 + c1 q
  Linear,
  /// s = sqrt(c0 + c1 q + c2 q^2)
  SqrtQuadratic,
};

const char* to_string(SegmentKind kind);

struct FrontierSegment {
  double lo = 0.0;
  double hi = 0.0;
  SegmentKind kind = SegmentKind::Linear;
  std::vector<double> coefficients;
  /// "m1-high", "m1-low" or "m1-middle".
  std::string branch;
  /// True for the middle range with p1 != p2, whose coefficients come from
  /// the lambda_2 = -lambda_3 condition solved here; the solver still
  /// answers that range numerically.
  bool derived = false;

  double evaluate(double q) const;
};

/// Piecewise description of the m = 1 frontier on [0, collapse point].
std::vector<FrontierSegment> frontier_curve_m1(const TriangleMasses& masses);

/// Segment covering q (the later one at a shared endpoint). Throws
/// InvalidArgument outside [0, collapse point].
const FrontierSegment& m1_segment_at(const std::vector<FrontierSegment>& segments, double q);

/// Header `slem,q_1_2,...,q_2m-1_2m,p_1_2,...,p_2m-1_2m,regime`; numbers
/// with 17 significant digits.
void write_frontier_csv(std::ostream& out, const Frontier& frontier, std::size_t m);

}  // namespace fmmc
