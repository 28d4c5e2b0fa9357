#pragma once

// Numerical minimization of the SLEM over the center-edge weights with the
// friend-edge weights held fixed:
//
//   minimize   s
//   subject to -s I <= I - u u^T - D^{-1/2} L(q) D^{-1/2} <= s I
//              q >= 0,  sum_k q(v,k) <= pi_v  for every vertex v
//
// with u = sqrt(pi) / |sqrt(pi)|. The default method is a log-barrier
// interior-point solve of that semidefinite program, whose duality-gap bound
// nu/t is reported as the certificate. A projected subgradient method is
// available as a cross-check.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fmmc/chain.hpp"

namespace fmmc {

struct ClosedFormSolution;

enum class OracleMethod { Barrier, Subgradient };

struct OracleOptions {
  double tol = 1e-6;
  int max_iter = 50000;
  std::uint64_t seed = 0;
  OracleMethod method = OracleMethod::Barrier;
  /// Optional starting point; pulled into the strict interior before use.
  std::optional<WeightAssignment> warm_start;
};

struct OracleSolution {
  /// Center-edge weights (plus the fixed friend weights) of the best iterate.
  WeightAssignment q_opt;
  double slem = 1.0;
  int iterations = 0;
  bool converged = false;
  /// slem minus the best lower bound on the optimum seen by the method.
  double certificate_gap = 0.0;
  /// Best raw grid value before refinement (brute_force_grid only).
  std::optional<double> grid_slem;
};

/// qF holds one fixed weight per blade (empty for a star). Throws
/// InfeasibleFixedWeight when qF_i exceeds min(pi_{2i-1}, pi_{2i}) and
/// InvalidArgument for negative or misplaced weights.
OracleSolution minimize_slem(const EquilibriumDistribution& pi,
                             const Topology& topology,
                             const std::vector<double>& qf,
                             const OracleOptions& opts = {});

/// Runs minimize_slem from `starts` seeds (opts.seed, opts.seed+1, ...) in
/// parallel and keeps the best by (slem, lexicographic q).
OracleSolution minimize_slem_multistart(const EquilibriumDistribution& pi,
                                        const Topology& topology,
                                        const std::vector<double>& qf,
                                        const OracleOptions& opts,
                                        std::size_t starts);

/// Exhaustive grid k*cap/resolution over every free center edge, followed by
/// local ellipsoid refinement around the best grid point. Throws TooLarge for
/// more than four free weights (m >= 3).
OracleSolution brute_force_grid(const EquilibriumDistribution& pi,
                                const Topology& topology,
                                const std::vector<double>& qf,
                                int resolution);

struct EdgeDelta {
  Edge edge;
  double delta;
};

struct VerificationReport {
  double slem_delta = 0.0;
  std::vector<EdgeDelta> edge_deltas;
  double max_edge_delta = 0.0;
  /// Gated on slem_delta only; optimal weights need not be unique.
  bool pass = false;
};

VerificationReport compare(const ClosedFormSolution& closed,
                           const OracleSolution& oracle, double tol);

/// Checks qF against the leaf budgets. Throws as minimize_slem does.
void check_fixed_weights(const EquilibriumDistribution& pi,
                         const Topology& topology,
                         const std::vector<double>& qf);

}  // namespace fmmc
