#pragma once

// Exact distribution evolution p_{k+1} = p_k P and total-variation decay
// towards pi / sum(pi).

#include <iosfwd>
#include <vector>

#include "fmmc/chain.hpp"

namespace fmmc {

/// TV distances below this are treated as rounding noise by the rate fit.
inline constexpr double kTvFloor = 1e-13;

struct DecayTrace {
  int steps = 0;
  /// TV(p0 P^k, pi / sum(pi)) for k = 0..steps.
  std::vector<double> tv_distances;
  /// exp of the least-squares slope of log TV over the last half of the
  /// entries at or above kTvFloor; 0 when fewer than two remain.
  double fitted_rate = 0.0;
  /// Fewer than two usable entries (e.g. a stationary start).
  bool degenerate = false;
  /// fitted_rate >= 1 - 1e-9: the distance is not shrinking.
  bool non_mixing = false;
};

/// Throws InvalidArgument for a negative p0, one not summing to 1 within
/// 1e-12, a size mismatch or negative steps.
DecayTrace evolve(const TransitionMatrix& p, const std::vector<double>& p0, int steps);

/// Least-squares geometric rate of a TV sequence, as in DecayTrace.
double fit_decay_rate(const std::vector<double>& tv);

/// Point mass on the vertex with the largest |slow-mode component|; ties go
/// to the lowest vertex index.
std::vector<double> worst_case_start(const EquilibriumDistribution& pi,
                                     const WeightAssignment& q, const Topology& topology);

struct MixingReport {
  double slem = 1.0;
  double fitted_rate = 0.0;
  /// |fitted_rate - slem| / slem
  double relative_gap = 0.0;
  bool degenerate = false;
  DecayTrace trace;
};

/// Evolves the worst-case start for `steps` steps. Throws ReducibleChain when
/// the chain is reducible or periodic (slem = 1).
MixingReport fitted_vs_slem(const EquilibriumDistribution& pi, const WeightAssignment& q,
                            const Topology& topology, int steps);

/// Same, from a caller-chosen start.
MixingReport fitted_vs_slem(const EquilibriumDistribution& pi, const WeightAssignment& q,
                            const Topology& topology, int steps,
                            const std::vector<double>& p0);

/// `step,tv_distance` rows, 17 significant digits.
void write_trace_csv(std::ostream& out, const DecayTrace& trace);

}  // namespace fmmc
