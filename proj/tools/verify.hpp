#pragma once

// Randomized closed-form versus oracle runs per regime, and the m = 2
// regime-boundary sweep.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fmmc/closed_form.hpp"

namespace fmmc::cli {

enum class VerifyRegime {
  M3Interior,
  M3Saturated,
  M2Regime1,
  M2Regime2,
  M1High,
  M1Low,
  M1Middle,
};

/// "m3-interior", "m2-regime1", "m1-middle", ...
const char* to_string(VerifyRegime regime);
std::optional<VerifyRegime> parse_verify_regime(const std::string& name);
std::vector<VerifyRegime> all_verify_regimes();

struct VerifyInstance {
  EquilibriumDistribution pi;
  std::vector<double> qf;
};

/// Deterministic in (regime, count, seed). Fixed weights are drawn inside
/// the admissible interval of the target regime.
std::vector<VerifyInstance> generate_instances(VerifyRegime regime, std::size_t count,
                                               std::uint64_t seed);

struct VerifyOutcome {
  /// Position in VerifySummary::instances.
  std::size_t index = 0;
  Regime regime;
  SolutionSource source = SolutionSource::ClosedForm;
  double closed_slem = 0.0;
  double oracle_slem = 0.0;
  double slem_delta = 0.0;
  double max_edge_delta = 0.0;
  bool pass = false;
};

struct VerifySummary {
  VerifyRegime regime = VerifyRegime::M3Interior;
  std::vector<VerifyInstance> instances;
  std::vector<VerifyOutcome> outcomes;
  std::size_t failures = 0;
  /// Index of the largest slem_delta.
  std::size_t worst = 0;
  /// Instances answered by the oracle fallback instead of a closed form.
  std::size_t oracle_fallbacks = 0;
};

/// Solves every instance with `solve` and independently with a cold
/// `minimize_slem` (default options), comparing at `tol`. Instances run in
/// parallel; results keep generation order.
VerifySummary run_verification(VerifyRegime regime, std::size_t count, std::uint64_t seed,
                               double tol);

struct BoundaryCandidate {
  double formula_slem = 0.0;
  std::optional<double> assembled_slem;
  bool valid = false;
};

struct BoundaryRow {
  double pi0 = 0.0;
  /// Each blade's fixed weight sits at its lower limit.
  std::vector<double> qf;
  /// pi0^2 - S1 S2; zero on the regime boundary.
  double boundary_offset = 0.0;
  RegimeTag classified = RegimeTag::M2Regime1;
  BoundaryCandidate regime1;
  BoundaryCandidate regime2;
  double oracle_slem = 0.0;
  double solver_slem = 0.0;
  SolutionSource source = SolutionSource::ClosedForm;
  /// "regime1", "regime2", "both" or "neither": the candidates whose
  /// assembled chain attains their formula and matches the oracle to 1e-7.
  std::string optimal_branch;
};

/// Blades (1, 1) and (0.25, 0.25), so S1 = 2, S2 = 1/2 and the nominal
/// boundary sits at pi0 = 1. pi0 runs over [lo, hi] in `points` steps; the
/// boundary itself is always included.
std::vector<BoundaryRow> m2_boundary_sweep(double lo = 0.8, double hi = 1.2, int points = 41);

}  // namespace fmmc::cli
