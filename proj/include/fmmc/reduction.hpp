#pragma once

// Friendship chains whose center weights satisfy the ratio condition
//   mu_i = q(0,2i-1)/pi(2i-1) = q(0,2i)/pi(2i)
// are equitable over the partition {0}, {1,2}, {3,4}, ... . The quotient is a
// star chain, and the symmetrized matrix splits into an (m+1)x(m+1) block
// (the symmetrized star) plus m scalar blocks s_i.

#include <optional>
#include <vector>

#include "fmmc/chain.hpp"
#include "fmmc/matrix.hpp"
#include "fmmc/spectral.hpp"

namespace fmmc {

/// Relative tolerance on the two ratios of a blade.
inline constexpr double kRatioTolerance = 1e-10;

/// First blade (1-based) violating the ratio condition, if any.
std::optional<std::size_t> ratio_violation(const EquilibriumDistribution& pi,
                                           const WeightAssignment& q,
                                           const Topology& topology);

struct StarChain {
  Topology topology;              // star with m leaves
  EquilibriumDistribution pi_tilde;  // (pi_0, pi_1+pi_2, ..., pi_{2m-1}+pi_{2m})
  std::vector<double> q_tilde;    // q~(0,i) = q(0,2i-1) + q(0,2i), i = 1..m
  std::vector<double> mu;         // q~(0,i) / pi~_i

  WeightAssignment weights() const;
};

/// Throws NotReducible(i) when blade i breaks the ratio condition and
/// InvalidArgument for a non-friendship topology.
StarChain reduce_to_star(const EquilibriumDistribution& pi,
                         const WeightAssignment& q, const Topology& topology);

struct BlockDecomposition {
  /// Star block I - sum_i (iota_i e0 - mu_i e_i)(e0 - e_i)^T.
  Matrix p0;
  /// Its symmetrization I - sum_i mu_i (theta_i e0 - e_i)(theta_i e0 - e_i)^T.
  Matrix p0_hat;
  /// 1 - mu_i - q(2i-1,2i)(pi_{2i-1} + pi_{2i}) / (pi_{2i-1} pi_{2i}).
  std::vector<double> singles;
  std::vector<double> mu;
  std::vector<double> iota;   // mu_i (pi_{2i-1} + pi_{2i}) / pi_0
  std::vector<double> theta;  // sqrt((pi_{2i-1} + pi_{2i}) / pi_0)
  /// Orthogonal change of basis. Column 0 is e0, column i the blade's
  /// sqrt(pi)-weighted sum direction, column m+i its orthogonal difference.
  /// For equal blade masses these are (e_{2i-1} +- e_{2i}) / sqrt(2).
  /// basis^T * symmetrize(P) * basis = diag(p0_hat, singles).
  Matrix basis;
};

BlockDecomposition block_diagonalize(const EquilibriumDistribution& pi,
                                     const WeightAssignment& q,
                                     const Topology& topology);

/// Spectrum of the full chain assembled from the blocks, non-increasing.
std::vector<double> block_spectrum(const BlockDecomposition& blocks);

/// SLEM of a friendship chain, solved on the (m+1)x(m+1) block plus the
/// scalar blocks when the ratio condition holds, on the full matrix
/// otherwise.
SlemReport fast_slem(const EquilibriumDistribution& pi,
                     const WeightAssignment& q, const Topology& topology);

struct InterlacingReport {
  bool interlaces = false;
  bool tight = false;
  /// Smallest k in [0, len(coarse)] realizing tightness.
  std::optional<std::size_t> witness_k;
};

/// `coarse` (length m) interlaces `fine` (length n > m) when
/// fine[i] >= coarse[i] >= fine[n-m+i] for every i. Tight when for some k
/// the first k coarse values equal the top of `fine` and the remaining ones
/// equal its bottom. Both inputs must be non-increasing.
InterlacingReport check_interlacing(std::span<const double> coarse,
                                    std::span<const double> fine,
                                    double tolerance = 1e-9);

}  // namespace fmmc
