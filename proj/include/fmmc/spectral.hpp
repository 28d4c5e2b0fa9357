#pragma once

#include <limits>
#include <vector>

#include "fmmc/chain.hpp"
#include "fmmc/matrix.hpp"

namespace fmmc {

struct EigenDecomposition {
  /// Non-increasing.
  std::vector<double> values;
  /// Orthonormal eigenvectors stored as columns, matching `values`.
  Matrix vectors;
};

/// Cyclic Jacobi eigensolver for dense symmetric matrices. Stops when the
/// off-diagonal Frobenius norm drops below 1e-12 (relative to the matrix
/// norm when that exceeds one) or after 100 sweeps. Eigenvalues that agree to
/// 1e-12 are ordered by their eigenvectors lexicographically; each vector's
/// first non-negligible entry is positive.
/// Throws InvalidArgument when the input is not square or asymmetric beyond
/// 1e-9.
EigenDecomposition eigen_symmetric(const Matrix& m);

/// S = D^{1/2} P D^{-1/2}. Throws NotReversible when detailed balance is off
/// by more than 1e-9.
Matrix symmetrize(const TransitionMatrix& p);

struct SlemReport {
  double slem = 1.0;
  double lambda2 = 1.0;
  double lambdaN = -1.0;
  /// Spectrum of P, non-increasing; eigenvalues[0] is the Perron root.
  std::vector<double> eigenvalues;
  /// Right eigenvector of P for whichever of lambda2 / lambdaN sets the SLEM.
  std::vector<double> slow_mode;
  /// 1 / log(1/slem); infinity when slem >= 1 - 1e-12.
  double mixing_time = std::numeric_limits<double>::infinity();
  /// Eigenvalue 1 is repeated (disconnected chain); slem is reported as 1.
  bool reducible = false;
};

/// SLEM of the chain P = I - D^{-1} L(q).
SlemReport slem(const EquilibriumDistribution& pi, const WeightAssignment& q,
                const Topology& topology);

SlemReport slem(const TransitionMatrix& p);

/// SLEM report from an already symmetrized matrix similar to a reversible
/// chain via diag(sqrt_pi). `sqrt_pi` maps eigenvectors back to P.
SlemReport slem_from_symmetric(const Matrix& s,
                               std::span<const double> sqrt_pi);

double mixing_time_for(double slem);

}  // namespace fmmc
