#pragma once

// Friendship-graph topology, edge weights q(i,j) = pi_i P(i,j), and the
// reversible chain P = I - D^{-1} L(q) they define.
//
// Vertex labeling is fixed: the center is vertex 0 and blade i (1-based)
// owns vertices 2i-1 and 2i. A star with m leaves uses center 0 and
// leaves 1..m.

#include <compare>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fmmc/matrix.hpp"

namespace fmmc {

/// Row sums, symmetry, nonnegativity and budgets.
inline constexpr double kExactTolerance = 1e-12;
/// pi^T P = pi^T, which accumulates rounding over a row.
inline constexpr double kStationarityTolerance = 1e-10;

/// Positive vertex masses. Normalization is not required; every quantity
/// computed from it is invariant under pi -> c*pi, q -> c*q.
class EquilibriumDistribution {
 public:
  explicit EquilibriumDistribution(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<const double> values() const noexcept { return values_; }
  double total() const;
  EquilibriumDistribution scaled(double factor) const;

  friend bool operator==(const EquilibriumDistribution&,
                         const EquilibriumDistribution&) = default;

 private:
  std::vector<double> values_;
};

struct Edge {
  std::size_t u = 0;
  std::size_t v = 0;

  /// Normalizes so that u < v.
  static Edge of(std::size_t a, std::size_t b);
  std::string key() const;  // "u-v"

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

enum class TopologyKind { Friendship, Star };

class Topology {
 public:
  TopologyKind kind() const noexcept { return kind_; }
  /// Blade count for a friendship graph, leaf count for a star.
  std::size_t m() const noexcept { return m_; }
  std::size_t vertex_count() const noexcept { return vertex_count_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  /// Edges between blade-mates (2i-1, 2i), in blade order. Empty for a star.
  const std::vector<Edge>& friend_edges() const noexcept {
    return friend_edges_;
  }
  /// Edges incident to the center, in vertex order.
  const std::vector<Edge>& center_edges() const noexcept {
    return center_edges_;
  }
  bool has_edge(std::size_t a, std::size_t b) const;

  /// Blade (1-based) owning a non-center vertex of a friendship graph.
  static std::size_t blade_of(std::size_t vertex) { return (vertex + 1) / 2; }

  friend Topology build_friendship_graph(std::size_t m);
  friend Topology build_star_graph(std::size_t leaves);

 private:
  TopologyKind kind_ = TopologyKind::Friendship;
  std::size_t m_ = 0;
  std::size_t vertex_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<Edge> friend_edges_;
  std::vector<Edge> center_edges_;
};

/// m triangles sharing vertex 0: 2m+1 vertices, m friend edges, 2m center
/// edges. Throws InvalidArgument for m == 0.
Topology build_friendship_graph(std::size_t m);

/// Star with the given number of leaves around center 0.
Topology build_star_graph(std::size_t leaves);

/// Edge weights stored per direction so that asymmetric input can be
/// represented (and rejected by validation). set() writes both directions.
class WeightAssignment {
 public:
  void set(std::size_t a, std::size_t b, double weight);
  void set_directed(std::size_t from, std::size_t to, double weight);
  double get(std::size_t from, std::size_t to) const;

  /// Every stored directed entry, keyed (from, to).
  const std::map<std::pair<std::size_t, std::size_t>, double>& entries()
      const noexcept {
    return weights_;
  }
  /// Largest |q(i,j) - q(j,i)| over stored entries.
  double asymmetry() const;
  WeightAssignment scaled(double factor) const;

 private:
  std::map<std::pair<std::size_t, std::size_t>, double> weights_;
};

/// Friend-edge weights of a friendship graph, in blade order.
std::vector<double> friend_weights(const Topology& topology,
                                   const WeightAssignment& q);

/// Friend-edge weights merged into an assignment (center edges untouched).
void set_friend_weights(const Topology& topology, std::span<const double> qf,
                        WeightAssignment& q);

/// L(q) = sum_{ij in E} q_ij (e_i - e_j)(e_i - e_j)^T.
/// Throws InvalidArgument for a weight on a non-edge or a size mismatch.
Matrix symmetric_laplacian(const Topology& topology, const WeightAssignment& q);

class TransitionMatrix {
 public:
  const Matrix& matrix() const noexcept { return p_; }
  const EquilibriumDistribution& pi() const noexcept { return pi_; }
  std::size_t size() const noexcept { return p_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return p_(i, j); }

  friend TransitionMatrix build_transition_matrix(
      const EquilibriumDistribution& pi, const WeightAssignment& q,
      const Topology& topology);

 private:
  TransitionMatrix(Matrix p, EquilibriumDistribution pi)
      : p_(std::move(p)), pi_(std::move(pi)) {}

  Matrix p_;
  EquilibriumDistribution pi_;
};

/// P = I - D^{-1} L(q) with D = diag(pi). Throws InfeasibleWeights when a
/// vertex budget is exceeded, InvalidArgument for negative, asymmetric or
/// misplaced weights.
TransitionMatrix build_transition_matrix(const EquilibriumDistribution& pi,
                                         const WeightAssignment& q,
                                         const Topology& topology);

enum class ViolationKind {
  SizeMismatch,
  NonEdge,
  NegativeWeight,
  DetailedBalance,
  VertexBudget,
  RowSum,
  Stationarity,
};

const char* to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string location;  // "vertex 3", "edge 1-2", ...
  double magnitude;
};

struct FeasibilityReport {
  std::vector<Violation> violations;

  bool feasible() const noexcept { return violations.empty(); }
};

/// Checks every chain constraint and reports all violations at once.
FeasibilityReport validate_chain(const EquilibriumDistribution& pi,
                                 const WeightAssignment& q,
                                 const Topology& topology);

/// Row-vector stationarity residual max_j |(pi^T P)_j - pi_j|.
double stationarity_residual(const TransitionMatrix& p);

/// max_{i,j} |pi_i P_ij - pi_j P_ji|
double detailed_balance_residual(const TransitionMatrix& p);

}  // namespace fmmc
