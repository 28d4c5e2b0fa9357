#include "fmmc/chain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fmmc/error.hpp"

namespace fmmc {

EquilibriumDistribution::EquilibriumDistribution(std::vector<double> values)
    : values_(std::move(values)) {
  if (values_.empty()) throw InvalidArgument("equilibrium distribution is empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i]) || !(values_[i] > 0.0)) {
      throw InvalidArgument("equilibrium mass at vertex " + std::to_string(i) +
                            " must be finite and > 0");
    }
  }
}

double EquilibriumDistribution::total() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0);
}

EquilibriumDistribution EquilibriumDistribution::scaled(double factor) const {
  std::vector<double> v = values_;
  for (double& x : v) x *= factor;
  return EquilibriumDistribution(std::move(v));
}

Edge Edge::of(std::size_t a, std::size_t b) {
  if (a == b) throw InvalidArgument("self-loop is not an edge");
  return a < b ? Edge{a, b} : Edge{b, a};
}

std::string Edge::key() const {
  return std::to_string(u) + "-" + std::to_string(v);
}

bool Topology::has_edge(std::size_t a, std::size_t b) const {
  if (a == b) return false;
  const Edge e = Edge::of(a, b);
  return std::binary_search(edges_.begin(), edges_.end(), e);
}

Topology build_friendship_graph(std::size_t m) {
  if (m == 0) throw InvalidArgument("friendship graph needs m >= 1 blades");
  Topology t;
  t.kind_ = TopologyKind::Friendship;
  t.m_ = m;
  t.vertex_count_ = 2 * m + 1;
  for (std::size_t i = 1; i <= m; ++i) {
    t.center_edges_.push_back({0, 2 * i - 1});
    t.center_edges_.push_back({0, 2 * i});
    t.friend_edges_.push_back({2 * i - 1, 2 * i});
  }
  t.edges_ = t.center_edges_;
  t.edges_.insert(t.edges_.end(), t.friend_edges_.begin(),
                  t.friend_edges_.end());
  std::sort(t.edges_.begin(), t.edges_.end());
  return t;
}

Topology build_star_graph(std::size_t leaves) {
  if (leaves == 0) throw InvalidArgument("star needs at least one leaf");
  Topology t;
  t.kind_ = TopologyKind::Star;
  t.m_ = leaves;
  t.vertex_count_ = leaves + 1;
  for (std::size_t i = 1; i <= leaves; ++i) t.center_edges_.push_back({0, i});
  t.edges_ = t.center_edges_;
  return t;
}

void WeightAssignment::set(std::size_t a, std::size_t b, double weight) {
  if (a == b) throw InvalidArgument("weight on a self-loop");
  weights_[{a, b}] = weight;
  weights_[{b, a}] = weight;
}

void WeightAssignment::set_directed(std::size_t from, std::size_t to,
                                    double weight) {
  if (from == to) throw InvalidArgument("weight on a self-loop");
  weights_[{from, to}] = weight;
}

double WeightAssignment::get(std::size_t from, std::size_t to) const {
  const auto it = weights_.find({from, to});
  return it == weights_.end() ? 0.0 : it->second;
}

double WeightAssignment::asymmetry() const {
  double worst = 0.0;
  for (const auto& [key, w] : weights_) {
    worst = std::max(worst, std::fabs(w - get(key.second, key.first)));
  }
  return worst;
}

WeightAssignment WeightAssignment::scaled(double factor) const {
  WeightAssignment out = *this;
  for (auto& [key, w] : out.weights_) w *= factor;
  return out;
}

std::vector<double> friend_weights(const Topology& topology,
                                   const WeightAssignment& q) {
  std::vector<double> out;
  out.reserve(topology.friend_edges().size());
  for (const Edge& e : topology.friend_edges()) out.push_back(q.get(e.u, e.v));
  return out;
}

void set_friend_weights(const Topology& topology, std::span<const double> qf,
                        WeightAssignment& q) {
  if (qf.size() != topology.friend_edges().size()) {
    throw InvalidArgument("expected " +
                          std::to_string(topology.friend_edges().size()) +
                          " friend-edge weights, got " +
                          std::to_string(qf.size()));
  }
  for (std::size_t i = 0; i < qf.size(); ++i) {
    const Edge& e = topology.friend_edges()[i];
    q.set(e.u, e.v, qf[i]);
  }
}

namespace {

void check_shape(const Topology& topology, const WeightAssignment& q) {
  for (const auto& [key, w] : q.entries()) {
    if (key.first >= topology.vertex_count() ||
        key.second >= topology.vertex_count() ||
        !topology.has_edge(key.first, key.second)) {
      if (w != 0.0) {
        throw InvalidArgument("weight on non-edge " +
                              std::to_string(key.first) + "-" +
                              std::to_string(key.second));
      }
    }
  }
}

}  // namespace

Matrix symmetric_laplacian(const Topology& topology, const WeightAssignment& q) {
  check_shape(topology, q);
  const std::size_t n = topology.vertex_count();
  Matrix l(n, n);
  for (const Edge& e : topology.edges()) {
    const double w = q.get(e.u, e.v);
    l(e.u, e.u) += w;
    l(e.v, e.v) += w;
    l(e.u, e.v) -= w;
    l(e.v, e.u) -= w;
  }
  return l;
}

TransitionMatrix build_transition_matrix(const EquilibriumDistribution& pi,
                                         const WeightAssignment& q,
                                         const Topology& topology) {
  const std::size_t n = topology.vertex_count();
  if (pi.size() != n) {
    throw InvalidArgument("distribution has " + std::to_string(pi.size()) +
                          " entries, topology has " + std::to_string(n) +
                          " vertices");
  }
  check_shape(topology, q);
  if (q.asymmetry() > kExactTolerance) {
    throw InvalidArgument("weights are not symmetric (detailed balance)");
  }
  Matrix p(n, n);
  std::vector<double> load(n, 0.0);
  for (const Edge& e : topology.edges()) {
    const double w = q.get(e.u, e.v);
    if (w < 0.0) throw InvalidArgument("negative weight on edge " + e.key());
    load[e.u] += w;
    load[e.v] += w;
    p(e.u, e.v) = w / pi[e.u];
    p(e.v, e.u) = w / pi[e.v];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double deficit = load[i] - pi[i];
    if (deficit > kExactTolerance * std::max(1.0, pi[i])) {
      throw InfeasibleWeights(i, deficit);
    }
    p(i, i) = std::max(0.0, 1.0 - load[i] / pi[i]);
  }
  return TransitionMatrix(std::move(p), pi);
}

const char* to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::SizeMismatch:
      return "size-mismatch";
    case ViolationKind::NonEdge:
      return "non-edge";
    case ViolationKind::NegativeWeight:
      return "negative-weight";
    case ViolationKind::DetailedBalance:
      return "detailed-balance";
    case ViolationKind::VertexBudget:
      return "vertex-budget";
    case ViolationKind::RowSum:
      return "row-sum";
    case ViolationKind::Stationarity:
      return "stationarity";
  }
  return "unknown";
}

FeasibilityReport validate_chain(const EquilibriumDistribution& pi,
                                 const WeightAssignment& q,
                                 const Topology& topology) {
  FeasibilityReport report;
  const std::size_t n = topology.vertex_count();
  if (pi.size() != n) {
    report.violations.push_back(
        {ViolationKind::SizeMismatch, "distribution",
         std::fabs(static_cast<double>(pi.size()) - static_cast<double>(n))});
    return report;
  }

  // Directed P built straight from q so that asymmetric input shows up as a
  // detailed-balance violation instead of an exception.
  Matrix p(n, n);
  std::vector<double> load(n, 0.0);
  for (const auto& [key, w] : q.entries()) {
    const auto [from, to] = key;
    const std::string where =
        "edge " + std::to_string(from) + "-" + std::to_string(to);
    if (from >= n || to >= n || !topology.has_edge(from, to)) {
      if (w != 0.0)
        report.violations.push_back({ViolationKind::NonEdge, where, std::fabs(w)});
      continue;
    }
    if (w < 0.0) {
      report.violations.push_back({ViolationKind::NegativeWeight, where, -w});
    }
    if (from < to) {
      const double gap = std::fabs(w - q.get(to, from));
      if (gap > kExactTolerance * std::max(1.0, std::fabs(w))) {
        report.violations.push_back(
            {ViolationKind::DetailedBalance, where, gap});
      }
    } else if (q.entries().count({to, from}) == 0) {
      report.violations.push_back(
          {ViolationKind::DetailedBalance,
           "edge " + std::to_string(to) + "-" + std::to_string(from),
           std::fabs(w)});
    }
    load[from] += w;
    p(from, to) = w / pi[from];
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double deficit = load[i] - pi[i];
    if (deficit > kExactTolerance * std::max(1.0, pi[i])) {
      report.violations.push_back(
          {ViolationKind::VertexBudget, "vertex " + std::to_string(i), deficit});
    }
    p(i, i) = 1.0 - load[i] / pi[i];
  }
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += p(i, j);
    if (std::fabs(row - 1.0) > kExactTolerance) {
      report.violations.push_back(
          {ViolationKind::RowSum, "vertex " + std::to_string(i), std::fabs(row - 1.0)});
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    double flow = 0.0;
    for (std::size_t i = 0; i < n; ++i) flow += pi[i] * p(i, j);
    const double gap = std::fabs(flow - pi[j]);
    if (gap > kStationarityTolerance * std::max(1.0, pi[j])) {
      report.violations.push_back(
          {ViolationKind::Stationarity, "vertex " + std::to_string(j), gap});
    }
  }
  return report;
}

double stationarity_residual(const TransitionMatrix& p) {
  double worst = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    double flow = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) flow += p.pi()[i] * p(i, j);
    worst = std::max(worst, std::fabs(flow - p.pi()[j]));
  }
  return worst;
}

double detailed_balance_residual(const TransitionMatrix& p) {
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      worst = std::max(worst,
                       std::fabs(p.pi()[i] * p(i, j) - p.pi()[j] * p(j, i)));
  return worst;
}

}  // namespace fmmc
