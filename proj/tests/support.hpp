#pragma once

// Random instance generators shared by the test binaries.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "fmmc/chain.hpp"

namespace fmmc::test_support {

inline std::vector<double> random_masses(std::mt19937_64& rng, std::size_t n,
                                         double lo = 0.2, double hi = 3.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

/// Feasible weights on every edge: each edge takes a random share of the
/// smaller of its endpoints' per-edge budget pi/deg.
inline WeightAssignment random_feasible_weights(std::mt19937_64& rng,
                                                const EquilibriumDistribution& pi,
                                                const Topology& topo) {
  std::vector<std::size_t> degree(topo.vertex_count(), 0);
  for (const Edge& e : topo.edges()) {
    ++degree[e.u];
    ++degree[e.v];
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  WeightAssignment q;
  for (const Edge& e : topo.edges()) {
    const double cap = std::min(pi[e.u] / static_cast<double>(degree[e.u]),
                                pi[e.v] / static_cast<double>(degree[e.v]));
    q.set(e.u, e.v, u(rng) * cap);
  }
  return q;
}

/// Weights satisfying the ratio condition q(0,2i-1)/pi(2i-1) = q(0,2i)/pi(2i).
inline WeightAssignment random_reducible_weights(std::mt19937_64& rng,
                                                 const EquilibriumDistribution& pi,
                                                 const Topology& topo) {
  const std::size_t m = topo.m();
  double blades = 0.0;
  for (std::size_t v = 1; v < pi.size(); ++v) blades += pi[v];
  const double scale = std::min(1.0, pi[0] / blades);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  WeightAssignment q;
  for (std::size_t i = 1; i <= m; ++i) {
    const double mu = u(rng) * scale;
    const std::size_t a = 2 * i - 1;
    const std::size_t b = 2 * i;
    q.set(0, a, mu * pi[a]);
    q.set(0, b, mu * pi[b]);
    q.set(a, b, u(rng) * (1.0 - mu) * std::min(pi[a], pi[b]));
  }
  return q;
}

inline std::vector<double> sorted_desc(std::vector<double> v) {
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

}  // namespace fmmc::test_support
