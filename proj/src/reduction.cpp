#include "fmmc/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "fmmc/error.hpp"

namespace fmmc {

namespace {

void require_friendship(const Topology& topology, const EquilibriumDistribution& pi) {
  if (topology.kind() != TopologyKind::Friendship) {
    throw InvalidArgument("reduction needs a friendship topology");
  }
  if (pi.size() != topology.vertex_count()) {
    throw InvalidArgument("distribution size does not match topology");
  }
}

bool ratios_match(double a, double b) {
  return std::fabs(a - b) <= kRatioTolerance * std::max(std::fabs(a), std::fabs(b)) + 1e-15;
}

}  // namespace

std::optional<std::size_t> ratio_violation(const EquilibriumDistribution& pi,
                                           const WeightAssignment& q,
                                           const Topology& topology) {
  require_friendship(topology, pi);
  for (std::size_t i = 1; i <= topology.m(); ++i) {
    const double r1 = q.get(0, 2 * i - 1) / pi[2 * i - 1];
    const double r2 = q.get(0, 2 * i) / pi[2 * i];
    if (!ratios_match(r1, r2)) return i;
  }
  return std::nullopt;
}

WeightAssignment StarChain::weights() const {
  WeightAssignment w;
  for (std::size_t i = 0; i < q_tilde.size(); ++i) w.set(0, i + 1, q_tilde[i]);
  return w;
}

StarChain reduce_to_star(const EquilibriumDistribution& pi,
                         const WeightAssignment& q, const Topology& topology) {
  if (const auto bad = ratio_violation(pi, q, topology)) throw NotReducible(*bad);
  const std::size_t m = topology.m();
  std::vector<double> masses{pi[0]};
  std::vector<double> q_tilde;
  std::vector<double> mu;
  for (std::size_t i = 1; i <= m; ++i) {
    const double mass = pi[2 * i - 1] + pi[2 * i];
    const double w = q.get(0, 2 * i - 1) + q.get(0, 2 * i);
    masses.push_back(mass);
    q_tilde.push_back(w);
    // Mass-weighted average of the two (matching) ratios.
    mu.push_back(w / mass);
  }
  return {build_star_graph(m), EquilibriumDistribution(std::move(masses)),
          std::move(q_tilde), std::move(mu)};
}

BlockDecomposition block_diagonalize(const EquilibriumDistribution& pi,
                                     const WeightAssignment& q,
                                     const Topology& topology) {
  const StarChain star = reduce_to_star(pi, q, topology);
  const std::size_t m = topology.m();
  const std::size_t n = topology.vertex_count();

  BlockDecomposition b;
  b.mu = star.mu;
  b.p0 = Matrix::identity(m + 1);
  b.p0_hat = Matrix::identity(m + 1);
  for (std::size_t i = 1; i <= m; ++i) {
    const double a = pi[2 * i - 1];
    const double c = pi[2 * i];
    const double mu = b.mu[i - 1];
    const double iota = mu * (a + c) / pi[0];
    const double theta = std::sqrt((a + c) / pi[0]);
    b.iota.push_back(iota);
    b.theta.push_back(theta);

    // (iota e0 - mu e_i)(e0 - e_i)^T
    b.p0(0, 0) -= iota;
    b.p0(0, i) += iota;
    b.p0(i, 0) += mu;
    b.p0(i, i) -= mu;

    // mu (theta e0 - e_i)(theta e0 - e_i)^T
    b.p0_hat(0, 0) -= mu * theta * theta;
    b.p0_hat(0, i) += mu * theta;
    b.p0_hat(i, 0) += mu * theta;
    b.p0_hat(i, i) -= mu;

    const double friend_weight = q.get(2 * i - 1, 2 * i);
    b.singles.push_back(1.0 - mu - friend_weight * (a + c) / (a * c));
  }

  b.basis = Matrix(n, n);
  b.basis(0, 0) = 1.0;
  for (std::size_t i = 1; i <= m; ++i) {
    const double ra = std::sqrt(pi[2 * i - 1]);
    const double rc = std::sqrt(pi[2 * i]);
    const double norm = std::sqrt(pi[2 * i - 1] + pi[2 * i]);
    b.basis(2 * i - 1, i) = ra / norm;
    b.basis(2 * i, i) = rc / norm;
    b.basis(2 * i - 1, m + i) = rc / norm;
    b.basis(2 * i, m + i) = -ra / norm;
  }
  return b;
}

std::vector<double> block_spectrum(const BlockDecomposition& blocks) {
  std::vector<double> all = eigen_symmetric(blocks.p0_hat).values;
  all.insert(all.end(), blocks.singles.begin(), blocks.singles.end());
  std::sort(all.begin(), all.end(), std::greater<>());
  return all;
}

SlemReport fast_slem(const EquilibriumDistribution& pi,
                     const WeightAssignment& q, const Topology& topology) {
  if (topology.kind() != TopologyKind::Friendship ||
      ratio_violation(pi, q, topology)) {
    return slem(pi, q, topology);
  }
  // Budgets are checked by the full builder; the block route trusts them.
  (void)build_transition_matrix(pi, q, topology);
  const BlockDecomposition b = block_diagonalize(pi, q, topology);
  const std::size_t m = topology.m();
  const std::size_t n = topology.vertex_count();
  const auto eig = eigen_symmetric(b.p0_hat);

  // Candidates: star eigenvalues past the Perron root, plus the singles.
  struct Mode {
    double value;
    std::vector<double> coords;  // in the block basis
  };
  std::vector<Mode> modes;
  for (std::size_t k = 0; k <= m; ++k) {
    std::vector<double> coords(n, 0.0);
    for (std::size_t r = 0; r <= m; ++r) coords[r] = eig.vectors(r, k);
    modes.push_back({eig.values[k], std::move(coords)});
  }
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<double> coords(n, 0.0);
    coords[m + 1 + i] = 1.0;
    modes.push_back({b.singles[i], std::move(coords)});
  }
  std::stable_sort(modes.begin(), modes.end(),
                   [](const Mode& x, const Mode& y) { return x.value > y.value; });

  SlemReport r;
  for (const Mode& mode : modes) r.eigenvalues.push_back(mode.value);
  r.lambda2 = modes[1].value;
  r.lambdaN = modes.back().value;
  r.reducible = r.lambda2 >= 1.0 - 1e-10;
  const bool low_end = -r.lambdaN > r.lambda2;
  r.slem = r.reducible ? 1.0 : std::max(r.lambda2, -r.lambdaN);
  const Mode& slow = low_end ? modes.back() : modes[1];
  r.slow_mode.assign(n, 0.0);
  for (std::size_t row = 0; row < n; ++row) {
    double v = 0.0;
    for (std::size_t c = 0; c < n; ++c) v += b.basis(row, c) * slow.coords[c];
    r.slow_mode[row] = v / std::sqrt(pi[row]);
  }
  r.mixing_time = mixing_time_for(r.slem);
  return r;
}

InterlacingReport check_interlacing(std::span<const double> coarse,
                                    std::span<const double> fine,
                                    double tolerance) {
  const std::size_t m = coarse.size();
  const std::size_t n = fine.size();
  if (m >= n) throw InvalidArgument("interlacing needs len(coarse) < len(fine)");
  const auto sorted = [](std::span<const double> v) {
    for (std::size_t i = 0; i + 1 < v.size(); ++i)
      if (v[i] < v[i + 1]) return false;
    return true;
  };
  if (!sorted(coarse) || !sorted(fine)) {
    throw InvalidArgument("interlacing inputs must be sorted non-increasing");
  }

  InterlacingReport r;
  r.interlaces = true;
  for (std::size_t i = 0; i < m; ++i) {
    if (fine[i] < coarse[i] - tolerance || coarse[i] < fine[n - m + i] - tolerance) {
      r.interlaces = false;
      break;
    }
  }
  if (!r.interlaces) return r;
  const auto same = [&](double x, double y) { return std::fabs(x - y) <= tolerance; };
  for (std::size_t k = 0; k <= m; ++k) {
    bool ok = true;
    for (std::size_t i = 0; i < k && ok; ++i) ok = same(fine[i], coarse[i]);
    for (std::size_t i = k; i < m && ok; ++i) ok = same(fine[n - m + i], coarse[i]);
    if (ok) {
      r.tight = true;
      r.witness_k = k;
      break;
    }
  }
  return r;
}

}  // namespace fmmc
