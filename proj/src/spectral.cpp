#include "fmmc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fmmc/error.hpp"
#include "fmmc/kernels.hpp"

namespace fmmc {

namespace {

constexpr double kOffDiagonalTolerance = 1e-12;
constexpr int kMaxSweeps = 100;
constexpr double kTieTolerance = 1e-12;
constexpr double kReducibleTolerance = 1e-10;

double off_diagonal_norm(const Matrix& a) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) sum += a(i, j) * a(i, j);
  return std::sqrt(sum);
}

// One Jacobi rotation zeroing a(p,q). Rows are rotated with the vector
// kernel; symmetry then fills the matching columns.
void rotate_pair(Matrix& a, Matrix& vt, std::size_t p, std::size_t q) {
  const double apq = a(p, q);
  const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
  double t = 1.0 / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
  if (theta < 0.0) t = -t;
  const double c = 1.0 / std::sqrt(t * t + 1.0);
  const double s = t * c;

  const double app = a(p, p) - t * apq;
  const double aqq = a(q, q) + t * apq;
  kernels::rotate(a.row(p), a.row(q), c, s);
  a(p, p) = app;
  a(q, q) = aqq;
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    if (r == p || r == q) continue;
    a(r, p) = a(p, r);
    a(r, q) = a(q, r);
  }
  kernels::rotate(vt.row(p), vt.row(q), c, s);
}

void canonical_sign(std::span<double> v) {
  for (double x : v) {
    if (std::fabs(x) > 1e-12) {
      if (x < 0.0)
        for (double& y : v) y = -y;
      return;
    }
  }
}

}  // namespace

EigenDecomposition eigen_symmetric(const Matrix& m) {
  if (!m.square()) throw InvalidArgument("eigen_symmetric: matrix not square");
  const std::size_t n = m.rows();
  double scale = 1.0;
  for (double x : m.data()) scale = std::max(scale, std::fabs(x));
  if (asymmetry(m) > 1e-9 * scale) {
    throw InvalidArgument("eigen_symmetric: matrix is not symmetric");
  }

  Matrix a = m;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = v;
      a(j, i) = v;
    }
  Matrix vt = Matrix::identity(n);
  const double threshold =
      kOffDiagonalTolerance * std::max(1.0, frobenius_norm(a));

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) < threshold) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Entries already below the diagonals' resolution are dropped.
        if (std::fabs(apq) < 1e-18 * (std::fabs(a(p, p)) + std::fabs(a(q, q)))) {
          a(p, q) = 0.0;
          a(q, p) = 0.0;
          continue;
        }
        rotate_pair(a, vt, p, q);
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) canonical_sign(vt.row(i));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a(x, x) > a(y, y);
  });
  // Near-equal eigenvalues: order by eigenvector for reproducibility.
  for (std::size_t begin = 0; begin < n;) {
    std::size_t end = begin + 1;
    while (end < n &&
           a(order[begin], order[begin]) - a(order[end], order[end]) <=
               kTieTolerance * std::max(1.0, std::fabs(a(order[begin], order[begin])))) {
      ++end;
    }
    if (end - begin > 1) {
      std::sort(order.begin() + static_cast<std::ptrdiff_t>(begin),
                order.begin() + static_cast<std::ptrdiff_t>(end),
                [&](std::size_t x, std::size_t y) {
                  const auto rx = vt.row(x);
                  const auto ry = vt.row(y);
                  return std::lexicographical_compare(rx.begin(), rx.end(),
                                                      ry.begin(), ry.end());
                });
    }
    begin = end;
  }

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = a(order[k], order[k]);
    const auto v = vt.row(order[k]);
    for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v[r];
  }
  return out;
}

Matrix symmetrize(const TransitionMatrix& p) {
  const std::size_t n = p.size();
  const auto& pi = p.pi();
  double scale = 0.0;
  for (double x : pi.values()) scale = std::max(scale, x);
  if (detailed_balance_residual(p) > 1e-9 * std::max(1.0, scale)) {
    throw NotReversible("transition matrix violates detailed balance");
  }
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      s(i, j) = std::sqrt(pi[i] / pi[j]) * p(i, j);
  // Exact symmetry; the two triangles agree up to rounding.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (s(i, j) + s(j, i));
      s(i, j) = v;
      s(j, i) = v;
    }
  return s;
}

double mixing_time_for(double slem) {
  if (slem >= 1.0 - 1e-12) return std::numeric_limits<double>::infinity();
  if (slem <= 0.0) return 0.0;
  return 1.0 / std::log(1.0 / slem);
}

SlemReport slem_from_symmetric(const Matrix& s,
                               std::span<const double> sqrt_pi) {
  const auto eig = eigen_symmetric(s);
  const std::size_t n = eig.values.size();
  SlemReport r;
  r.eigenvalues = eig.values;
  if (n < 2) {
    r.slem = 0.0;
    r.lambda2 = 0.0;
    r.lambdaN = 0.0;
    r.mixing_time = 0.0;
    return r;
  }
  r.lambda2 = eig.values[1];
  r.lambdaN = eig.values[n - 1];
  r.reducible = eig.values[1] >= 1.0 - kReducibleTolerance;
  const bool low_end = -r.lambdaN > r.lambda2;
  r.slem = r.reducible ? 1.0 : std::max(r.lambda2, -r.lambdaN);
  const std::size_t k = low_end ? n - 1 : 1;
  r.slow_mode.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.slow_mode[i] = eig.vectors(i, k) / sqrt_pi[i];
  }
  r.mixing_time = mixing_time_for(r.slem);
  return r;
}

SlemReport slem(const TransitionMatrix& p) {
  std::vector<double> root(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) root[i] = std::sqrt(p.pi()[i]);
  return slem_from_symmetric(symmetrize(p), root);
}

SlemReport slem(const EquilibriumDistribution& pi, const WeightAssignment& q,
                const Topology& topology) {
  return slem(build_transition_matrix(pi, q, topology));
}

}  // namespace fmmc
