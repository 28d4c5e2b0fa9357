#include "fmmc/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "fmmc/error.hpp"
#include "fmmc/kernels.hpp"

namespace fmmc {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw InvalidArgument("matrix product: shape");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      kernels::axpy(aik, b.row(k), out.row(i));
    }
  }
  return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument("matrix difference: shape");
  Matrix out = a;
  kernels::axpy(-1.0, b.data(), out.data());
  return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument("matrix sum: shape");
  Matrix out = a;
  kernels::axpy(1.0, b.data(), out.data());
  return out;
}

std::vector<double> operator*(const Matrix& a, std::span<const double> x) {
  std::vector<double> y(a.rows());
  kernels::matvec(a.data(), a.rows(), a.cols(), x, y);
  return y;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw InvalidArgument("max_abs_diff: shape");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i)
    worst = std::max(worst, std::fabs(a.data()[i] - b.data()[i]));
  return worst;
}

double asymmetry(const Matrix& m) {
  if (!m.square()) throw InvalidArgument("asymmetry: matrix not square");
  double worst = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i + 1; j < m.cols(); ++j)
      worst = std::max(worst, std::fabs(m(i, j) - m(j, i)));
  return worst;
}

double frobenius_norm(const Matrix& m) {
  return std::sqrt(kernels::dot(m.data(), m.data()));
}

std::optional<Matrix> cholesky(const Matrix& spd) {
  const std::size_t n = spd.rows();
  Matrix lower(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    const auto lj = lower.row(j).first(j);
    double diag = spd(j, j) - kernels::dot(lj, lj);
    if (!(diag > 0.0)) return std::nullopt;
    diag = std::sqrt(diag);
    lower(j, j) = diag;
    for (std::size_t i = j + 1; i < n; ++i) {
      const double v =
          spd(i, j) - kernels::dot(lower.row(i).first(j), lower.row(j).first(j));
      lower(i, j) = v / diag;
    }
  }
  return lower;
}

std::vector<double> cholesky_solve(const Matrix& lower,
                                   std::span<const double> b) {
  const std::size_t n = lower.rows();
  std::vector<double> y(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = (y[i] - kernels::dot(lower.row(i).first(i),
                                std::span<const double>(y).first(i))) /
           lower(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double v = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) v -= lower(k, ii) * y[k];
    y[ii] = v / lower(ii, ii);
  }
  return y;
}

Matrix cholesky_inverse(const Matrix& lower) {
  const std::size_t n = lower.rows();
  Matrix inv(n, n);
  std::vector<double> e(n, 0.0);
  for (std::size_t c = 0; c < n; ++c) {
    e[c] = 1.0;
    const auto col = cholesky_solve(lower, e);
    for (std::size_t r = 0; r < n; ++r) inv(r, c) = col[r];
    e[c] = 0.0;
  }
  // Symmetrize away solve round-off.
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = r + 1; c < n; ++c) {
      const double v = 0.5 * (inv(r, c) + inv(c, r));
      inv(r, c) = v;
      inv(c, r) = v;
    }
  return inv;
}

double cholesky_logdet(const Matrix& lower) {
  double sum = 0.0;
  for (std::size_t i = 0; i < lower.rows(); ++i) sum += std::log(lower(i, i));
  return 2.0 * sum;
}

}  // namespace fmmc
