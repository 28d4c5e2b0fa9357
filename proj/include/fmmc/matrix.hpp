#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace fmmc {

/// Dense row-major matrix of doubles. Sizes here stay small (a few dozen
/// rows), so storage is a single contiguous vector.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  std::vector<double> column(std::size_t c) const;

  Matrix transposed() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator+(const Matrix& a, const Matrix& b);
std::vector<double> operator*(const Matrix& a, std::span<const double> x);

/// max_{i,j} |a_ij - b_ij|
double max_abs_diff(const Matrix& a, const Matrix& b);

/// max_{i,j} |m_ij - m_ji|
double asymmetry(const Matrix& m);

double frobenius_norm(const Matrix& m);

/// Lower Cholesky factor of a symmetric positive-definite matrix, or nullopt
/// when a pivot is not strictly positive.
std::optional<Matrix> cholesky(const Matrix& spd);

/// Solves (L L^T) x = b given the lower factor L.
std::vector<double> cholesky_solve(const Matrix& lower,
                                   std::span<const double> b);

/// Inverse of an SPD matrix from its lower Cholesky factor.
Matrix cholesky_inverse(const Matrix& lower);

/// log det of an SPD matrix from its lower Cholesky factor.
double cholesky_logdet(const Matrix& lower);

}  // namespace fmmc
