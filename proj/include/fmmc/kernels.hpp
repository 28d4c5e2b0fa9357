#pragma once

// Dense inner-loop kernels with a portable scalar reference and an AVX2
// variant picked at runtime. Every routine has identical semantics in both
// backends; rotate() and axpy() are bit-identical, the reductions (dot,
// matvec, abs_diff_sum) differ only by summation order.

#include <cstddef>
#include <span>

namespace fmmc::kernels {

enum class Backend { Scalar, Avx2 };

const char* to_string(Backend backend);

bool backend_supported(Backend backend);

/// Backend used by the dispatching entry points below. Chosen once on first
/// use: AVX2 when the CPU supports it, unless FMMC_SIMD=scalar is set.
Backend active_backend();

/// Overrides the dispatch choice (tests use this to diff backends).
/// Throws InvalidArgument for a backend the CPU cannot run.
void set_backend(Backend backend);

double dot(std::span<const double> a, std::span<const double> b);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// Plane rotation applied pairwise: x' = c*x - s*y, y' = s*x + c*y.
void rotate(std::span<double> x, std::span<double> y, double c, double s);

/// y = A x for a row-major rows x cols matrix.
void matvec(std::span<const double> a, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y);

/// sum_i |a_i - b_i|
double abs_diff_sum(std::span<const double> a, std::span<const double> b);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void rotate(double* x, double* y, std::size_t n, double c, double s);
void matvec(const double* a, std::size_t rows, std::size_t cols,
            const double* x, double* y);
double abs_diff_sum(const double* a, const double* b, std::size_t n);
}  // namespace scalar

#if defined(FMMC_HAVE_AVX2)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void rotate(double* x, double* y, std::size_t n, double c, double s);
void matvec(const double* a, std::size_t rows, std::size_t cols,
            const double* x, double* y);
double abs_diff_sum(const double* a, const double* b, std::size_t n);
}  // namespace avx2
#endif

}  // namespace fmmc::kernels
