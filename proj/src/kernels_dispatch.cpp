#include <atomic>
#include <cstdlib>
#include <cstring>

#include "fmmc/error.hpp"
#include "fmmc/kernels.hpp"

namespace fmmc::kernels {

namespace {

struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*rotate)(double*, double*, std::size_t, double, double);
  void (*matvec)(const double*, std::size_t, std::size_t, const double*,
                 double*);
  double (*abs_diff_sum)(const double*, const double*, std::size_t);
};

constexpr Table kScalar{scalar::dot, scalar::axpy, scalar::rotate,
                        scalar::matvec, scalar::abs_diff_sum};

#if defined(FMMC_HAVE_AVX2)
constexpr Table kAvx2{avx2::dot, avx2::axpy, avx2::rotate, avx2::matvec,
                      avx2::abs_diff_sum};
#endif

bool cpu_has_avx2() {
#if defined(FMMC_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Backend initial_backend() {
  const char* forced = std::getenv("FMMC_SIMD");
  if (forced != nullptr && std::strcmp(forced, "scalar") == 0) {
    return Backend::Scalar;
  }
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& backend_slot() {
  static std::atomic<Backend> slot{initial_backend()};
  return slot;
}

const Table& table() {
#if defined(FMMC_HAVE_AVX2)
  if (backend_slot().load(std::memory_order_relaxed) == Backend::Avx2) {
    return kAvx2;
  }
#endif
  return kScalar;
}

void require_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw InvalidArgument("kernel operands differ in length");
}

}  // namespace

const char* to_string(Backend backend) {
  return backend == Backend::Avx2 ? "avx2" : "scalar";
}

bool backend_supported(Backend backend) {
  return backend == Backend::Scalar || cpu_has_avx2();
}

Backend active_backend() { return backend_slot().load(); }

void set_backend(Backend backend) {
  if (!backend_supported(backend)) {
    throw InvalidArgument(std::string("kernel backend not supported: ") +
                          to_string(backend));
  }
  backend_slot().store(backend);
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size());
  return table().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  require_same_size(x.size(), y.size());
  table().axpy(alpha, x.data(), y.data(), x.size());
}

void rotate(std::span<double> x, std::span<double> y, double c, double s) {
  require_same_size(x.size(), y.size());
  table().rotate(x.data(), y.data(), x.size(), c, s);
}

void matvec(std::span<const double> a, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> y) {
  if (a.size() != rows * cols || x.size() != cols || y.size() != rows) {
    throw InvalidArgument("matvec: shape mismatch");
  }
  table().matvec(a.data(), rows, cols, x.data(), y.data());
}

double abs_diff_sum(std::span<const double> a, std::span<const double> b) {
  require_same_size(a.size(), b.size());
  return table().abs_diff_sum(a.data(), b.data(), a.size());
}

}  // namespace fmmc::kernels
