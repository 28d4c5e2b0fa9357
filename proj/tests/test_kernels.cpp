#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fmmc/error.hpp"
#include "fmmc/kernels.hpp"

namespace k = fmmc::kernels;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

// Lengths straddling the 4-lane width and its tails.
const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 33, 101};

}  // namespace

TEST(Kernels, ScalarReferenceValues) {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{4, -5, 6};
  EXPECT_DOUBLE_EQ(k::scalar::dot(a.data(), b.data(), 3), 12.0);
  EXPECT_DOUBLE_EQ(k::scalar::abs_diff_sum(a.data(), b.data(), 3), 3 + 7 + 3);

  std::vector<double> y{1, 1, 1};
  k::scalar::axpy(2.0, a.data(), y.data(), 3);
  EXPECT_EQ(y, (std::vector<double>{3, 5, 7}));

  std::vector<double> x{1, 0};
  std::vector<double> z{0, 1};
  k::scalar::rotate(x.data(), z.data(), 2, 0.0, 1.0);
  // x' = c x - s z, z' = s x + c z
  EXPECT_EQ(x, (std::vector<double>{0, -1}));
  EXPECT_EQ(z, (std::vector<double>{1, 0}));

  const std::vector<double> m{1, 2, 3, 4, 5, 6};
  std::vector<double> out(2);
  k::scalar::matvec(m.data(), 2, 3, a.data(), out.data());
  EXPECT_EQ(out, (std::vector<double>{14, 32}));
}

TEST(Kernels, ScalarIsAlwaysSupported) {
  EXPECT_TRUE(k::backend_supported(k::Backend::Scalar));
  EXPECT_STREQ(k::to_string(k::Backend::Scalar), "scalar");
}

#ifdef FMMC_HAVE_AVX2

class Avx2Equivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!k::backend_supported(k::Backend::Avx2)) GTEST_SKIP() << "no AVX2 on this CPU";
  }
  std::mt19937_64 rng{20240611};
};

TEST_F(Avx2Equivalence, AxpyIsBitIdentical) {
  for (std::size_t n : kLengths) {
    const auto x = random_vector(rng, n);
    auto y1 = random_vector(rng, n);
    auto y2 = y1;
    k::scalar::axpy(0.37, x.data(), y1.data(), n);
    k::avx2::axpy(0.37, x.data(), y2.data(), n);
    EXPECT_EQ(y1, y2) << "n=" << n;
  }
}

TEST_F(Avx2Equivalence, RotateIsBitIdentical) {
  for (std::size_t n : kLengths) {
    auto x1 = random_vector(rng, n);
    auto y1 = random_vector(rng, n);
    auto x2 = x1;
    auto y2 = y1;
    const double c = std::cos(0.3);
    const double s = std::sin(0.3);
    k::scalar::rotate(x1.data(), y1.data(), n, c, s);
    k::avx2::rotate(x2.data(), y2.data(), n, c, s);
    EXPECT_EQ(x1, x2) << "n=" << n;
    EXPECT_EQ(y1, y2) << "n=" << n;
  }
}

TEST_F(Avx2Equivalence, ReductionsAgreeToRounding) {
  for (std::size_t n : kLengths) {
    const auto a = random_vector(rng, n);
    const auto b = random_vector(rng, n);
    const double tol = 1e-14 * static_cast<double>(n + 1) * 4.0;
    EXPECT_NEAR(k::scalar::dot(a.data(), b.data(), n),
                k::avx2::dot(a.data(), b.data(), n), tol);
    EXPECT_NEAR(k::scalar::abs_diff_sum(a.data(), b.data(), n),
                k::avx2::abs_diff_sum(a.data(), b.data(), n), tol);
  }
}

TEST_F(Avx2Equivalence, MatvecAgreesToRounding) {
  for (std::size_t rows : {1u, 3u, 7u}) {
    for (std::size_t cols : kLengths) {
      const auto a = random_vector(rng, rows * cols);
      const auto x = random_vector(rng, cols);
      std::vector<double> y1(rows);
      std::vector<double> y2(rows);
      k::scalar::matvec(a.data(), rows, cols, x.data(), y1.data());
      k::avx2::matvec(a.data(), rows, cols, x.data(), y2.data());
      for (std::size_t r = 0; r < rows; ++r)
        EXPECT_NEAR(y1[r], y2[r], 1e-13 * static_cast<double>(cols + 1));
    }
  }
}

TEST_F(Avx2Equivalence, DispatchFollowsSetBackend) {
  const auto before = k::active_backend();
  const std::vector<double> a{1, 2, 3, 4, 5};
  for (auto backend : {k::Backend::Scalar, k::Backend::Avx2}) {
    k::set_backend(backend);
    EXPECT_EQ(k::active_backend(), backend);
    EXPECT_DOUBLE_EQ(k::dot(a, a), 55.0);
  }
  k::set_backend(before);
}

#endif

TEST(Kernels, SpanLengthMismatchThrows) {
  const std::vector<double> a{1, 2};
  const std::vector<double> b{1};
  EXPECT_THROW(k::dot(a, b), fmmc::InvalidArgument);
}
