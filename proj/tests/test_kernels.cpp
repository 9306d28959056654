#include <gtest/gtest.h>
#include <omp.h>

#include <complex>
#include <random>
#include <vector>

#include "borelq/kernels.hpp"

namespace {

namespace k = borelq::kernels;
using cplx = std::complex<double>;

std::vector<cplx> random_complex(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<cplx> v(n);
  for (auto& z : v) z = {g(rng), g(rng)};
  return v;
}

std::vector<double> random_real(std::size_t n, std::uint64_t seed, double shift = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<double> v(n);
  for (auto& x : v) x = g(rng) + shift;
  return v;
}

// Sizes straddle the reduction block and include an empty input.
const std::vector<std::size_t> kSizes{0, 1, 7, 1023, 1024, 1025, 5000};

TEST(Kernels, PointwiseOmpMatchesSerialBitwise) {
  for (std::size_t n : kSizes) {
    const auto a = random_complex(n, 1), b = random_complex(n, 2), c = random_complex(n, 3), d = random_complex(n, 4);
    const auto r = random_real(n, 5);
    std::vector<cplx> s(n), o(n);

    k::serial::multiply(s, a, b);
    k::omp::multiply(o, a, b);
    EXPECT_EQ(s, o);

    k::serial::multiply(s, std::span<const double>(r), std::span<const cplx>(b));
    k::omp::multiply(o, std::span<const double>(r), std::span<const cplx>(b));
    EXPECT_EQ(s, o);

    s = a;
    o = a;
    k::serial::axpy(s, {0.3, -1.1}, b);
    k::omp::axpy(o, {0.3, -1.1}, b);
    EXPECT_EQ(s, o);

    k::serial::stage(s, a, 0.25, b);
    k::omp::stage(o, a, 0.25, b);
    EXPECT_EQ(s, o);

    s = a;
    o = a;
    k::serial::rk4_combine(s, 1e-3, a, b, c, d);
    k::omp::rk4_combine(o, 1e-3, a, b, c, d);
    EXPECT_EQ(s, o);

    std::vector<double> ds(n), dom(n);
    k::serial::density(ds, a);
    k::omp::density(dom, a);
    EXPECT_EQ(ds, dom);

    const auto v = random_real(n, 6), r2 = random_real(n, 7), lr = random_real(n, 8);
    const auto rho = random_real(n, 9, 5.0);
    k::serial::nse_assemble(s, a, b, v, r2, lr, rho, 0.7, 0.05);
    k::omp::nse_assemble(o, a, b, v, r2, lr, rho, 0.7, 0.05);
    EXPECT_EQ(s, o);
  }
}

TEST(Kernels, ReductionsAgreeWithSerial) {
  for (std::size_t n : kSizes) {
    const auto a = random_complex(n, 11), b = random_complex(n, 12);
    const auto r = random_real(n, 13);
    const double scale = std::max<double>(1.0, static_cast<double>(n));
    EXPECT_NEAR(k::omp::sum(std::span<const double>(r)), k::serial::sum(std::span<const double>(r)), 1e-13 * scale);
    EXPECT_LT(std::abs(k::omp::sum(std::span<const cplx>(a)) - k::serial::sum(std::span<const cplx>(a))),
              1e-13 * scale);
    EXPECT_LT(std::abs(k::omp::dot(a, b) - k::serial::dot(a, b)), 1e-13 * scale);
    EXPECT_EQ(k::omp::min_with_index(r), k::serial::min_with_index(r));
  }
}

TEST(Kernels, ReductionsIndependentOfThreadCount) {
  const std::size_t n = 10007;
  const auto a = random_complex(n, 21), b = random_complex(n, 22);
  const auto r = random_real(n, 23);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const double s1 = k::omp::sum(std::span<const double>(r));
  const cplx d1 = k::omp::dot(a, b);
  for (int threads : {2, 3, 4, 7}) {
    omp_set_num_threads(threads);
    EXPECT_EQ(k::omp::sum(std::span<const double>(r)), s1) << threads;
    EXPECT_EQ(k::omp::dot(a, b), d1) << threads;
  }
  omp_set_num_threads(saved);
}

TEST(Kernels, NsePointMatchesFormula) {
  // (1/i hbar)[-hbar^2/2 lap + (V + R) psi] + (c/2)(lap rho / rho) psi
  const cplx psi{0.3, -0.4}, lap{1.5, 0.2};
  const double hbar = 0.8, v = 0.25, r = -0.1, lr = 0.6, rho = 0.25, c = 0.05;
  const cplx expected = (-hbar * hbar / 2.0 * lap + (v + r) * psi) / cplx(0.0, hbar) + c / 2.0 * (lr / rho) * psi;
  EXPECT_LT(std::abs(k::nse_point(psi, lap, v, r, lr, rho, hbar, c) - expected), 1e-15);
}

}  // namespace
