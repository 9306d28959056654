#pragma once

// Data-parallel pointwise kernels.
//
// `serial` is the reference implementation; `omp` is what the library calls.
// Both share signatures so the tests can compare them directly. Reductions
// are blocked with a fixed block size and the block partials are summed in
// order, so `omp` results do not depend on the thread count.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace borelq::kernels {

using cplx = std::complex<double>;

inline constexpr std::size_t kReductionBlock = 1024;

/// Right-hand side of the nonlinear Schrodinger family at one grid point:
/// (1/i hbar) [ -hbar^2/2 lap_w psi + (V + R) psi ] + (c/2) (lap_rho / rho) psi.
inline cplx nse_point(cplx psi, cplx lap_w, double potential, double r_sum, double lap_rho,
                      double rho_safe, double hbar, double c) {
  const cplx minus_i_over_hbar{0.0, -1.0 / hbar};
  const cplx h_psi = -0.5 * hbar * hbar * lap_w + (potential + r_sum) * psi;
  cplx out = minus_i_over_hbar * h_psi;
  if (c != 0.0) out += 0.5 * c * (lap_rho / rho_safe) * psi;
  return out;
}

namespace serial {

inline void multiply(std::span<cplx> out, std::span<const cplx> a, std::span<const cplx> b) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
}

inline void multiply(std::span<cplx> out, std::span<const double> a, std::span<const cplx> b) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
}

inline void axpy(std::span<cplx> y, cplx a, std::span<const cplx> x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

inline void stage(std::span<cplx> out, std::span<const cplx> psi, double h, std::span<const cplx> k) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = psi[i] + h * k[i];
}

inline void rk4_combine(std::span<cplx> psi, double h, std::span<const cplx> k1,
                        std::span<const cplx> k2, std::span<const cplx> k3,
                        std::span<const cplx> k4) {
  const double w = h / 6.0;
  for (std::size_t i = 0; i < psi.size(); ++i)
    psi[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

inline void density(std::span<double> out, std::span<const cplx> psi) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::norm(psi[i]);
}

inline double sum(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

inline cplx sum(std::span<const cplx> v) {
  cplx s = 0.0;
  for (cplx x : v) s += x;
  return s;
}

/// sum_i conj(a_i) b_i
inline cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

inline std::pair<double, std::size_t> min_with_index(std::span<const double> v) {
  double best = std::numeric_limits<double>::infinity();
  std::size_t at = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < best) {
      best = v[i];
      at = i;
    }
  }
  return {best, at};
}

inline void nse_assemble(std::span<cplx> out, std::span<const cplx> psi, std::span<const cplx> lap_w,
                         std::span<const double> potential, std::span<const double> r_sum,
                         std::span<const double> lap_rho, std::span<const double> rho_safe,
                         double hbar, double c) {
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = nse_point(psi[i], lap_w[i], potential[i], r_sum[i], lap_rho[i], rho_safe[i], hbar, c);
}

}  // namespace serial

namespace omp {

inline void multiply(std::span<cplx> out, std::span<const cplx> a, std::span<const cplx> b) {
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

inline void multiply(std::span<cplx> out, std::span<const double> a, std::span<const cplx> b) {
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

inline void axpy(std::span<cplx> y, cplx a, std::span<const cplx> x) {
  const auto n = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) y[i] += a * x[i];
}

inline void stage(std::span<cplx> out, std::span<const cplx> psi, double h, std::span<const cplx> k) {
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = psi[i] + h * k[i];
}

inline void rk4_combine(std::span<cplx> psi, double h, std::span<const cplx> k1,
                        std::span<const cplx> k2, std::span<const cplx> k3,
                        std::span<const cplx> k4) {
  const double w = h / 6.0;
  const auto n = static_cast<std::ptrdiff_t>(psi.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    psi[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

inline void density(std::span<double> out, std::span<const cplx> psi) {
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = std::norm(psi[i]);
}

namespace detail {

template <class T, class BlockSum>
T blocked_reduce(std::size_t n, BlockSum&& block_sum) {
  const std::size_t blocks = (n + kReductionBlock - 1) / kReductionBlock;
  std::vector<T> partial(blocks, T{});
  const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kReductionBlock;
    const std::size_t hi = std::min(n, lo + kReductionBlock);
    partial[b] = block_sum(lo, hi);
  }
  T total{};
  for (const T& p : partial) total += p;
  return total;
}

}  // namespace detail

inline double sum(std::span<const double> v) {
  return detail::blocked_reduce<double>(v.size(), [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    return s;
  });
}

inline cplx sum(std::span<const cplx> v) {
  return detail::blocked_reduce<cplx>(v.size(), [&](std::size_t lo, std::size_t hi) {
    cplx s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    return s;
  });
}

inline cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
  return detail::blocked_reduce<cplx>(a.size(), [&](std::size_t lo, std::size_t hi) {
    cplx s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += std::conj(a[i]) * b[i];
    return s;
  });
}

// Minimum is order independent; no blocking needed for determinism.
inline std::pair<double, std::size_t> min_with_index(std::span<const double> v) {
  return serial::min_with_index(v);
}

inline void nse_assemble(std::span<cplx> out, std::span<const cplx> psi, std::span<const cplx> lap_w,
                         std::span<const double> potential, std::span<const double> r_sum,
                         std::span<const double> lap_rho, std::span<const double> rho_safe,
                         double hbar, double c) {
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i)
    out[i] = nse_point(psi[i], lap_w[i], potential[i], r_sum[i], lap_rho[i], rho_safe[i], hbar, c);
}

}  // namespace omp

}  // namespace borelq::kernels
