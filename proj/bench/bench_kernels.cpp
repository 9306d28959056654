// Serial reference vs OpenMP kernels. Thread count follows OMP_NUM_THREADS.

#include <benchmark/benchmark.h>

#include <complex>
#include <random>
#include <vector>

#include "borelq/kernels.hpp"

namespace {

namespace k = borelq::kernels;
using cplx = std::complex<double>;

struct Data {
  std::vector<cplx> a, b, c, d, e, out;
  std::vector<double> r0, r1, r2, r3;

  explicit Data(std::size_t n) : a(n), b(n), c(n), d(n), e(n), out(n), r0(n), r1(n), r2(n), r3(n) {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> g;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = {g(rng), g(rng)};
      b[i] = {g(rng), g(rng)};
      c[i] = {g(rng), g(rng)};
      d[i] = {g(rng), g(rng)};
      e[i] = {g(rng), g(rng)};
      r0[i] = g(rng);
      r1[i] = g(rng);
      r2[i] = g(rng);
      r3[i] = 1.0 + std::abs(g(rng));
    }
  }
};

template <bool Omp>
void BM_multiply(benchmark::State& state) {
  Data x(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Omp) k::omp::multiply(x.out, x.a, x.b);
    else k::serial::multiply(x.out, x.a, x.b);
    benchmark::DoNotOptimize(x.out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Omp>
void BM_rk4_combine(benchmark::State& state) {
  Data x(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Omp) k::omp::rk4_combine(x.out, 1e-3, x.a, x.b, x.c, x.d);
    else k::serial::rk4_combine(x.out, 1e-3, x.a, x.b, x.c, x.d);
    benchmark::DoNotOptimize(x.out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Omp>
void BM_sum(benchmark::State& state) {
  Data x(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    double s = Omp ? k::omp::sum(std::span<const double>(x.r0)) : k::serial::sum(std::span<const double>(x.r0));
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Omp>
void BM_dot(benchmark::State& state) {
  Data x(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    cplx s = Omp ? k::omp::dot(x.a, x.b) : k::serial::dot(x.a, x.b);
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Omp>
void BM_nse_assemble(benchmark::State& state) {
  Data x(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Omp) k::omp::nse_assemble(x.out, x.a, x.b, x.r0, x.r1, x.r2, x.r3, 1.0, 0.1);
    else k::serial::nse_assemble(x.out, x.a, x.b, x.r0, x.r1, x.r2, x.r3, 1.0, 0.1);
    benchmark::DoNotOptimize(x.out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

constexpr long kLo = 1 << 10;
constexpr long kHi = 1 << 20;

BENCHMARK(BM_multiply<false>)->Name("multiply/serial")->RangeMultiplier(8)->Range(kLo, kHi);
BENCHMARK(BM_multiply<true>)->Name("multiply/omp")->RangeMultiplier(8)->Range(kLo, kHi);
BENCHMARK(BM_rk4_combine<false>)->Name("rk4_combine/serial")->RangeMultiplier(8)->Range(kLo, kHi);
BENCHMARK(BM_rk4_combine<true>)->Name("rk4_combine/omp")->RangeMultiplier(8)->Range(kLo, kHi);
BENCHMARK(BM_sum<false>)->Name("sum/serial")->RangeMultiplier(8)->Range(kLo, kHi);
BENCHMARK(BM_sum<true>)->Name("sum/omp")->RangeMultiplier(8)->Range(kLo, kHi);
BENCHMARK(BM_dot<false>)->Name("dot/serial")->RangeMultiplier(8)->Range(kLo, kHi);
BENCHMARK(BM_dot<true>)->Name("dot/omp")->RangeMultiplier(8)->Range(kLo, kHi);
BENCHMARK(BM_nse_assemble<false>)->Name("nse_assemble/serial")->RangeMultiplier(8)->Range(kLo, kHi);
BENCHMARK(BM_nse_assemble<true>)->Name("nse_assemble/omp")->RangeMultiplier(8)->Range(kLo, kHi);

}  // namespace

BENCHMARK_MAIN();
