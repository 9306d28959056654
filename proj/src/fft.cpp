#include "borelq/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace borelq::fft {
namespace {

using PlanKey = std::tuple<std::size_t, std::size_t, std::size_t, int>;

class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::span<const std::size_t> shape, int sign) {
    const std::size_t n0 = shape[0];
    const std::size_t n1 = shape.size() > 1 ? shape[1] : 0;
    const PlanKey key{shape.size(), n0, n1, sign};

    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::size_t total = n0 * (n1 == 0 ? 1 : n1);
    std::vector<std::complex<double>> scratch(total);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = nullptr;
    if (shape.size() == 1) {
      plan = fftw_plan_dft_1d(static_cast<int>(n0), buf, buf, sign, flags);
    } else if (shape.size() == 2) {
      plan = fftw_plan_dft_2d(static_cast<int>(n0), static_cast<int>(n1), buf, buf, sign, flags);
    }
    if (plan == nullptr) throw std::runtime_error("fft: unable to create plan");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

void execute(std::span<std::complex<double>> data, std::span<const std::size_t> shape, int sign) {
  if (shape.empty() || shape.size() > 2) throw std::invalid_argument("fft: rank must be 1 or 2");
  std::size_t total = 1;
  for (auto n : shape) total *= n;
  if (total != data.size()) throw std::invalid_argument("fft: data size does not match shape");
  fftw_plan plan = cache().get(shape, sign);
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, buf, buf);
}

}  // namespace

void forward(std::span<std::complex<double>> data, std::span<const std::size_t> shape) {
  execute(data, shape, FFTW_FORWARD);
}

void backward(std::span<std::complex<double>> data, std::span<const std::size_t> shape) {
  execute(data, shape, FFTW_BACKWARD);
  const double scale = 1.0 / static_cast<double>(data.size());
  for (auto& v : data) v *= scale;
}

}  // namespace borelq::fft
