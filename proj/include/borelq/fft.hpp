#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace borelq::fft {

// Row-major transforms of rank 1 or 2 over `shape`. Plans are cached per
// (shape, direction); planning is serialized, execution is reentrant.

/// Unnormalized forward DFT, in place.
void forward(std::span<std::complex<double>> data, std::span<const std::size_t> shape);

/// Inverse DFT scaled by 1/size, in place.
void backward(std::span<std::complex<double>> data, std::span<const std::size_t> shape);

}  // namespace borelq::fft
