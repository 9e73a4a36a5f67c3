#pragma once

#include <complex>
#include <span>

namespace crimewave::detail {

// Unnormalized in-place complex DFT of length n (any n, FFTW picks the
// algorithm). Plans are cached per (n, direction) and shared across threads.
void fft_forward(std::span<std::complex<double>> data);
void fft_backward(std::span<std::complex<double>> data);

}  // namespace crimewave::detail
