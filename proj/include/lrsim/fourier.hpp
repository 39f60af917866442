#pragma once

#include <complex>
#include <span>
#include <vector>

namespace lrsim::fourier {

/// Unnormalised forward DFT of a real sequence, bins 0..n/2:
/// X_j = sum_m x_m exp(-2 pi i j m / n). Any length n >= 1.
[[nodiscard]] std::vector<std::complex<double>> real_dft(std::span<const double> x);

/// Inverse of real_dft for a length-n output, including the 1/n factor.
[[nodiscard]] std::vector<double> inverse_real_dft(std::span<const std::complex<double>> spectrum, std::size_t n);

}  // namespace lrsim::fourier
