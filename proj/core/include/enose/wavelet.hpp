#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

namespace enose {

// Orthonormal 10-tap analysis pair. The high-pass is the quadrature mirror
// of the low-pass: highpass[k] = (-1)^k * lowpass[9-k].
struct WaveletFilters {
  std::array<double, 10> lowpass{};
  std::array<double, 10> highpass{};

  // Daubechies-5 decomposition filters, correct to the last double bit
  // (sum = sqrt2, unit energy, even-shift orthogonality, 5 vanishing moments).
  static WaveletFilters db5();
};

// One analysis level with periodic boundary, stride 2:
//   approx[i] = sum_k lowpass[k]  * x[(2i + k) mod T]
//   detail[i] = sum_k highpass[k] * x[(2i + k) mod T]
// Requires T even and T >= 10.
std::pair<std::vector<double>, std::vector<double>> dwt1(std::span<const double> signal,
                                                         const WaveletFilters& filters);

// Adjoint synthesis; exact inverse of dwt1 for orthonormal filters.
std::vector<double> idwt1(std::span<const double> approx, std::span<const double> detail,
                          const WaveletFilters& filters);

}  // namespace enose
