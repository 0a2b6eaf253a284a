#include "enose/wavelet.hpp"

#include <stdexcept>
#include <string>

namespace enose {

WaveletFilters WaveletFilters::db5() {
  WaveletFilters f;
  f.lowpass = {
      0.0033357252854737712,  -0.012580751999081999, -0.006241490212798274,
      0.07757149384004572,    -0.032244869584638375, -0.24229488706638203,
      0.13842814590132074,    0.7243085284377729,    0.6038292697971896,
      0.16010239797419293,
  };
  for (int k = 0; k < 10; ++k) {
    f.highpass[static_cast<std::size_t>(k)] =
        (k % 2 == 0 ? 1.0 : -1.0) * f.lowpass[static_cast<std::size_t>(9 - k)];
  }
  return f;
}

namespace {

void check_length(std::size_t n) {
  if (n % 2 != 0) {
    throw std::invalid_argument("dwt1: signal length " + std::to_string(n) + " is odd");
  }
  if (n < 10) {
    throw std::invalid_argument("dwt1: signal length " + std::to_string(n) +
                                " is shorter than the 10-tap filter");
  }
}

}  // namespace

std::pair<std::vector<double>, std::vector<double>> dwt1(std::span<const double> signal,
                                                         const WaveletFilters& filters) {
  const std::size_t n = signal.size();
  check_length(n);
  const std::size_t half = n / 2;
  std::vector<double> approx(half), detail(half);
  for (std::size_t i = 0; i < half; ++i) {
    double a = 0.0, d = 0.0;
    std::size_t idx = 2 * i;
    for (std::size_t k = 0; k < 10; ++k) {
      const double v = signal[idx];
      a += filters.lowpass[k] * v;
      d += filters.highpass[k] * v;
      if (++idx == n) idx = 0;  // 2i + k wraps at most once
    }
    approx[i] = a;
    detail[i] = d;
  }
  return {std::move(approx), std::move(detail)};
}

std::vector<double> idwt1(std::span<const double> approx, std::span<const double> detail,
                          const WaveletFilters& filters) {
  if (approx.size() != detail.size()) {
    throw std::invalid_argument("idwt1: subband lengths differ (" +
                                std::to_string(approx.size()) + " vs " +
                                std::to_string(detail.size()) + ")");
  }
  const std::size_t half = approx.size();
  const std::size_t n = 2 * half;
  check_length(n);
  std::vector<double> signal(n, 0.0);
  for (std::size_t i = 0; i < half; ++i) {
    std::size_t idx = 2 * i;
    for (std::size_t k = 0; k < 10; ++k) {
      signal[idx] += approx[i] * filters.lowpass[k] + detail[i] * filters.highpass[k];
      if (++idx == n) idx = 0;
    }
  }
  return signal;
}

}  // namespace enose
