#pragma once

#include <Eigen/Core>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace swasr::detail {

inline Eigen::Index next_pow2(Eigen::Index n) {
  Eigen::Index p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Periodic Hann window.
inline Eigen::ArrayXd hann(Eigen::Index n) {
  return 0.5 - 0.5 * (Eigen::ArrayXd::LinSpaced(n, 0.0, double(n - 1)) * (2.0 * std::numbers::pi / double(n))).cos();
}

using Spectrum = std::vector<std::complex<double>>;

inline Spectrum rfft_full(Eigen::FFT<double>& fft, const std::vector<double>& x) {
  Spectrum out(x.size());
  fft.fwd(out.data(), x.data(), static_cast<Eigen::Index>(x.size()));
  return out;
}

inline std::vector<double> irfft(Eigen::FFT<double>& fft, const Spectrum& spectrum) {
  std::vector<double> out(spectrum.size());
  fft.inv(out.data(), spectrum.data(), static_cast<Eigen::Index>(spectrum.size()));
  return out;
}

}  // namespace swasr::detail
