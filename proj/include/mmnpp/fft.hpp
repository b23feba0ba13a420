// Copyright 2026 The mmnpp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MMNPP_FFT_HPP
#define MMNPP_FFT_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace mmnpp::detail {

// Iterative radix-2 Cooley-Tukey; size must be a power of two.
inline void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  if (inverse)
    for (std::complex<double>& x : a) x /= static_cast<double>(n);
}

/// DFT of arbitrary length via Bluestein's chirp-z transform (exact Fourier
/// frequencies j/n, any n).
inline std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& input) {
  const std::size_t n = input.size();
  if (n == 0) return {};
  if ((n & (n - 1)) == 0) {
    std::vector<std::complex<double>> a = input;
    fft_pow2(a, false);
    return a;
  }

  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;

  // chirp[k] = exp(-i pi k^2 / n); k^2 mod 2n keeps the angle argument small.
  std::vector<std::complex<double>> chirp(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t k2 = (k * k) % (2 * n);
    const double ang = -M_PI * static_cast<double>(k2) / static_cast<double>(n);
    chirp[k] = std::complex<double>(std::cos(ang), std::sin(ang));
  }

  std::vector<std::complex<double>> a(m), b(m);
  for (std::size_t k = 0; k < n; ++k) a[k] = input[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) b[k] = b[m - k] = std::conj(chirp[k]);

  fft_pow2(a, false);
  fft_pow2(b, false);
  for (std::size_t k = 0; k < m; ++k) a[k] *= b[k];
  fft_pow2(a, true);

  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * chirp[k];
  return out;
}

}  // namespace mmnpp::detail

#endif  // MMNPP_FFT_HPP
