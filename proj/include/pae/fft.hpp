#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "pae/error.hpp"
#include "pae/image.hpp"

namespace pae {

using Complex = std::complex<double>;

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 FFT. Forward uses exp(-2 pi i k n / N); the
// inverse is unnormalized, callers divide by N.
inline void fft_inplace(std::span<Complex> a, bool inverse = false) {
  const std::size_t n = a.size();
  if (!is_power_of_two(static_cast<int>(n))) fail_config("FFT length must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        // Twiddles from the exact angle rather than a running product keep
        // rounding error flat in len.
        const Complex w(std::cos(ang * static_cast<double>(k)), std::sin(ang * static_cast<double>(k)));
        const Complex u = a[i + k];
        const Complex v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

// Row-major 2-D transform of a width x height grid.
inline void fft2d_inplace(std::vector<Complex>& data, int width, int height, bool inverse = false) {
  if (!is_power_of_two(width) || !is_power_of_two(height))
    fail_config("FFT size must be a power of two");
  for (int y = 0; y < height; ++y)
    fft_inplace(std::span<Complex>(data.data() + static_cast<std::size_t>(y) * width, width), inverse);
  std::vector<Complex> col(height);
  for (int x = 0; x < width; ++x) {
    for (int y = 0; y < height; ++y) col[y] = data[static_cast<std::size_t>(y) * width + x];
    fft_inplace(col, inverse);
    for (int y = 0; y < height; ++y) data[static_cast<std::size_t>(y) * width + x] = col[y];
  }
}

inline std::vector<Complex> fft2d(const Plane& p) {
  std::vector<Complex> data(p.values.begin(), p.values.end());
  fft2d_inplace(data, p.width, p.height);
  return data;
}

// |F(u,v)| of the size x size bilinear resample of p. DC equals the sum of
// the resampled values.
inline Plane fft_amplitude(const Plane& p, int size) {
  if (!is_power_of_two(size)) fail_config("spectrum size must be a power of two");
  const Plane r = resize_bilinear(p, size, size);
  const std::vector<Complex> f = fft2d(r);
  Plane out(size, size);
  for (std::size_t i = 0; i < f.size(); ++i) out.values[i] = std::abs(f[i]);
  return out;
}

}  // namespace pae
