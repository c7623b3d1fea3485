#pragma once

// Raster types and the primitive signal operations shared by every feature
// extractor. Channels are normalized to [0,1]; borders use edge replication.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <zlib.h>

#include "pae/error.hpp"

namespace pae {

struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  Plane() = default;
  Plane(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  std::size_t size() const { return values.size(); }
  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }

  // Edge-replicated read.
  double clamped(int x, int y) const {
    x = std::clamp(x, 0, width - 1);
    y = std::clamp(y, 0, height - 1);
    return at(x, y);
  }

  bool operator==(const Plane&) const = default;
};

struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<double> rgb;  // row-major, 3 channels per pixel

  RasterImage() = default;
  RasterImage(int w, int h, double fill = 0.0)
      : width(w), height(h), rgb(static_cast<std::size_t>(w) * h * 3, fill) {}

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

  double* pixel(int x, int y) { return &rgb[(static_cast<std::size_t>(y) * width + x) * 3]; }
  const double* pixel(int x, int y) const {
    return &rgb[(static_cast<std::size_t>(y) * width + x) * 3];
  }

  void set(int x, int y, double r, double g, double b) {
    double* p = pixel(x, y);
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }

  bool operator==(const RasterImage&) const = default;
};

struct Histogram256 {
  std::array<std::uint64_t, 256> bins{};
  std::uint64_t total = 0;
};

// Odd-sized filter kernel, row-major.
struct Kernel {
  int width = 0;
  int height = 0;
  std::vector<double> weights;
};

inline void validate(const RasterImage& img) {
  if (img.width < 1 || img.height < 1) fail_data("image has a zero dimension");
  if (img.rgb.size() != img.pixel_count() * 3) fail_data("image buffer size mismatch");
}

inline Plane luminance(const RasterImage& img) {
  Plane out(img.width, img.height);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double* p = &img.rgb[i * 3];
    out.values[i] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  }
  return out;
}

struct HsvPixel {
  double h = 0.0;
  double s = 0.0;
  double v = 0.0;
};

// Hexcone model. Hue in [0,1), achromatic hue is 0.
inline HsvPixel rgb_to_hsv(double r, double g, double b) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  HsvPixel out;
  out.v = mx;
  out.s = mx > 0.0 ? delta / mx : 0.0;
  if (delta <= 0.0) return out;
  double h;
  if (mx == r) {
    h = (g - b) / delta;
    if (h < 0.0) h += 6.0;
  } else if (mx == g) {
    h = (b - r) / delta + 2.0;
  } else {
    h = (r - g) / delta + 4.0;
  }
  h /= 6.0;
  if (h >= 1.0) h -= 1.0;
  out.h = h;
  return out;
}

struct HsvPlanes {
  Plane h;
  Plane s;
  Plane v;
};

inline HsvPlanes rgb_to_hsv(const RasterImage& img) {
  HsvPlanes out{Plane(img.width, img.height), Plane(img.width, img.height),
                Plane(img.width, img.height)};
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const double* p = &img.rgb[i * 3];
    const HsvPixel hsv = rgb_to_hsv(p[0], p[1], p[2]);
    out.h.values[i] = hsv.h;
    out.s.values[i] = hsv.s;
    out.v.values[i] = hsv.v;
  }
  return out;
}

// True 2-D convolution (kernel flipped) with edge replication.
inline Plane convolve(const Plane& p, const Kernel& k) {
  if (k.width % 2 == 0 || k.height % 2 == 0 || k.width < 1 || k.height < 1)
    fail_config("kernel dimensions must be odd");
  if (k.weights.size() != static_cast<std::size_t>(k.width) * k.height)
    fail_config("kernel weight count mismatch");
  const int rx = k.width / 2;
  const int ry = k.height / 2;
  Plane out(p.width, p.height);
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < p.width; ++x) {
      double acc = 0.0;
      for (int j = -ry; j <= ry; ++j) {
        for (int i = -rx; i <= rx; ++i) {
          const double w = k.weights[static_cast<std::size_t>(j + ry) * k.width + (i + rx)];
          if (w != 0.0) acc += w * p.clamped(x - i, y - j);
        }
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

struct Gradient {
  Plane gx;
  Plane gy;
};

// Standard 3x3 Sobel responses: gx grows left-to-right, gy top-to-bottom.
inline Gradient sobel(const Plane& p) {
  Gradient g{Plane(p.width, p.height), Plane(p.width, p.height)};
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < p.width; ++x) {
      const double a = p.clamped(x - 1, y - 1), b = p.clamped(x, y - 1), c = p.clamped(x + 1, y - 1);
      const double d = p.clamped(x - 1, y), f = p.clamped(x + 1, y);
      const double e = p.clamped(x - 1, y + 1), h = p.clamped(x, y + 1), i = p.clamped(x + 1, y + 1);
      g.gx.at(x, y) = (c + 2.0 * f + i) - (a + 2.0 * d + e);
      g.gy.at(x, y) = (e + 2.0 * h + i) - (a + 2.0 * b + c);
    }
  }
  return g;
}

inline Plane sobel_magnitude(const Plane& p) {
  const Gradient g = sobel(p);
  Plane out(p.width, p.height);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] = std::sqrt(g.gx.values[i] * g.gx.values[i] + g.gy.values[i] * g.gy.values[i]);
  return out;
}

inline std::vector<double> gaussian_kernel_1d(double sigma) {
  if (!(sigma > 0.0)) fail_config("gaussian sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> w(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    w[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += w[i + radius];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Separable Gaussian, radius ceil(3 sigma), edge replication.
inline Plane gaussian_blur(const Plane& p, double sigma) {
  const std::vector<double> w = gaussian_kernel_1d(sigma);
  const int r = static_cast<int>(w.size() / 2);
  Plane tmp(p.width, p.height);
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += w[i + r] * p.clamped(x + i, y);
      tmp.at(x, y) = acc;
    }
  Plane out(p.width, p.height);
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += w[i + r] * tmp.clamped(x, y + i);
      out.at(x, y) = acc;
    }
  return out;
}

// Pixel-center aligned bilinear sampling with edge clamping.
inline Plane resize_bilinear(const Plane& p, int w, int h) {
  if (w < 1 || h < 1) fail_config("resize target must be at least 1x1");
  if (w == p.width && h == p.height) return p;
  Plane out(w, h);
  const double sx = static_cast<double>(p.width) / w;
  const double sy = static_cast<double>(p.height) / h;
  for (int y = 0; y < h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(p.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, p.height - 1);
    const double ty = fy - y0;
    for (int x = 0; x < w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(p.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, p.width - 1);
      const double tx = fx - x0;
      const double top = p.at(x0, y0) * (1.0 - tx) + p.at(x1, y0) * tx;
      const double bottom = p.at(x0, y1) * (1.0 - tx) + p.at(x1, y1) * tx;
      out.at(x, y) = top * (1.0 - ty) + bottom * ty;
    }
  }
  return out;
}

inline RasterImage resize_bilinear(const RasterImage& img, int w, int h) {
  if (w == img.width && h == img.height) return img;
  RasterImage out(w, h);
  for (int c = 0; c < 3; ++c) {
    Plane ch(img.width, img.height);
    for (std::size_t i = 0; i < ch.size(); ++i) ch.values[i] = img.rgb[i * 3 + c];
    const Plane r = resize_bilinear(ch, w, h);
    for (std::size_t i = 0; i < r.size(); ++i) out.rgb[i * 3 + c] = r.values[i];
  }
  return out;
}

inline int histogram_bin(double v) {
  if (!(v > 0.0)) return 0;
  return std::min(255, static_cast<int>(v * 256.0));
}

inline Histogram256 histogram256(const Plane& p) {
  Histogram256 h;
  for (double v : p.values) ++h.bins[histogram_bin(v)];
  h.total = p.size();
  return h;
}

// CDF-based equalization over histogram256. A single occupied bin maps every
// pixel to 0.5.
inline Plane equalize_contrast(const Plane& p) {
  const Histogram256 h = histogram256(p);
  std::array<std::uint64_t, 256> cdf{};
  std::uint64_t run = 0;
  for (int b = 0; b < 256; ++b) {
    run += h.bins[b];
    cdf[b] = run;
  }
  std::uint64_t cdf_min = 0;
  for (int b = 0; b < 256; ++b)
    if (h.bins[b] > 0) {
      cdf_min = cdf[b];
      break;
    }
  Plane out(p.width, p.height);
  if (h.total == cdf_min) {
    std::fill(out.values.begin(), out.values.end(), 0.5);
    return out;
  }
  const double denom = static_cast<double>(h.total - cdf_min);
  for (std::size_t i = 0; i < p.size(); ++i)
    out.values[i] = static_cast<double>(cdf[histogram_bin(p.values[i])] - cdf_min) / denom;
  return out;
}

inline Plane median3(const Plane& p) {
  Plane out(p.width, p.height);
  std::array<double, 9> win{};
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x) {
      int n = 0;
      for (int j = -1; j <= 1; ++j)
        for (int i = -1; i <= 1; ++i) win[n++] = p.clamped(x + i, y + j);
      std::nth_element(win.begin(), win.begin() + 4, win.end());
      out.at(x, y) = win[4];
    }
  return out;
}

inline double shannon_entropy(const Histogram256& h) {
  if (h.total == 0) return 0.0;
  double e = 0.0;
  for (std::uint64_t c : h.bins) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(h.total);
    e -= p * std::log2(p);
  }
  return e;
}

inline std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

inline std::vector<std::uint8_t> quantize8(const Plane& p) {
  std::vector<std::uint8_t> out(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = to_byte(p.values[i]);
  return out;
}

inline constexpr int kCompressionLevel = 9;

// Kolmogorov-complexity proxy: deflated size of the 8-bit plane over its raw size.
inline double compression_ratio(const Plane& p) {
  const std::vector<std::uint8_t> raw = quantize8(p);
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::vector<Bytef> buf(bound);
  if (compress2(buf.data(), &bound, raw.data(), static_cast<uLong>(raw.size()), kCompressionLevel) != Z_OK)
    fail_data("deflate failed");
  return static_cast<double>(bound) / static_cast<double>(raw.size());
}

inline double mean(const Plane& p) {
  return std::accumulate(p.values.begin(), p.values.end(), 0.0) / static_cast<double>(p.size());
}

inline double rms_distance(const Plane& a, const Plane& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.size()));
}

inline Plane crop(const Plane& p, int x0, int y0, int w, int h) {
  Plane out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = p.at(x0 + x, y0 + y);
  return out;
}

inline Plane flip_horizontal(const Plane& p) {
  Plane out(p.width, p.height);
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x) out.at(x, y) = p.at(p.width - 1 - x, y);
  return out;
}

inline RasterImage flip_horizontal(const RasterImage& img) {
  RasterImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const double* s = img.pixel(img.width - 1 - x, y);
      out.set(x, y, s[0], s[1], s[2]);
    }
  return out;
}

// Downscale (never upscale) so that both sides fit within max_side.
inline Plane fit_within(const Plane& p, int max_side) {
  if (p.width <= max_side && p.height <= max_side) return p;
  const double scale = std::min(static_cast<double>(max_side) / p.width,
                                static_cast<double>(max_side) / p.height);
  const int w = std::max(1, static_cast<int>(std::lround(p.width * scale)));
  const int h = std::max(1, static_cast<int>(std::lround(p.height * scale)));
  return resize_bilinear(p, std::min(w, max_side), std::min(h, max_side));
}

}  // namespace pae
