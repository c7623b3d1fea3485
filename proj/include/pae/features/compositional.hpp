#pragma once

// Compositional features: sharpness, camera shake, color, spatial layout and
// texture. Every extractor is a pure function of the raster.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <queue>
#include <string>
#include <tuple>
#include <vector>

#include "pae/error.hpp"
#include "pae/features/lighting.hpp"
#include "pae/fft.hpp"
#include "pae/image.hpp"

namespace pae {

// ---------------------------------------------------------------- sharpness

// Tenengrad: mean of Gx^2 + Gy^2 over the luminance plane.
inline double gradient_energy(const Plane& y) {
  const Gradient g = sobel(y);
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += g.gx.values[i] * g.gx.values[i] + g.gy.values[i] * g.gy.values[i];
  return acc / static_cast<double>(y.size());
}

inline double overall_sharpness(const RasterImage& img) { return gradient_energy(luminance(img)); }

// ------------------------------------------------------------- camera shake

inline constexpr int kShakeTile = 32;
inline constexpr int kShakeSectors = 8;
inline constexpr double kShakeAnisotropy = 2.5;
inline constexpr double kShakeGradientShare = 0.1;

// max/mean of the per-sector mean spectral power of one Hann-windowed tile.
// Sectors are centered on multiples of pi/8 so the axes fall mid-sector.
inline double tile_anisotropy(const Plane& y, int x0, int y0) {
  constexpr int n = kShakeTile;
  double m = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) m += y.at(x0 + i, y0 + j);
  m /= n * n;
  std::vector<Complex> data(n * n);
  for (int j = 0; j < n; ++j) {
    const double wj = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * j / n);
    for (int i = 0; i < n; ++i) {
      const double wi = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
      data[j * n + i] = (y.at(x0 + i, y0 + j) - m) * wi * wj;
    }
  }
  fft2d_inplace(data, n, n);
  std::array<double, kShakeSectors> energy{};
  std::array<int, kShakeSectors> count{};
  const double width = std::numbers::pi / kShakeSectors;
  for (int v = 0; v < n; ++v)
    for (int u = 0; u < n; ++u) {
      if (u == 0 && v == 0) continue;
      const int fu = u < n / 2 ? u : u - n;
      const int fv = v < n / 2 ? v : v - n;
      double ang = std::atan2(static_cast<double>(fv), static_cast<double>(fu));
      if (ang < 0.0) ang += std::numbers::pi;
      const int s = static_cast<int>(std::floor((ang + width / 2.0) / width)) % kShakeSectors;
      energy[s] += std::norm(data[v * n + u]);
      ++count[s];
    }
  double total = 0.0, peak = 0.0;
  for (int s = 0; s < kShakeSectors; ++s) {
    const double e = energy[s] / count[s];
    total += e;
    peak = std::max(peak, e);
  }
  const double avg = total / kShakeSectors;
  return avg > 0.0 ? peak / avg : 0.0;
}

inline double camera_shake(const RasterImage& img) {
  const Plane y = luminance(img);
  const Gradient g = sobel(y);
  Plane energy(y.width, y.height);
  for (std::size_t i = 0; i < y.size(); ++i)
    energy.values[i] = g.gx.values[i] * g.gx.values[i] + g.gy.values[i] * g.gy.values[i];
  const double global = mean(energy);
  if (!(global > 0.0)) return 0.0;
  std::size_t moving = 0;
  for (int ty = 0; ty + kShakeTile <= y.height; ty += kShakeTile)
    for (int tx = 0; tx + kShakeTile <= y.width; tx += kShakeTile) {
      double local = 0.0;
      for (int j = 0; j < kShakeTile; ++j)
        for (int i = 0; i < kShakeTile; ++i) local += energy.at(tx + i, ty + j);
      local /= kShakeTile * kShakeTile;
      if (local <= kShakeGradientShare * global) continue;
      if (tile_anisotropy(y, tx, ty) > kShakeAnisotropy) moving += kShakeTile * kShakeTile;
    }
  return static_cast<double>(moving) / static_cast<double>(y.size());
}

// -------------------------------------------------------------------- color

struct ColorPrototype {
  const char* name;
  double h, s, v;
};

inline constexpr std::array<ColorPrototype, 9> kColorPrototypes{{
    {"black", 0.0, 0.0, 0.0},
    {"white", 0.0, 0.0, 1.0},
    {"gray", 0.0, 0.0, 0.5},
    {"flesh", 0.07, 0.4, 0.85},
    {"red", 0.0, 1.0, 1.0},
    {"green", 1.0 / 3.0, 1.0, 1.0},
    {"blue", 2.0 / 3.0, 1.0, 1.0},
    {"magenta", 5.0 / 6.0, 1.0, 1.0},
    {"purple", 0.77, 0.6, 0.5},
}};

// Points of the HSV cone: hue is an angle, so the distance is circular in h
// and collapses hue for achromatic or dark colors.
inline std::array<double, 3> hsv_cone(double h, double s, double v) {
  const double a = 2.0 * std::numbers::pi * h;
  return {s * v * std::cos(a), s * v * std::sin(a), v};
}

inline std::size_t nearest_color_name(double h, double s, double v) {
  const auto p = hsv_cone(h, s, v);
  std::size_t best = 0;
  double best_d = 1e300;
  for (std::size_t c = 0; c < kColorPrototypes.size(); ++c) {
    const auto q = hsv_cone(kColorPrototypes[c].h, kColorPrototypes[c].s, kColorPrototypes[c].v);
    const double d = (p[0] - q[0]) * (p[0] - q[0]) + (p[1] - q[1]) * (p[1] - q[1]) + (p[2] - q[2]) * (p[2] - q[2]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

// Circular mean of hues in [0,1); 0 when the resultant vanishes.
inline double circular_mean_hue(double sum_cos, double sum_sin) {
  if (std::hypot(sum_cos, sum_sin) < 1e-12) return 0.0;
  double h = std::atan2(sum_sin, sum_cos) / (2.0 * std::numbers::pi);
  if (h < 0.0) h += 1.0;
  if (h >= 1.0) h -= 1.0;
  return h;
}

struct HsvMeans {
  double h = 0.0, s = 0.0, v = 0.0;
};

inline HsvMeans hsv_means(const HsvPlanes& hsv, int x0, int y0, int x1, int y1) {
  double c = 0.0, sn = 0.0, s = 0.0, v = 0.0;
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) {
      const double a = 2.0 * std::numbers::pi * hsv.h.at(x, y);
      c += std::cos(a);
      sn += std::sin(a);
      s += hsv.s.at(x, y);
      v += hsv.v.at(x, y);
    }
  const double n = static_cast<double>(x1 - x0) * (y1 - y0);
  return {circular_mean_hue(c, sn), s / n, v / n};
}

struct Pad {
  double pleasure = 0.0, arousal = 0.0, dominance = 0.0;
};

inline Pad pad_from(double mean_s, double mean_v) {
  return {0.69 * mean_v + 0.22 * mean_s, -0.31 * mean_v + 0.60 * mean_s, 0.76 * mean_v + 0.32 * mean_s};
}

inline int quantize_unit(double v, int bins) { return std::clamp(static_cast<int>(std::floor(v * bins)), 0, bins - 1); }

template <std::size_t N>
double population_std(const std::array<double, N>& a, std::size_t offset, std::size_t count) {
  double m = 0.0;
  for (std::size_t i = 0; i < count; ++i) m += a[offset + i];
  m /= static_cast<double>(count);
  double acc = 0.0;
  for (std::size_t i = 0; i < count; ++i) acc += (a[offset + i] - m) * (a[offset + i] - m);
  return std::sqrt(acc / static_cast<double>(count));
}

struct ColorFeatures {
  std::array<double, 9> color_names{};
  std::array<double, 6> hsv_avg{};  // h, s, v whole image; h, s, v inner region
  std::array<double, 3> pad{};
  std::array<double, 20> itten_hist{};  // 12 hue, 3 saturation, 5 brightness
  std::array<double, 3> itten_contrasts{};
  double contrast_michelson = 0.0;
  double contrast_simple = 0.0;
};

inline ColorFeatures color_block(const RasterImage& img) {
  validate(img);
  ColorFeatures f;
  const HsvPlanes hsv = rgb_to_hsv(img);
  const double n = static_cast<double>(img.pixel_count());
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const double h = hsv.h.values[i], s = hsv.s.values[i], v = hsv.v.values[i];
    f.color_names[nearest_color_name(h, s, v)] += 1.0;
    f.itten_hist[quantize_unit(h, 12)] += 1.0;
    f.itten_hist[12 + quantize_unit(s, 3)] += 1.0;
    f.itten_hist[15 + quantize_unit(v, 5)] += 1.0;
  }
  for (double& c : f.color_names) c /= n;
  for (double& c : f.itten_hist) c /= n;
  f.itten_contrasts = {population_std(f.itten_hist, 0, 12), population_std(f.itten_hist, 12, 3),
                       population_std(f.itten_hist, 15, 5)};

  const HsvMeans whole = hsv_means(hsv, 0, 0, img.width, img.height);
  const int x0 = img.width / 3, y0 = img.height / 3;
  const int x1 = std::max(x0 + 1, 2 * img.width / 3), y1 = std::max(y0 + 1, 2 * img.height / 3);
  const HsvMeans inner = hsv_means(hsv, x0, y0, x1, y1);
  f.hsv_avg = {whole.h, whole.s, whole.v, inner.h, inner.s, inner.v};
  const Pad pad = pad_from(whole.s, whole.v);
  f.pad = {pad.pleasure, pad.arousal, pad.dominance};

  const Plane y = luminance(img);
  const auto [lo, hi] = std::minmax_element(y.values.begin(), y.values.end());
  const double ymean = mean(y);
  f.contrast_michelson = (*hi + *lo) > 0.0 ? (*hi - *lo) / (*hi + *lo) : 0.0;
  f.contrast_simple = ymean > 0.0 ? (*hi - *lo) / ymean : 0.0;
  return f;
}

// ------------------------------------------------------------------ spatial

// Magnitude-weighted histogram of Sobel orientation over [0, 2pi), sum 1.
inline std::array<double, 16> edge_orientation_histogram(const Plane& p) {
  std::array<double, 16> h{};
  const Gradient g = sobel(p);
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double mag = std::hypot(g.gx.values[i], g.gy.values[i]);
    if (mag == 0.0) continue;
    double a = std::atan2(g.gy.values[i], g.gx.values[i]);
    if (a < 0.0) a += 2.0 * std::numbers::pi;
    const int b = std::min(15, static_cast<int>(a / (2.0 * std::numbers::pi) * 16.0));
    h[b] += mag;
    total += mag;
  }
  if (total > 0.0)
    for (double& v : h) v /= total;
  return h;
}

inline constexpr int kHogCell = 8;
inline constexpr int kHogBins = 9;

// Dalal-Triggs style HOG: [-1,0,1] gradients, unsigned orientation with hard
// binning, 2x2-cell blocks at one-cell stride, L2 normalization.
inline std::vector<double> hog_descriptor(const Plane& p) {
  const int cx = p.width / kHogCell, cy = p.height / kHogCell;
  if (cx < 2 || cy < 2) return {};
  std::vector<double> cells(static_cast<std::size_t>(cx) * cy * kHogBins, 0.0);
  for (int y = 0; y < cy * kHogCell; ++y)
    for (int x = 0; x < cx * kHogCell; ++x) {
      const double gx = p.clamped(x + 1, y) - p.clamped(x - 1, y);
      const double gy = p.clamped(x, y + 1) - p.clamped(x, y - 1);
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      double a = std::atan2(gy, gx);
      if (a < 0.0) a += std::numbers::pi;
      const int b = std::min(kHogBins - 1, static_cast<int>(a / std::numbers::pi * kHogBins));
      cells[((y / kHogCell) * cx + x / kHogCell) * kHogBins + b] += mag;
    }
  std::vector<double> desc;
  desc.reserve(static_cast<std::size_t>(cx - 1) * (cy - 1) * 4 * kHogBins);
  for (int by = 0; by + 1 < cy; ++by)
    for (int bx = 0; bx + 1 < cx; ++bx) {
      const std::size_t start = desc.size();
      double norm = 0.0;
      for (int j = 0; j < 2; ++j)
        for (int i = 0; i < 2; ++i)
          for (int b = 0; b < kHogBins; ++b) {
            const double v = cells[((by + j) * cx + bx + i) * kHogBins + b];
            desc.push_back(v);
            norm += v * v;
          }
      const double s = std::sqrt(norm + 1e-6);
      for (std::size_t k = start; k < desc.size(); ++k) desc[k] /= s;
    }
  return desc;
}

struct Halves {
  Plane left;
  Plane right_mirrored;
};

// Left columns [0, w/2) and right columns [w - w/2, w) flipped; an odd middle
// column belongs to neither.
inline Halves split_halves(const Plane& y) {
  const int hw = y.width / 2;
  if (hw < 1) fail_data("image too narrow for a symmetry split");
  return {crop(y, 0, 0, hw, y.height), flip_horizontal(crop(y, y.width - hw, 0, hw, y.height))};
}

inline double symmetry_edge(const Plane& y) {
  const Halves h = split_halves(y);
  const auto a = edge_orientation_histogram(h.left);
  const auto b = edge_orientation_histogram(h.right_mirrored);
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
  return d;
}

inline double symmetry_hog(const Plane& y) {
  const Halves h = split_halves(y);
  const auto a = hog_descriptor(h.left);
  const auto b = hog_descriptor(h.right_mirrored);
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(d);
}

inline constexpr int kHoughMaxSide = 256;

struct Circle {
  int x, y, r;
  int votes;
};

// Circle Hough transform on the Sobel edge map (magnitude > 2x its mean).
// Radii 8, 12, ... up to min(w,h)/4; a peak needs half the perimeter in votes;
// greedy suppression keeps the strongest circle within 10 px centers and 4 px
// radii.
inline std::vector<Circle> detect_circles(const Plane& y) {
  const int w = y.width, h = y.height;
  const int r_max = std::min(w, h) / 4;
  std::vector<int> radii;
  for (int r = 8; r <= r_max; r += 4) radii.push_back(r);
  if (radii.empty()) return {};
  const Plane mag = sobel_magnitude(y);
  const double thr = 2.0 * mean(mag);
  std::vector<std::pair<int, int>> edges;
  for (int yy = 0; yy < h; ++yy)
    for (int xx = 0; xx < w; ++xx)
      if (mag.at(xx, yy) > thr) edges.emplace_back(xx, yy);
  if (edges.empty()) return {};

  std::vector<Circle> candidates;
  std::vector<int> acc(static_cast<std::size_t>(w) * h);
  std::vector<int> stamp(static_cast<std::size_t>(w) * h);
  for (int r : radii) {
    std::fill(acc.begin(), acc.end(), 0);
    std::fill(stamp.begin(), stamp.end(), -1);
    const int samples = static_cast<int>(std::ceil(2.0 * std::numbers::pi * r));
    std::vector<std::pair<int, int>> offsets;
    for (int k = 0; k < samples; ++k) {
      const double t = 2.0 * std::numbers::pi * k / samples;
      offsets.emplace_back(static_cast<int>(std::lround(r * std::cos(t))),
                           static_cast<int>(std::lround(r * std::sin(t))));
    }
    std::sort(offsets.begin(), offsets.end());
    offsets.erase(std::unique(offsets.begin(), offsets.end()), offsets.end());
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const auto [ex, ey] = edges[e];
      for (const auto& [dx, dy] : offsets) {
        const int cx = ex - dx, cy = ey - dy;
        if (cx < 0 || cy < 0 || cx >= w || cy >= h) continue;
        const std::size_t idx = static_cast<std::size_t>(cy) * w + cx;
        if (stamp[idx] == static_cast<int>(e)) continue;
        stamp[idx] = static_cast<int>(e);
        ++acc[idx];
      }
    }
    const double need = 0.5 * 2.0 * std::numbers::pi * r;
    for (int cy = 0; cy < h; ++cy)
      for (int cx = 0; cx < w; ++cx) {
        const int v = acc[static_cast<std::size_t>(cy) * w + cx];
        if (v >= need) candidates.push_back({cx, cy, r, v});
      }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Circle& a, const Circle& b) {
    return std::tie(b.votes, a.r, a.y, a.x) < std::tie(a.votes, b.r, b.y, b.x);
  });
  std::vector<Circle> kept;
  for (const Circle& c : candidates) {
    bool suppressed = false;
    for (const Circle& k : kept) {
      const double d = std::hypot(c.x - k.x, c.y - k.y);
      if (d <= 10.0 && std::abs(c.r - k.r) <= 4) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(c);
  }
  return kept;
}

inline double num_circles(const Plane& y) {
  return static_cast<double>(detect_circles(fit_within(y, kHoughMaxSide)).size());
}

inline constexpr int kSaliencySize = 64;

// Spectral-residual saliency at 64x64, Gaussian-smoothed. A flat input has
// no residual structure and yields an all-zero map.
inline Plane spectral_saliency(const Plane& y) {
  constexpr int n = kSaliencySize;
  const Plane small = resize_bilinear(y, n, n);
  std::vector<Complex> f = fft2d(small);
  double ac = 0.0;
  for (std::size_t i = 1; i < f.size(); ++i) ac = std::max(ac, std::abs(f[i]));
  if (ac <= 1e-9 * (1.0 + std::abs(f[0]))) return Plane(n, n, 0.0);
  // Amplitudes are floored relative to the strongest non-DC component so
  // spectral zeros cannot dominate the residual.
  const double floor = 1e-3 * ac;
  Plane log_amp(n, n);
  for (std::size_t i = 0; i < f.size(); ++i) log_amp.values[i] = std::log(std::max(std::abs(f[i]), floor));
  Kernel box{3, 3, std::vector<double>(9, 1.0 / 9.0)};
  const Plane avg = convolve(log_amp, box);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double residual = log_amp.values[i] - avg.values[i];
    f[i] = std::polar(std::exp(residual), std::arg(f[i]));
  }
  fft2d_inplace(f, n, n, true);
  Plane sal(n, n);
  for (std::size_t i = 0; i < f.size(); ++i) sal.values[i] = std::norm(f[i]);
  return gaussian_blur(sal, 2.5);
}

// Share of saliency per cell of the 3x3 grid, row-major. Cells split at
// floor(i*64/3); a zero map falls back to the cell-area shares.
inline std::array<double, 9> rule_of_thirds(const Plane& y) {
  constexpr int n = kSaliencySize;
  const Plane sal = spectral_saliency(y);
  std::array<double, 9> cells{};
  std::array<double, 9> area{};
  for (int gy = 0; gy < 3; ++gy)
    for (int gx = 0; gx < 3; ++gx) {
      const int x0 = gx * n / 3, x1 = (gx + 1) * n / 3, y0 = gy * n / 3, y1 = (gy + 1) * n / 3;
      double s = 0.0;
      for (int yy = y0; yy < y1; ++yy)
        for (int xx = x0; xx < x1; ++xx) s += sal.at(xx, yy);
      cells[gy * 3 + gx] = s;
      area[gy * 3 + gx] = static_cast<double>((x1 - x0) * (y1 - y0)) / (n * n);
    }
  double total = 0.0;
  for (double c : cells) total += c;
  if (!(total > 0.0) || !std::isfinite(total)) return area;
  for (double& c : cells) c /= total;
  return cells;
}

struct SpatialFeatures {
  double symmetry_edge = 0.0;
  double symmetry_hog = 0.0;
  double num_circles = 0.0;
  std::array<double, 9> rule_of_thirds{};
};

inline SpatialFeatures spatial_block(const RasterImage& img) {
  validate(img);
  const Plane y = luminance(img);
  return {symmetry_edge(y), symmetry_hog(y), num_circles(y), rule_of_thirds(y)};
}

// ------------------------------------------------------------------ texture

inline constexpr int kGlcmLevels = 32;

struct GlcmStats {
  double entropy = 0.0, energy = 1.0, homogeneity = 1.0, contrast = 0.0;
};

// Symmetric co-occurrence of 32-level gray values at offset (1,0).
inline std::vector<double> glcm(const Plane& y) {
  constexpr int L = kGlcmLevels;
  std::vector<double> m(L * L, 0.0);
  double total = 0.0;
  for (int yy = 0; yy < y.height; ++yy)
    for (int x = 0; x + 1 < y.width; ++x) {
      const int a = quantize_unit(y.at(x, yy), L), b = quantize_unit(y.at(x + 1, yy), L);
      m[a * L + b] += 1.0;
      m[b * L + a] += 1.0;
      total += 2.0;
    }
  if (total > 0.0)
    for (double& v : m) v /= total;
  return m;
}

inline GlcmStats glcm_stats(const std::vector<double>& m) {
  constexpr int L = kGlcmLevels;
  GlcmStats s{0.0, 0.0, 0.0, 0.0};
  double mass = 0.0;
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) {
      const double p = m[i * L + j];
      if (p == 0.0) continue;
      mass += p;
      s.entropy -= p * std::log2(p);
      s.energy += p * p;
      s.homogeneity += p / (1.0 + std::abs(i - j));
      s.contrast += p * (i - j) * (i - j);
    }
  if (mass == 0.0) return {};
  return s;
}

inline std::array<double, 2> image_order(const Plane& y) {
  return {1.0 - compression_ratio(y), 1.0 - shannon_entropy(histogram256(y)) / 8.0};
}

// Grayscale reconstruction by erosion of `mask` from `marker` (marker >= mask),
// 4-connectivity: r(p) = min over paths q->p of max(marker(q), mask along path).
inline Plane reconstruct_by_erosion(const Plane& marker, const Plane& mask) {
  Plane r = marker;
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  for (std::size_t i = 0; i < r.size(); ++i) pq.emplace(r.values[i], i);
  const int w = r.width, h = r.height;
  while (!pq.empty()) {
    const auto [v, i] = pq.top();
    pq.pop();
    if (v > r.values[i]) continue;
    const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
    const int nx[4] = {x - 1, x + 1, x, x};
    const int ny[4] = {y, y, y - 1, y + 1};
    for (int k = 0; k < 4; ++k) {
      if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
      const std::size_t j = static_cast<std::size_t>(ny[k]) * w + nx[k];
      const double cand = std::max(v, mask.values[j]);
      if (cand < r.values[j]) {
        r.values[j] = cand;
        pq.emplace(cand, j);
      }
    }
  }
  return r;
}

struct Segmentation {
  int width = 0, height = 0;
  std::vector<int> labels;  // 0-based region id per pixel
  int regions = 0;
};

// Marker-driven priority-flood watershed. Markers are the regional minima
// (4-connected plateaus with no lower neighbor) of `relief`.
inline Segmentation watershed(const Plane& relief) {
  const int w = relief.width, h = relief.height;
  Segmentation seg{w, h, std::vector<int>(relief.size(), -1), 0};
  auto neighbors = [&](std::size_t i, auto&& fn) {
    const int x = static_cast<int>(i % w), y = static_cast<int>(i / w);
    if (x > 0) fn(i - 1);
    if (x + 1 < w) fn(i + 1);
    if (y > 0) fn(i - w);
    if (y + 1 < h) fn(i + w);
  };
  std::vector<char> visited(relief.size(), 0);
  std::vector<std::size_t> stack, plateau;
  for (std::size_t s = 0; s < relief.size(); ++s) {
    if (visited[s]) continue;
    const double v = relief.values[s];
    plateau.clear();
    stack.assign(1, s);
    visited[s] = 1;
    bool minimum = true;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      plateau.push_back(i);
      neighbors(i, [&](std::size_t j) {
        const double u = relief.values[j];
        if (u < v) minimum = false;
        if (u == v && !visited[j]) {
          visited[j] = 1;
          stack.push_back(j);
        }
      });
    }
    if (!minimum) continue;
    for (std::size_t i : plateau) seg.labels[i] = seg.regions;
    ++seg.regions;
  }

  using Entry = std::tuple<double, std::uint64_t, std::size_t, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> pq;
  std::uint64_t order = 0;
  for (std::size_t i = 0; i < relief.size(); ++i) {
    if (seg.labels[i] < 0) continue;
    neighbors(i, [&](std::size_t j) {
      if (seg.labels[j] < 0) pq.emplace(relief.values[j], order++, j, seg.labels[i]);
    });
  }
  while (!pq.empty()) {
    const auto [v, ord, i, label] = pq.top();
    pq.pop();
    if (seg.labels[i] >= 0) continue;
    seg.labels[i] = label;
    neighbors(i, [&](std::size_t j) {
      if (seg.labels[j] < 0) pq.emplace(std::max(v, relief.values[j]), order++, j, label);
    });
  }
  return seg;
}

inline constexpr double kMinimaDepth = 0.02;

// Gradient watershed after sigma-1 smoothing; minima shallower than 0.02 are
// filled first (h-minima transform).
inline Segmentation detail_segmentation(const Plane& y) {
  const Plane grad = sobel_magnitude(gaussian_blur(y, 1.0));
  Plane marker = grad;
  for (double& v : marker.values) v += kMinimaDepth;
  return watershed(reconstruct_by_erosion(marker, grad));
}

inline double level_of_detail(const Plane& y) { return static_cast<double>(detail_segmentation(y).regions); }

struct TextureFeatures {
  std::array<double, 4> glcm{};  // entropy, energy, homogeneity, contrast
  std::array<double, 2> image_order{};
  double level_of_detail = 0.0;
};

inline TextureFeatures texture_block(const RasterImage& img) {
  validate(img);
  const Plane y = luminance(img);
  const GlcmStats g = glcm_stats(glcm(y));
  return {{g.entropy, g.energy, g.homogeneity, g.contrast}, image_order(y), level_of_detail(y)};
}

// ----------------------------------------------------------------- assembly

struct CompositionalBlock {
  std::array<double, 5> lighting_pattern{};
  double overall_sharpness = 0.0;
  double camera_shake = 0.0;
  ColorFeatures color;
  SpatialFeatures spatial;
  TextureFeatures texture;

  std::vector<double> to_vector() const {
    std::vector<double> v;
    v.reserve(69);
    auto add = [&](const auto& a) { v.insert(v.end(), a.begin(), a.end()); };
    add(lighting_pattern);
    v.push_back(overall_sharpness);
    v.push_back(camera_shake);
    add(color.color_names);
    add(color.hsv_avg);
    add(color.pad);
    add(color.itten_hist);
    add(color.itten_contrasts);
    v.push_back(color.contrast_michelson);
    v.push_back(color.contrast_simple);
    v.push_back(spatial.symmetry_edge);
    v.push_back(spatial.symmetry_hog);
    v.push_back(spatial.num_circles);
    add(spatial.rule_of_thirds);
    add(texture.glcm);
    add(texture.image_order);
    v.push_back(texture.level_of_detail);
    return v;
  }
};

inline std::vector<std::string> compositional_names() {
  std::vector<std::string> n;
  for (int i = 0; i < 5; ++i) n.push_back("lighting_pattern_" + std::to_string(i));
  n.insert(n.end(), {"overall_sharpness", "camera_shake"});
  for (const auto& c : kColorPrototypes) n.push_back(std::string("color_") + c.name);
  n.insert(n.end(), {"hue_avg", "saturation_avg", "brightness_avg", "hue_avg_inner", "saturation_avg_inner",
                     "brightness_avg_inner", "pleasure", "arousal", "dominance"});
  for (int i = 0; i < 12; ++i) n.push_back("itten_hue_" + std::to_string(i));
  for (int i = 0; i < 3; ++i) n.push_back("itten_saturation_" + std::to_string(i));
  for (int i = 0; i < 5; ++i) n.push_back("itten_brightness_" + std::to_string(i));
  n.insert(n.end(), {"itten_contrast_hue", "itten_contrast_saturation", "itten_contrast_brightness",
                     "contrast_michelson", "contrast", "symmetry_edge", "symmetry_hog", "num_circles"});
  for (int i = 0; i < 9; ++i) n.push_back("rule_of_thirds_" + std::to_string(i));
  n.insert(n.end(), {"glcm_entropy", "glcm_energy", "glcm_homogeneity", "glcm_contrast", "order_compression",
                     "order_entropy", "level_of_detail"});
  return n;
}

// Without a lighting model the one-hot stays all zero; callers flag it.
inline CompositionalBlock compositional_block(const RasterImage& img, const LightingModel* model) {
  validate(img);
  CompositionalBlock b;
  if (model) b.lighting_pattern = lighting_pattern(img, *model).one_hot;
  b.overall_sharpness = overall_sharpness(img);
  b.camera_shake = camera_shake(img);
  b.color = color_block(img);
  b.spatial = spatial_block(img);
  b.texture = texture_block(img);
  return b;
}

}  // namespace pae
