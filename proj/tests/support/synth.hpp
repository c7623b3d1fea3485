#pragma once

// Deterministic synthetic rasters for tests.

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "pae/image.hpp"
#include "pae/random.hpp"

namespace synth {

inline pae::RasterImage constant(int w, int h, double r, double g, double b) {
  pae::RasterImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.set(x, y, r, g, b);
  return img;
}

inline pae::RasterImage gray(const pae::Plane& p) {
  pae::RasterImage img(p.width, p.height);
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x) img.set(x, y, p.at(x, y), p.at(x, y), p.at(x, y));
  return img;
}

inline pae::Plane noise_plane(int w, int h, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  pae::Rng rng(seed);
  pae::Plane p(w, h);
  for (double& v : p.values) v = rng.uniform(lo, hi);
  return p;
}

inline pae::RasterImage noise_image(int w, int h, std::uint64_t seed) {
  pae::Rng rng(seed);
  pae::RasterImage img(w, h);
  for (double& v : img.rgb) v = rng.uniform();
  return img;
}

inline pae::Plane checkerboard(int w, int h, int cell) {
  pae::Plane p(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) p.at(x, y) = ((x / cell + y / cell) % 2) ? 1.0 : 0.0;
  return p;
}

inline pae::Plane ramp(int w, int h, double lo = 0.0, double hi = 1.0) {
  pae::Plane p(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) p.at(x, y) = lo + (hi - lo) * (w == 1 ? 0.0 : static_cast<double>(x) / (w - 1));
  return p;
}

// Smooth value-noise texture: bilinear upsampling of a coarse random grid.
inline pae::Plane smooth_texture(int w, int h, int cell, std::uint64_t seed) {
  const pae::Plane coarse = noise_plane(w / cell + 2, h / cell + 2, seed);
  return pae::resize_bilinear(coarse, w, h);
}

inline pae::Plane add_noise(const pae::Plane& p, double sigma, std::uint64_t seed) {
  pae::Rng rng(seed);
  pae::Plane out = p;
  for (double& v : out.values) v = std::clamp(v + rng.normal(0.0, sigma), 0.0, 1.0);
  return out;
}

}  // namespace synth
