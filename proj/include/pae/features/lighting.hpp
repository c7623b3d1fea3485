#pragma once

// Lighting patterns: an image's illuminance field L(I) summarized on a 25x25
// grid, clustered into 5 prototypical lighting setups.

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pae/error.hpp"
#include "pae/format.hpp"
#include "pae/image.hpp"
#include "pae/learn/kmeans.hpp"

namespace pae {

inline constexpr int kLightingGrid = 25;
inline constexpr std::size_t kLightingDim = kLightingGrid * kLightingGrid;
inline constexpr std::size_t kLightingPatterns = 5;

// Heavy Gaussian smoothing of luminance, floored so Y / L stays finite.
inline Plane estimate_illuminance(const RasterImage& img) {
  const double sigma = std::min(img.width, img.height) / 8.0;
  Plane l = gaussian_blur(luminance(img), sigma);
  for (double& v : l.values) v = std::max(v, 1e-4);
  return l;
}

// Cell i spans [floor(i*n/25), floor((i+1)*n/25)) on each axis.
inline std::vector<double> grid_means(const Plane& p, int grid) {
  if (p.width < grid || p.height < grid) fail_data("image smaller than the lighting grid");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(grid) * grid);
  for (int gy = 0; gy < grid; ++gy) {
    const int y0 = gy * p.height / grid, y1 = (gy + 1) * p.height / grid;
    for (int gx = 0; gx < grid; ++gx) {
      const int x0 = gx * p.width / grid, x1 = (gx + 1) * p.width / grid;
      double sum = 0.0;
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) sum += p.at(x, y);
      out.push_back(sum / static_cast<double>((x1 - x0) * (y1 - y0)));
    }
  }
  return out;
}

inline std::vector<double> illuminance_vector(const RasterImage& img) {
  if (img.width < kLightingGrid || img.height < kLightingGrid)
    fail_data("image smaller than 25x25 cannot produce an illuminance vector");
  return grid_means(estimate_illuminance(img), kLightingGrid);
}

struct LightingModel {
  std::size_t k = kLightingPatterns;
  std::vector<double> centroids;  // k x 625

  std::span<const double> centroid(std::size_t c) const {
    return {centroids.data() + c * kLightingDim, kLightingDim};
  }
};

inline LightingModel train_lighting_model(const std::vector<std::vector<double>>& vectors, std::uint64_t seed) {
  if (vectors.size() < kLightingPatterns) fail_data("lighting model needs at least 5 images");
  std::set<std::vector<double>> distinct(vectors.begin(), vectors.end());
  if (distinct.size() < kLightingPatterns) fail_data("lighting corpus has fewer than 5 distinct illuminance vectors");
  std::vector<double> flat;
  flat.reserve(vectors.size() * kLightingDim);
  for (const auto& v : vectors) {
    if (v.size() != kLightingDim) fail_data("illuminance vector has the wrong length");
    flat.insert(flat.end(), v.begin(), v.end());
  }
  const KMeansResult km = kmeans(flat, kLightingDim, kLightingPatterns, seed);
  return {kLightingPatterns, km.centroids};
}

inline LightingModel train_lighting_model(const std::vector<RasterImage>& corpus, std::uint64_t seed) {
  std::vector<std::vector<double>> vectors;
  vectors.reserve(corpus.size());
  for (const auto& img : corpus) vectors.push_back(illuminance_vector(img));
  return train_lighting_model(vectors, seed);
}

struct LightingAssignment {
  std::size_t cluster = 0;
  std::array<double, kLightingPatterns> one_hot{};
};

inline LightingAssignment assign_lighting(std::span<const double> vec, const LightingModel& model) {
  LightingAssignment a;
  a.cluster = static_cast<std::size_t>(nearest_centroid(vec, model.centroids, model.k));
  a.one_hot[a.cluster] = 1.0;
  return a;
}

inline LightingAssignment lighting_pattern(const RasterImage& img, const LightingModel& model) {
  return assign_lighting(illuminance_vector(img), model);
}

// Text format:
//   pae-lighting-model 1
//   k 5 dim 625
//   <625 numbers>   (one line per centroid)
inline void save_lighting_model(const LightingModel& m, std::ostream& out) {
  out << "pae-lighting-model 1\n";
  out << "k " << m.k << " dim " << kLightingDim << "\n";
  for (std::size_t c = 0; c < m.k; ++c) {
    const auto row = m.centroid(c);
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << format_double(row[i]);
    out << "\n";
  }
}

inline LightingModel load_lighting_model(std::istream& in) {
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "pae-lighting-model" || version != 1) fail_data("not a lighting model file");
  std::string kw1, kw2;
  std::size_t k = 0, dim = 0;
  in >> kw1 >> k >> kw2 >> dim;
  if (kw1 != "k" || kw2 != "dim" || dim != kLightingDim || k != kLightingPatterns)
    fail_data("lighting model header is malformed");
  LightingModel m;
  m.k = k;
  m.centroids.reserve(k * dim);
  std::string tok;
  for (std::size_t i = 0; i < k * dim; ++i) {
    if (!(in >> tok)) fail_data("lighting model is truncated");
    m.centroids.push_back(parse_double(tok));
  }
  return m;
}

inline void save_lighting_model(const LightingModel& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail_data("cannot write " + path.string());
  save_lighting_model(m, out);
}

inline LightingModel load_lighting_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail_data("cannot open " + path.string());
  return load_lighting_model(in);
}

}  // namespace pae
