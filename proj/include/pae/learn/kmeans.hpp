#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "pae/error.hpp"
#include "pae/random.hpp"

namespace pae {

struct KMeansOptions {
  int max_iterations = 300;
  double tolerance = 1e-8;  // max centroid displacement
};

struct KMeansResult {
  std::size_t k = 0;
  std::size_t dim = 0;
  std::vector<double> centroids;  // k x dim, row-major
  std::vector<int> assignment;
  double inertia = 0.0;
  int iterations = 0;
  std::vector<double> inertia_history;  // after each assignment step

  std::span<const double> centroid(std::size_t c) const { return {centroids.data() + c * dim, dim}; }
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

// Index of the nearest centroid; ties go to the lowest index.
inline int nearest_centroid(std::span<const double> point, std::span<const double> centroids,
                            std::size_t k, double* dist_out = nullptr) {
  const std::size_t dim = point.size();
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < k; ++c) {
    const double d = squared_distance(point, centroids.subspan(c * dim, dim));
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  if (dist_out) *dist_out = best_d;
  return best;
}

namespace detail {

inline std::vector<double> kmeans_pp_init(std::span<const double> points, std::size_t n, std::size_t dim,
                                          std::size_t k, Rng& rng) {
  std::vector<double> centroids;
  centroids.reserve(k * dim);
  auto point = [&](std::size_t i) { return points.subspan(i * dim, dim); };
  const std::size_t first = static_cast<std::size_t>(rng.index(n));
  centroids.insert(centroids.end(), point(first).begin(), point(first).end());
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(point(i), point(first));
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : d2) total += v;
    if (!(total > 0.0)) fail_data("k-means: fewer distinct points than clusters");
    const double target = rng.uniform() * total;
    double run = 0.0;
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      run += d2[i];
      if (d2[i] > 0.0 && run > target) {
        pick = i;
        break;
      }
    }
    if (pick == n) {
      for (std::size_t i = n; i-- > 0;)
        if (d2[i] > 0.0) {
          pick = i;
          break;
        }
    }
    centroids.insert(centroids.end(), point(pick).begin(), point(pick).end());
    for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(point(i), point(pick)));
  }
  return centroids;
}

}  // namespace detail

// k-means++ seeding followed by Lloyd iterations. An empty cluster is
// re-seeded with the member of the largest cluster farthest from its centroid.
inline KMeansResult kmeans(std::span<const double> points, std::size_t dim, std::size_t k, std::uint64_t seed,
                           const KMeansOptions& opt = {}) {
  if (dim == 0 || points.size() % dim != 0) fail_config("k-means: point buffer is not a multiple of dim");
  const std::size_t n = points.size() / dim;
  if (k == 0) fail_config("k-means: k must be positive");
  if (n < k) fail_data("k-means: fewer points than clusters");
  for (double v : points)
    if (!std::isfinite(v)) fail_data("k-means: non-finite input");

  Rng rng(seed);
  KMeansResult res;
  res.k = k;
  res.dim = dim;
  res.centroids = detail::kmeans_pp_init(points, n, dim, k, rng);
  res.assignment.assign(n, 0);
  auto point = [&](std::size_t i) { return points.subspan(i * dim, dim); };

  std::vector<double> dist(n);
  for (int it = 0; it < opt.max_iterations; ++it) {
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      res.assignment[i] = nearest_centroid(point(i), res.centroids, k, &dist[i]);
      inertia += dist[i];
    }
    res.inertia_history.push_back(inertia);
    res.inertia = inertia;
    res.iterations = it + 1;

    std::vector<double> next(k * dim, 0.0);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(res.assignment[i]);
      ++counts[c];
      const auto p = point(i);
      for (std::size_t d = 0; d < dim; ++d) next[c * dim + d] += p[d];
    }
    for (std::size_t c = 0; c < k; ++c)
      if (counts[c] > 0)
        for (std::size_t d = 0; d < dim; ++d) next[c * dim + d] /= static_cast<double>(counts[c]);

    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      const std::size_t largest =
          static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (static_cast<std::size_t>(res.assignment[i]) != largest) continue;
        const double d = squared_distance(point(i), std::span<const double>(next).subspan(largest * dim, dim));
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      std::copy(point(far).begin(), point(far).end(), next.begin() + static_cast<std::ptrdiff_t>(c * dim));
      res.assignment[far] = static_cast<int>(c);
      --counts[largest];
      counts[c] = 1;
    }

    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c)
      shift = std::max(shift, std::sqrt(squared_distance(std::span<const double>(next).subspan(c * dim, dim),
                                                         res.centroid(c))));
    res.centroids = std::move(next);
    if (shift < opt.tolerance) break;
  }

  // Final assignment against the settled centroids.
  double inertia = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    res.assignment[i] = nearest_centroid(point(i), res.centroids, k, &dist[i]);
    inertia += dist[i];
  }
  res.inertia = inertia;
  res.inertia_history.push_back(inertia);
  return res;
}

}  // namespace pae
