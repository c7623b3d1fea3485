#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "pae/error.hpp"

namespace pae {

struct Correlation {
  double rho = 0.0;
  bool degenerate = false;  // zero variance on either side, rho reported as 0
};

// 1-based mid-ranks; tied values share the average of their positions.
inline std::vector<double> mid_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

inline Correlation pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail_data("correlation inputs differ in length");
  if (x.size() < 2) fail_data("correlation needs at least two samples");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return {0.0, true};
  return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), false};
}

inline Correlation spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail_data("spearman inputs differ in length");
  if (x.size() < 2) fail_data("spearman needs at least two samples");
  const std::vector<double> rx = mid_ranks(x);
  const std::vector<double> ry = mid_ranks(y);
  return pearson(rx, ry);
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1)
};

inline MeanStd mean_std(std::span<const double> v) {
  MeanStd out;
  if (v.empty()) return out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) return out;
  double ss = 0.0;
  for (double x : v) ss += (x - out.mean) * (x - out.mean);
  out.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  return out;
}

}  // namespace pae
