#pragma once

// LASSO regularization path by cyclic coordinate descent.
//
// Minimizes (1/2N) ||y - b0 - X b||^2 + lambda ||b||_1 over a decreasing,
// log-spaced lambda grid with warm starts. Columns and target are centered
// internally; the intercept is recovered as mean(y) - mean(X) . b. The solver
// works on the Gram matrix G = Xc'Xc/N and c = Xc'yc/N, so one coordinate
// update costs O(D) regardless of N.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "pae/error.hpp"
#include "pae/learn/matrix.hpp"

namespace pae {

struct LassoOptions {
  int grid_size = 100;
  double min_ratio = 1e-3;  // lambda_min / lambda_max
  double tolerance = 1e-6;  // max coefficient change per sweep
  int max_sweeps = 10000;   // per lambda
  bool record_objective = false;
};

struct LassoPath {
  std::vector<double> lambdas;                    // decreasing
  std::vector<std::vector<double>> coefficients;  // per lambda, D entries
  std::vector<double> intercepts;
  std::vector<int> entry_step;           // per feature; grid size when never active
  std::vector<std::size_t> entry_order;  // features sorted by entry
  std::vector<int> sweeps;               // sweeps spent per lambda
  std::vector<std::vector<double>> objective_trace;  // per lambda, after each sweep

  std::size_t features() const { return entry_step.size(); }

  double predict(std::size_t step, std::span<const double> x) const {
    double v = intercepts[step];
    const auto& b = coefficients[step];
    for (std::size_t j = 0; j < b.size(); ++j) v += b[j] * x[j];
    return v;
  }

  std::size_t active_count(std::size_t step) const {
    return static_cast<std::size_t>(
        std::count_if(coefficients[step].begin(), coefficients[step].end(), [](double b) { return b != 0.0; }));
  }
};

// Features sorted by entry step; ties by |coefficient| at entry, descending.
inline void order_by_entry(LassoPath& path) {
  const int grid_n = static_cast<int>(path.lambdas.size());
  path.entry_order.resize(path.entry_step.size());
  std::iota(path.entry_order.begin(), path.entry_order.end(), std::size_t{0});
  std::stable_sort(path.entry_order.begin(), path.entry_order.end(), [&](std::size_t a, std::size_t b) {
    if (path.entry_step[a] != path.entry_step[b]) return path.entry_step[a] < path.entry_step[b];
    if (path.entry_step[a] == grid_n) return false;
    const auto& coef = path.coefficients[static_cast<std::size_t>(path.entry_step[a])];
    return std::abs(coef[a]) > std::abs(coef[b]);
  });
}

inline double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

struct CenteredProblem {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> x_mean;
  double y_mean = 0.0;
  std::vector<double> gram;  // D x D
  std::vector<double> xty;   // D
  double yty = 0.0;          // yc'yc / N
};

inline CenteredProblem center_problem(const FeatureMatrix& m, std::span<const double> y) {
  CenteredProblem p;
  p.n = m.rows();
  p.d = m.cols();
  if (y.size() != p.n) fail_data("lasso: target length does not match rows");
  if (p.n == 0) fail_data("lasso: empty matrix");
  for (double v : m.values)
    if (!std::isfinite(v)) fail_data("lasso: non-finite feature value");
  for (double v : y)
    if (!std::isfinite(v)) fail_data("lasso: non-finite target");
  const double inv_n = 1.0 / static_cast<double>(p.n);
  p.x_mean.assign(p.d, 0.0);
  for (std::size_t r = 0; r < p.n; ++r)
    for (std::size_t j = 0; j < p.d; ++j) p.x_mean[j] += m.at(r, j);
  for (double& v : p.x_mean) v *= inv_n;
  p.y_mean = std::accumulate(y.begin(), y.end(), 0.0) * inv_n;

  std::vector<double> xc(p.n * p.d);
  std::vector<double> yc(p.n);
  for (std::size_t r = 0; r < p.n; ++r) {
    yc[r] = y[r] - p.y_mean;
    for (std::size_t j = 0; j < p.d; ++j) xc[r * p.d + j] = m.at(r, j) - p.x_mean[j];
  }
  p.gram.assign(p.d * p.d, 0.0);
  p.xty.assign(p.d, 0.0);
  for (std::size_t r = 0; r < p.n; ++r) {
    const double* row = &xc[r * p.d];
    for (std::size_t i = 0; i < p.d; ++i) {
      if (row[i] == 0.0) continue;
      p.xty[i] += row[i] * yc[r];
      double* g = &p.gram[i * p.d];
      for (std::size_t j = i; j < p.d; ++j) g[j] += row[i] * row[j];
    }
    p.yty += yc[r] * yc[r];
  }
  for (std::size_t i = 0; i < p.d; ++i) {
    p.xty[i] *= inv_n;
    for (std::size_t j = i; j < p.d; ++j) {
      p.gram[i * p.d + j] *= inv_n;
      p.gram[j * p.d + i] = p.gram[i * p.d + j];
    }
  }
  p.yty *= inv_n;
  return p;
}

inline double lambda_max(const CenteredProblem& p) {
  double mx = 0.0;
  for (double v : p.xty) mx = std::max(mx, std::abs(v));
  return mx;
}

inline std::vector<double> lambda_grid(double lmax, int size, double min_ratio) {
  if (size < 1) fail_config("lasso: grid size must be positive");
  if (!(lmax > 0.0)) lmax = 1.0;  // all-zero correlation: any positive grid gives the zero path
  std::vector<double> grid(static_cast<std::size_t>(size));
  for (int i = 0; i < size; ++i) {
    const double t = size == 1 ? 0.0 : static_cast<double>(i) / (size - 1);
    grid[static_cast<std::size_t>(i)] = lmax * std::pow(min_ratio, t);
  }
  grid.front() = lmax;
  return grid;
}

// (1/2N)||yc - Xc b||^2 + lambda ||b||_1 from Gram quantities; q = G b.
inline double lasso_objective(const CenteredProblem& p, std::span<const double> beta, std::span<const double> q,
                              double lambda) {
  double ctb = 0.0, btq = 0.0, l1 = 0.0;
  for (std::size_t j = 0; j < p.d; ++j) {
    ctb += p.xty[j] * beta[j];
    btq += beta[j] * q[j];
    l1 += std::abs(beta[j]);
  }
  return 0.5 * p.yty - ctb + 0.5 * btq + lambda * l1;
}

inline LassoPath lasso_path(const CenteredProblem& p, std::vector<double> grid, const LassoOptions& opt = {}) {
  LassoPath path;
  path.lambdas = std::move(grid);
  const std::size_t d = p.d;
  std::vector<double> beta(d, 0.0), q(d, 0.0);
  std::vector<char> active(d, 0);
  const int grid_n = static_cast<int>(path.lambdas.size());
  path.entry_step.assign(d, grid_n);

  auto update = [&](std::size_t j, double lambda) -> double {
    const double gjj = p.gram[j * d + j];
    if (gjj <= 0.0) return 0.0;
    const double rho = p.xty[j] - q[j] + gjj * beta[j];
    const double next = soft_threshold(rho, lambda) / gjj;
    const double delta = next - beta[j];
    if (delta != 0.0) {
      beta[j] = next;
      const double* g = &p.gram[j * d];
      for (std::size_t k = 0; k < d; ++k) q[k] += delta * g[k];
      if (next != 0.0) active[j] = 1;
    }
    return std::abs(delta);
  };

  for (int step = 0; step < grid_n; ++step) {
    const double lambda = path.lambdas[static_cast<std::size_t>(step)];
    std::vector<double> trace;
    int sweeps = 0;
    bool full = true;
    while (sweeps < opt.max_sweeps) {
      double max_change = 0.0;
      for (std::size_t j = 0; j < d; ++j)
        if (full || active[j]) max_change = std::max(max_change, update(j, lambda));
      ++sweeps;
      if (opt.record_objective) trace.push_back(lasso_objective(p, beta, q, lambda));
      if (max_change < opt.tolerance) {
        if (full) break;
        full = true;  // active set settled; confirm with a sweep over all coordinates
      } else {
        full = false;
      }
    }
    path.sweeps.push_back(sweeps);
    path.coefficients.push_back(beta);
    double b0 = p.y_mean;
    for (std::size_t j = 0; j < d; ++j) b0 -= p.x_mean[j] * beta[j];
    path.intercepts.push_back(b0);
    if (opt.record_objective) path.objective_trace.push_back(std::move(trace));
    for (std::size_t j = 0; j < d; ++j)
      if (beta[j] != 0.0 && path.entry_step[j] == grid_n) path.entry_step[j] = step;
  }

  order_by_entry(path);
  return path;
}

inline LassoPath lasso_path(const FeatureMatrix& m, std::span<const double> y, const LassoOptions& opt = {}) {
  const CenteredProblem p = center_problem(m, y);
  return lasso_path(p, lambda_grid(lambda_max(p), opt.grid_size, opt.min_ratio), opt);
}

inline LassoPath lasso_path(const FeatureMatrix& m, std::span<const double> y, std::vector<double> grid,
                            const LassoOptions& opt = {}) {
  return lasso_path(center_problem(m, y), std::move(grid), opt);
}

}  // namespace pae
