#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "pae/error.hpp"
#include "pae/learn/folds.hpp"
#include "pae/learn/matrix.hpp"
#include "pae/learn/svm.hpp"

namespace pae {

// RBF kernel ridge regressor: (K + lambda I) a = y, f(x) = sum a_i K(x_i, x).
struct KernelRidgeModel {
  KernelSpec kernel;
  double lambda = 1.0;
  std::size_t dim = 0;
  std::vector<double> train_points;  // count x dim
  std::vector<double> coef;

  double predict(std::span<const double> x) const {
    double v = 0.0;
    for (std::size_t i = 0; i < coef.size(); ++i)
      v += coef[i] * kernel(std::span<const double>(train_points.data() + i * dim, dim), x);
    return v;
  }
};

inline std::vector<double> solve_regularized(const KernelMatrix& km, std::span<const double> y, double lambda) {
  const auto n = static_cast<Eigen::Index>(km.n);
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = km(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  a.diagonal().array() += lambda;
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) rhs(i) = y[static_cast<std::size_t>(i)];
  const Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) fail_data("kernel ridge: system is not positive definite");
  const Eigen::VectorXd sol = llt.solve(rhs);
  return {sol.data(), sol.data() + n};
}

inline KernelRidgeModel kernel_ridge(const FeatureMatrix& m, std::span<const double> targets, double gamma,
                                     double lambda) {
  if (targets.size() != m.rows()) fail_data("kernel ridge: target length does not match rows");
  if (!(lambda > 0.0)) fail_config("kernel ridge: lambda must be positive");
  KernelRidgeModel model;
  model.kernel = {KernelType::rbf, gamma};
  model.lambda = lambda;
  model.dim = m.cols();
  model.train_points = m.values;
  model.coef = solve_regularized(kernel_matrix(m, model.kernel), targets, lambda);
  return model;
}

inline std::vector<double> default_ridge_grid() { return {1e-3, 1e-2, 1e-1, 1.0, 10.0}; }

// k-fold CV mean squared error per lambda; ties keep the larger lambda.
inline double select_ridge_lambda(const KernelMatrix& km, std::span<const double> y, std::span<const double> grid,
                                  int folds, std::uint64_t seed) {
  const FoldPlan plan = make_folds(km.n, folds, seed);
  double best = grid.front();
  double best_mse = std::numeric_limits<double>::infinity();
  for (double lambda : grid) {
    double sse = 0.0;
    for (int f = 0; f < folds; ++f) {
      const auto train = plan.train_indices(f);
      const auto test = plan.test_indices(f);
      std::vector<double> ty;
      for (std::size_t i : train) ty.push_back(y[i]);
      const std::vector<double> a = solve_regularized(km.subset(train), ty, lambda);
      for (std::size_t i : test) {
        double p = 0.0;
        for (std::size_t t = 0; t < train.size(); ++t) p += a[t] * km(train[t], i);
        sse += (p - y[i]) * (p - y[i]);
      }
    }
    const double mse = sse / static_cast<double>(km.n);
    if (mse < best_mse || (mse == best_mse && lambda > best)) {
      best_mse = mse;
      best = lambda;
    }
  }
  return best;
}

}  // namespace pae
