#pragma once

// C-SVC trained by sequential minimal optimization on the dual
//
//   min_a  1/2 a'Qa - e'a   s.t.  0 <= a_i <= C,  y'a = 0,   Q_ij = y_i y_j K(x_i, x_j)
//
// with second-order working-set selection. Stops when the maximal KKT
// violation m(a) - M(a) drops below the tolerance.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "pae/error.hpp"
#include "pae/learn/folds.hpp"
#include "pae/learn/matrix.hpp"

namespace pae {

enum class KernelType { linear, rbf };

struct KernelSpec {
  KernelType type = KernelType::rbf;
  double gamma = 1.0;

  double operator()(std::span<const double> a, std::span<const double> b) const {
    double acc = 0.0;
    if (type == KernelType::linear) {
      for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
      return acc;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[i];
      acc += d * d;
    }
    return std::exp(-gamma * acc);
  }
};

// Dense symmetric kernel matrix over a sample set, row-major.
struct KernelMatrix {
  std::size_t n = 0;
  std::vector<double> k;

  double operator()(std::size_t i, std::size_t j) const { return k[i * n + j]; }
  std::span<const double> row(std::size_t i) const { return {k.data() + i * n, n}; }

  KernelMatrix subset(std::span<const std::size_t> idx) const {
    KernelMatrix out{idx.size(), std::vector<double>(idx.size() * idx.size())};
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b) out.k[a * idx.size() + b] = (*this)(idx[a], idx[b]);
    return out;
  }
};

inline KernelMatrix kernel_matrix(const FeatureMatrix& m, const KernelSpec& kernel) {
  KernelMatrix km{m.rows(), std::vector<double>(m.rows() * m.rows())};
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = i; j < m.rows(); ++j) {
      const double v = kernel(m.row(i), m.row(j));
      km.k[i * km.n + j] = v;
      km.k[j * km.n + i] = v;
    }
  return km;
}

struct SmoOptions {
  double C = 1.0;
  double tolerance = 1e-3;
  long max_iterations = 10'000'000;
};

struct SmoSolution {
  std::vector<double> alpha;
  double rho = 0.0;  // decision = sum a_i y_i K(x_i, x) - rho
  double kkt_gap = 0.0;
  long iterations = 0;
  bool converged = false;
};

inline SmoSolution smo_solve(const KernelMatrix& km, std::span<const int> y, const SmoOptions& opt) {
  constexpr double kTau = 1e-12;
  const std::size_t n = km.n;
  if (y.size() != n) fail_data("svm: label count does not match kernel size");
  const double C = opt.C;
  if (!(C > 0.0)) fail_config("svm: C must be positive");

  std::vector<double> alpha(n, 0.0), grad(n, -1.0);
  auto upper = [&](std::size_t t) { return alpha[t] >= C; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };
  auto q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * km(i, j); };

  SmoSolution sol;
  double gap = std::numeric_limits<double>::infinity();
  long iter = 0;
  for (; iter < opt.max_iterations; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmax2 = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t gi = -1, gj = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] == 1) {
        if (!upper(t) && -grad[t] >= gmax) {
          gmax = -grad[t];
          gi = static_cast<std::ptrdiff_t>(t);
        }
      } else if (!lower(t) && grad[t] >= gmax) {
        gmax = grad[t];
        gi = static_cast<std::ptrdiff_t>(t);
      }
    }
    double obj_min = std::numeric_limits<double>::infinity();
    if (gi >= 0) {
      const auto i = static_cast<std::size_t>(gi);
      for (std::size_t t = 0; t < n; ++t) {
        if (y[t] == 1) {
          if (lower(t)) continue;
          const double diff = gmax + grad[t];
          gmax2 = std::max(gmax2, grad[t]);
          if (diff > 0.0) {
            double quad = km(i, i) + km(t, t) - 2.0 * y[i] * q(i, t);
            if (quad <= 0.0) quad = kTau;
            const double obj = -(diff * diff) / quad;
            if (obj <= obj_min) {
              obj_min = obj;
              gj = static_cast<std::ptrdiff_t>(t);
            }
          }
        } else {
          if (upper(t)) continue;
          const double diff = gmax - grad[t];
          gmax2 = std::max(gmax2, -grad[t]);
          if (diff > 0.0) {
            double quad = km(i, i) + km(t, t) + 2.0 * y[i] * q(i, t);
            if (quad <= 0.0) quad = kTau;
            const double obj = -(diff * diff) / quad;
            if (obj <= obj_min) {
              obj_min = obj;
              gj = static_cast<std::ptrdiff_t>(t);
            }
          }
        }
      }
    }
    gap = gmax + gmax2;
    if (gi < 0 || gj < 0 || gap < opt.tolerance) {
      sol.converged = true;
      break;
    }

    const auto i = static_cast<std::size_t>(gi);
    const auto j = static_cast<std::size_t>(gj);
    const double old_ai = alpha[i], old_aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = km(i, i) + km(j, j) + 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = C - diff;
        }
      } else if (alpha[j] > C) {
        alpha[j] = C;
        alpha[i] = C + diff;
      }
    } else {
      double quad = km(i, i) + km(j, j) - 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) {
          alpha[i] = C;
          alpha[j] = sum - C;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) {
          alpha[j] = C;
          alpha[i] = sum - C;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double dai = alpha[i] - old_ai, daj = alpha[j] - old_aj;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(t, i) * dai + q(t, j) * daj;
  }

  // Offset from free vectors, or the midpoint of the feasible interval.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  std::size_t n_free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (upper(t)) {
      if (y[t] == -1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] == 1) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  sol.rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
  sol.alpha = std::move(alpha);
  sol.kkt_gap = std::isfinite(gap) ? std::max(gap, 0.0) : 0.0;
  sol.iterations = iter;
  return sol;
}

struct SvmModel {
  KernelSpec kernel;
  double C = 1.0;
  double bias = 0.0;
  std::size_t dim = 0;
  std::vector<double> support_vectors;  // count x dim
  std::vector<double> dual_coef;        // alpha_i * y_i
  double kkt_gap = 0.0;
  long iterations = 0;
  Standardization standardization;  // applied to inputs before the kernel when non-empty

  std::size_t support_count() const { return dual_coef.size(); }
  std::span<const double> support_vector(std::size_t s) const {
    return {support_vectors.data() + s * dim, dim};
  }

  double decision(std::span<const double> raw) const {
    const std::vector<double> x = standardization.applied(raw);
    double v = bias;
    for (std::size_t s = 0; s < dual_coef.size(); ++s) v += dual_coef[s] * kernel(support_vector(s), x);
    return v;
  }
};

inline std::vector<int> checked_labels(std::span<const int> labels) {
  bool pos = false, neg = false;
  for (int l : labels) {
    if (l == 1) pos = true;
    else if (l == -1) neg = true;
    else fail_data("svm: labels must be -1 or +1");
  }
  if (!pos || !neg) fail_data("svm: training labels contain a single class");
  return {labels.begin(), labels.end()};
}

inline SvmModel model_from_solution(const FeatureMatrix& m, std::span<const int> y, const SmoSolution& sol,
                                    const KernelSpec& kernel, double C) {
  SvmModel model;
  model.kernel = kernel;
  model.C = C;
  model.bias = -sol.rho;
  model.dim = m.cols();
  model.kkt_gap = sol.kkt_gap;
  model.iterations = sol.iterations;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    if (sol.alpha[i] <= 0.0) continue;
    model.dual_coef.push_back(sol.alpha[i] * y[i]);
    const auto r = m.row(i);
    model.support_vectors.insert(model.support_vectors.end(), r.begin(), r.end());
  }
  return model;
}

// Trains on m as given (no standardization). For the rbf kernel a
// non-positive gamma means 1/D.
inline SvmModel svm_train(const FeatureMatrix& m, std::span<const int> labels, KernelSpec kernel, double C,
                          double tolerance = 1e-3) {
  if (labels.size() != m.rows()) fail_data("svm: label count does not match rows");
  const std::vector<int> y = checked_labels(labels);
  if (kernel.type == KernelType::rbf && !(kernel.gamma > 0.0))
    kernel.gamma = 1.0 / static_cast<double>(std::max<std::size_t>(1, m.cols()));
  const KernelMatrix km = kernel_matrix(m, kernel);
  const SmoSolution sol = smo_solve(km, y, {C, tolerance});
  return model_from_solution(m, y, sol, kernel, C);
}

struct SvmPrediction {
  std::vector<int> labels;
  std::vector<double> decision;
};

inline SvmPrediction svm_predict(const SvmModel& model, const FeatureMatrix& m) {
  if (m.cols() != model.dim) fail_data("svm: feature dimension mismatch");
  SvmPrediction out;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double d = model.decision(m.row(r));
    out.decision.push_back(d);
    out.labels.push_back(d > 0.0 ? 1 : -1);
  }
  return out;
}

inline std::vector<double> default_c_grid() {
  std::vector<double> grid;
  for (int e = -5; e <= 7; e += 2) grid.push_back(std::ldexp(1.0, e));
  return grid;
}

// k-fold CV accuracy for each candidate C on a precomputed kernel. Returns the
// C with the best mean accuracy; ties keep the smaller C.
inline double select_c_by_cv(const KernelMatrix& km, std::span<const int> y, std::span<const double> grid,
                             int folds, std::uint64_t seed, double tolerance = 1e-3) {
  if (grid.empty()) fail_config("svm: empty C grid");
  const FoldPlan plan = make_folds(km.n, folds, seed);
  double best_c = grid.front();
  double best_acc = -1.0;
  for (double C : grid) {
    std::size_t correct = 0;
    for (int f = 0; f < folds; ++f) {
      const auto train = plan.train_indices(f);
      const auto test = plan.test_indices(f);
      std::vector<int> ty;
      for (std::size_t i : train) ty.push_back(y[i]);
      const bool has_pos = std::count(ty.begin(), ty.end(), 1) > 0;
      const bool has_neg = std::count(ty.begin(), ty.end(), -1) > 0;
      if (!has_pos || !has_neg) {
        const int only = has_pos ? 1 : -1;
        for (std::size_t i : test) correct += (y[i] == only);
        continue;
      }
      const SmoSolution sol = smo_solve(km.subset(train), ty, {C, tolerance});
      for (std::size_t i : test) {
        double d = -sol.rho;
        for (std::size_t a = 0; a < train.size(); ++a)
          if (sol.alpha[a] > 0.0) d += sol.alpha[a] * ty[a] * km(train[a], i);
        correct += ((d > 0.0 ? 1 : -1) == y[i]);
      }
    }
    const double acc = static_cast<double>(correct) / static_cast<double>(km.n);
    if (acc > best_acc) {
      best_acc = acc;
      best_c = C;
    }
  }
  return best_c;
}

}  // namespace pae
