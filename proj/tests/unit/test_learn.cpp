#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "pae/learn/folds.hpp"
#include "pae/learn/kernel_ridge.hpp"
#include "pae/learn/kmeans.hpp"
#include "pae/learn/lasso.hpp"
#include "pae/learn/matrix.hpp"
#include "pae/learn/stats.hpp"
#include "pae/learn/svm.hpp"
#include "pae/random.hpp"

using namespace pae;

namespace {

FeatureMatrix make_matrix(std::size_t n, std::size_t d, const std::vector<double>& values) {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < d; ++j) names.push_back("f" + std::to_string(j));
  FeatureMatrix m(n, names);
  for (std::size_t r = 0; r < n; ++r) m.ids[r] = "s" + std::to_string(r);
  m.values = values;
  return m;
}

FeatureMatrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(n * d);
  for (double& x : v) x = rng.normal();
  return make_matrix(n, d, v);
}

// Spearman from the textbook d^2 formula; valid without ties.
double spearman_no_ties(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  auto rank = [&](const std::vector<double>& v) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      int below = 0;
      for (std::size_t j = 0; j < n; ++j) below += v[j] < v[i];
      r[i] = below + 1;
    }
    return r;
  };
  const auto rx = rank(x), ry = rank(y);
  double d2 = 0;
  for (std::size_t i = 0; i < n; ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const double nn = static_cast<double>(n);
  return 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
}

Eigen::VectorXd least_squares_oracle(const FeatureMatrix& m, const std::vector<double>& y) {
  const auto n = static_cast<Eigen::Index>(m.rows()), d = static_cast<Eigen::Index>(m.cols());
  Eigen::MatrixXd x(n, d + 1);
  Eigen::VectorXd yy(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    x(r, 0) = 1.0;
    for (Eigen::Index c = 0; c < d; ++c) x(r, c + 1) = m.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    yy(r) = y[static_cast<std::size_t>(r)];
  }
  // normal equations
  return (x.transpose() * x).ldlt().solve(x.transpose() * yy);
}

}  // namespace

// ---------------------------------------------------------------- standardize

TEST(Standardize, TwoValueColumn) {
  const auto [s, map] = standardize(make_matrix(2, 1, {1.0, 3.0}));
  EXPECT_DOUBLE_EQ(s.at(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(s.at(1, 0), 1.0);
  EXPECT_FALSE(map.constant[0]);
}

TEST(Standardize, ConstantColumnUnchangedAndFlagged) {
  const auto [s, map] = standardize(make_matrix(3, 2, {5.0, 1.0, 5.0, 2.0, 5.0, 3.0}));
  EXPECT_TRUE(map.constant[0]);
  EXPECT_FALSE(map.constant[1]);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(s.at(r, 0), 5.0);
}

TEST(Standardize, MomentsMatchOracle) {
  FeatureMatrix m = random_matrix(57, 6, 3);
  for (std::size_t r = 0; r < m.rows(); ++r) m.at(r, 2) = 100.0 + 7.0 * m.at(r, 2);
  const auto [s, map] = standardize(m);
  for (std::size_t c = 0; c < m.cols(); ++c) {
    const auto col = s.column(c);
    const double mu = std::accumulate(col.begin(), col.end(), 0.0) / col.size();
    double var = 0;
    for (double v : col) var += (v - mu) * (v - mu);
    var /= col.size();
    EXPECT_NEAR(mu, 0.0, 1e-9);
    EXPECT_NEAR(var, 1.0, 1e-6);
  }
}

// ------------------------------------------------------------------- spearman

TEST(Spearman, Identity) {
  const std::vector<double> x = {3, 1, 4, 1.5, 9, 2.6};
  EXPECT_DOUBLE_EQ(spearman(x, x).rho, 1.0);
  std::vector<double> neg(x.size());
  std::transform(x.begin(), x.end(), neg.begin(), [](double v) { return -v; });
  EXPECT_DOUBLE_EQ(spearman(x, neg).rho, -1.0);
}

TEST(Spearman, SmallHandExample) {
  // d^2 = (0,1,1,0): 1 - 6*2 / (4*15) = 0.8
  EXPECT_NEAR(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4}).rho, 0.8, 1e-12);
}

TEST(Spearman, MatchesRankFormulaWithoutTies) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> x(25), y(25);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = rng.normal();
      y[i] = x[i] + rng.normal();
    }
    EXPECT_NEAR(spearman(x, y).rho, spearman_no_ties(x, y), 1e-12);
  }
}

TEST(Spearman, TiesUseMidRanks) {
  const auto r = mid_ranks(std::vector<double>{10, 20, 10, 30, 20, 20});
  EXPECT_EQ(r, (std::vector<double>{1.5, 4, 1.5, 6, 4, 4}));
}

TEST(Spearman, InvariantUnderMonotoneTransform) {
  Rng rng(4);
  std::vector<double> x(40), y(40), ex(40);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal();
    y[i] = 0.5 * x[i] + rng.normal();
    ex[i] = std::exp(x[i]);
  }
  EXPECT_EQ(spearman(x, y).rho, spearman(ex, y).rho);
}

TEST(Spearman, Errors) {
  EXPECT_THROW(spearman(std::vector<double>{1, 2}, std::vector<double>{1}), Error);
  EXPECT_THROW(spearman(std::vector<double>{1}, std::vector<double>{1}), Error);
  const Correlation c = spearman(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3});
  EXPECT_TRUE(c.degenerate);
  EXPECT_EQ(c.rho, 0.0);
}

// ---------------------------------------------------------------------- folds

TEST(Folds, SizesAndDeterminism) {
  EXPECT_EQ(make_folds(10, 5, 1).sizes(), (std::vector<std::size_t>{2, 2, 2, 2, 2}));
  auto sizes = make_folds(11, 5, 1).sizes();
  std::sort(sizes.begin(), sizes.end());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{2, 2, 2, 2, 3}));
  EXPECT_EQ(make_folds(37, 5, 9).assignment, make_folds(37, 5, 9).assignment);
  EXPECT_NE(make_folds(37, 5, 9).assignment, make_folds(37, 5, 10).assignment);
}

TEST(Folds, TrainAndTestPartition) {
  const FoldPlan plan = make_folds(23, 5, 2);
  for (int f = 0; f < 5; ++f) EXPECT_EQ(plan.train_indices(f).size() + plan.test_indices(f).size(), 23u);
}

// --------------------------------------------------------------------- kmeans

TEST(KMeans, KPointsKClustersZeroInertia) {
  const std::vector<double> pts = {0, 0, 5, 5, -3, 2};
  const KMeansResult r = kmeans(pts, 2, 3, 1);
  EXPECT_EQ(r.inertia, 0.0);
}

TEST(KMeans, SingleClusterIsMean) {
  const std::vector<double> pts = {1, 2, 3, 4, 5, 9};
  const KMeansResult r = kmeans(pts, 2, 1, 7);
  EXPECT_NEAR(r.centroids[0], 3.0, 1e-12);
  EXPECT_NEAR(r.centroids[1], 5.0, 1e-12);
}

TEST(KMeans, RecoversSeparatedBlobs) {
  Rng rng(5);
  const double centers[3][2] = {{0, 0}, {10, 0}, {0, 10}};
  std::vector<double> pts;
  for (int b = 0; b < 3; ++b)
    for (int i = 0; i < 200; ++i) {
      pts.push_back(centers[b][0] + rng.normal(0, 0.3));
      pts.push_back(centers[b][1] + rng.normal(0, 0.3));
    }
  const KMeansResult r = kmeans(pts, 2, 3, 11);
  for (const auto& c : centers) {
    double best = 1e9;
    for (std::size_t k = 0; k < 3; ++k)
      best = std::min(best, std::hypot(r.centroids[2 * k] - c[0], r.centroids[2 * k + 1] - c[1]));
    EXPECT_LT(best, 0.1);
  }
}

TEST(KMeans, InertiaNonIncreasing) {
  const FeatureMatrix m = random_matrix(300, 4, 8);
  const KMeansResult r = kmeans(m.values, 4, 7, 3);
  for (std::size_t i = 1; i < r.inertia_history.size(); ++i)
    EXPECT_LE(r.inertia_history[i], r.inertia_history[i - 1] * (1 + 1e-12));
}

TEST(KMeans, DeterministicForSeed) {
  const FeatureMatrix m = random_matrix(100, 3, 1);
  EXPECT_EQ(kmeans(m.values, 3, 5, 42).centroids, kmeans(m.values, 3, 5, 42).centroids);
}

TEST(KMeans, DegenerateInputs) {
  const std::vector<double> dup = {1, 1, 1, 1, 1, 1, 1, 1};
  EXPECT_THROW(kmeans(dup, 2, 2, 0), Error);
  EXPECT_THROW(kmeans(dup, 2, 5, 0), Error);
}

TEST(KMeans, TiesGoToLowestIndex) {
  const std::vector<double> cents = {0.0, 2.0};
  EXPECT_EQ(nearest_centroid(std::vector<double>{1.0}, cents, 2), 0);
}

// ---------------------------------------------------------------------- lasso

TEST(Lasso, SoftThresholdLawOnOrthonormalDesign) {
  // 8x3 Hadamard columns: centered, orthogonal, X'X/N = I
  const FeatureMatrix x = make_matrix(8, 3, {1, 1, 1, -1, 1, -1, 1, -1, -1, -1, -1, 1,
                                             1, 1, -1, -1, 1, 1, 1, -1, 1, -1, -1, -1});
  ASSERT_EQ(x.values.size(), 24u);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) {
      double g = 0, s = 0;
      for (std::size_t r = 0; r < 8; ++r) {
        g += x.at(r, a) * x.at(r, b);
        s += x.at(r, a);
      }
      ASSERT_EQ(g, a == b ? 8.0 : 0.0);
      ASSERT_EQ(s, 0.0);
    }
  const std::vector<double> y = {3.0, -1.0, 2.0, 0.5, -2.0, 1.5, 0.25, -0.75};
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / 8.0;
  std::vector<double> b(3, 0.0);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t r = 0; r < 8; ++r) b[j] += x.at(r, j) * (y[r] - ym) / 8.0;

  const LassoPath path = lasso_path(x, y);
  ASSERT_EQ(path.lambdas.size(), 100u);
  for (std::size_t s = 0; s < path.lambdas.size(); ++s)
    for (std::size_t j = 0; j < 3; ++j) {
      const double expect = std::copysign(std::max(std::abs(b[j]) - path.lambdas[s], 0.0), b[j]);
      EXPECT_NEAR(path.coefficients[s][j], expect, 1e-8);
    }
}

TEST(Lasso, LargestLambdaIsAllZero) {
  const FeatureMatrix m = random_matrix(30, 6, 2);
  std::vector<double> y(30);
  for (std::size_t r = 0; r < 30; ++r) y[r] = m.at(r, 0) - 2 * m.at(r, 3);
  const LassoPath p = lasso_path(m, y);
  for (double b : p.coefficients.front()) EXPECT_EQ(b, 0.0);
  for (std::size_t i = 1; i < p.lambdas.size(); ++i) EXPECT_LT(p.lambdas[i], p.lambdas[i - 1]);
  EXPECT_NEAR(p.lambdas.back() / p.lambdas.front(), 1e-3, 1e-12);
}

TEST(Lasso, SmallLambdaMatchesLeastSquares) {
  const FeatureMatrix m = make_matrix(5, 3, {1, 2, 0.5, 2, -1, 1, 0, 1, 3, -1, 0.5, 2, 3, 2, -2});
  const std::vector<double> y = {1.0, 0.3, 2.2, -0.4, 1.7};
  LassoOptions opt;
  opt.min_ratio = 1e-10;
  opt.tolerance = 1e-12;
  opt.max_sweeps = 100000;
  const LassoPath p = lasso_path(m, y, opt);
  const Eigen::VectorXd ls = least_squares_oracle(m, y);
  EXPECT_NEAR(p.intercepts.back(), ls(0), 1e-4);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(p.coefficients.back()[j], ls(static_cast<Eigen::Index>(j + 1)), 1e-4);
}

TEST(Lasso, ZeroTargetGivesZeroPath) {
  const FeatureMatrix m = random_matrix(20, 4, 6);
  const std::vector<double> y(20, 0.0);
  const LassoPath p = lasso_path(m, y);
  for (const auto& c : p.coefficients)
    for (double b : c) EXPECT_EQ(b, 0.0);
  for (int e : p.entry_step) EXPECT_EQ(e, 100);
}

TEST(Lasso, ObjectiveNonIncreasingPerSweep) {
  const FeatureMatrix m = random_matrix(40, 12, 17);
  Rng rng(3);
  std::vector<double> y(40);
  for (std::size_t r = 0; r < 40; ++r) y[r] = m.at(r, 1) + 0.5 * m.at(r, 7) + 0.3 * rng.normal();
  LassoOptions opt;
  opt.record_objective = true;
  const LassoPath p = lasso_path(m, y, opt);
  for (const auto& trace : p.objective_trace)
    for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_LE(trace[i], trace[i - 1] + 1e-14);
}

TEST(Lasso, EntryOrderConsistentWithCoefficients) {
  const FeatureMatrix m = random_matrix(60, 8, 23);
  std::vector<double> y(60);
  for (std::size_t r = 0; r < 60; ++r) y[r] = 3 * m.at(r, 5) + 1 * m.at(r, 2) + 0.2 * m.at(r, 0);
  const LassoPath p = lasso_path(m, y);
  EXPECT_EQ(p.entry_order[0], 5u);
  EXPECT_EQ(p.entry_order[1], 2u);
  for (std::size_t j = 0; j < 8; ++j) {
    const int e = p.entry_step[j];
    EXPECT_LE(e, 100);
    for (int s = 0; s < std::min(e, 100); ++s) EXPECT_EQ(p.coefficients[static_cast<std::size_t>(s)][j], 0.0);
    if (e < 100) {
      EXPECT_NE(p.coefficients[static_cast<std::size_t>(e)][j], 0.0);
    }
  }
  for (std::size_t i = 1; i < p.entry_order.size(); ++i)
    EXPECT_LE(p.entry_step[p.entry_order[i - 1]], p.entry_step[p.entry_order[i]]);
}

TEST(Lasso, RejectsNonFinite) {
  FeatureMatrix m = random_matrix(5, 2, 1);
  m.values[3] = std::nan("");
  EXPECT_THROW(lasso_path(m, std::vector<double>(5, 1.0)), Error);
}

// ------------------------------------------------------------------------ svm

namespace {

void expect_dual_constraints(const SvmModel& m) {
  double sum = 0.0;
  for (double c : m.dual_coef) {
    EXPECT_GT(std::abs(c), 0.0);
    EXPECT_LE(std::abs(c), m.C + 1e-12);
    sum += c;
  }
  EXPECT_LE(std::abs(sum), 1e-6);
  EXPECT_LT(m.kkt_gap, 1e-3);
}

}  // namespace

TEST(Svm, SeparableClustersLinear) {
  Rng rng(1);
  std::vector<double> v;
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    const int label = i % 2 ? 1 : -1;
    v.push_back(label * 3.0 + rng.normal(0, 0.5));
    v.push_back(label * 2.0 + rng.normal(0, 0.5));
    y.push_back(label);
  }
  const FeatureMatrix m = make_matrix(40, 2, v);
  const SvmModel model = svm_train(m, y, {KernelType::linear, 0}, 1.0);
  expect_dual_constraints(model);
  const SvmPrediction pred = svm_predict(model, m);
  EXPECT_EQ(pred.labels, y);
}

TEST(Svm, XorWithRbf) {
  const FeatureMatrix m = make_matrix(4, 2, {0, 0, 1, 1, 0, 1, 1, 0});
  const std::vector<int> y = {-1, -1, 1, 1};
  const SvmModel model = svm_train(m, y, {KernelType::rbf, 1.0}, 10.0);
  expect_dual_constraints(model);
  EXPECT_EQ(svm_predict(model, m).labels, y);
}

TEST(Svm, FreeSupportVectorsSitOnMargin) {
  const FeatureMatrix m = random_matrix(60, 3, 31);
  std::vector<int> y(60);
  for (std::size_t r = 0; r < 60; ++r) y[r] = m.at(r, 0) + 0.5 * m.at(r, 1) > 0 ? 1 : -1;
  const SvmModel model = svm_train(m, y, {KernelType::rbf, 0.0}, 4.0);
  expect_dual_constraints(model);
  for (std::size_t s = 0; s < model.support_count(); ++s) {
    if (std::abs(model.dual_coef[s]) >= model.C) continue;
    EXPECT_GE(std::abs(model.decision(model.support_vector(s))), 1.0 - 1e-3);
  }
}

TEST(Svm, DuplicatedSamplesWithHalvedCost) {
  // duplicating every sample doubles the hinge term; C/2 on the doubled set
  // is the same primal problem
  const FeatureMatrix m = random_matrix(30, 2, 13);
  std::vector<int> y(30);
  for (std::size_t r = 0; r < 30; ++r) y[r] = m.at(r, 0) * m.at(r, 1) > 0 ? 1 : -1;
  std::vector<double> dv = m.values;
  dv.insert(dv.end(), m.values.begin(), m.values.end());
  std::vector<int> dy = y;
  dy.insert(dy.end(), y.begin(), y.end());
  const FeatureMatrix dm = make_matrix(60, 2, dv);
  const KernelSpec k{KernelType::rbf, 0.8};
  const SvmModel a = svm_train(m, y, k, 2.0, 1e-12);
  const SvmModel b = svm_train(dm, dy, k, 1.0, 1e-12);
  for (double px = -2; px <= 2; px += 0.5)
    for (double py = -2; py <= 2; py += 0.5) {
      const std::vector<double> probe = {px, py};
      EXPECT_NEAR(a.decision(probe), b.decision(probe), 1e-6);
    }
}

TEST(Svm, GammaDefaultsToInverseDimension) {
  const FeatureMatrix m = random_matrix(20, 5, 2);
  std::vector<int> y(20);
  for (std::size_t r = 0; r < 20; ++r) y[r] = r % 2 ? 1 : -1;
  EXPECT_DOUBLE_EQ(svm_train(m, y, {KernelType::rbf, 0.0}, 1.0).kernel.gamma, 0.2);
}

TEST(Svm, SingleClassRejected) {
  const FeatureMatrix m = random_matrix(5, 2, 2);
  EXPECT_THROW(svm_train(m, std::vector<int>(5, 1), {KernelType::linear, 0}, 1.0), Error);
}

TEST(Svm, DeterministicDecisionValues) {
  const FeatureMatrix m = random_matrix(50, 4, 77);
  std::vector<int> y(50);
  for (std::size_t r = 0; r < 50; ++r) y[r] = m.at(r, 2) > 0 ? 1 : -1;
  const auto a = svm_predict(svm_train(m, y, {KernelType::rbf, 0.0}, 1.0), m).decision;
  const auto b = svm_predict(svm_train(m, y, {KernelType::rbf, 0.0}, 1.0), m).decision;
  EXPECT_EQ(a, b);
}

TEST(Svm, CGridIsOddPowersOfTwo) {
  EXPECT_EQ(default_c_grid(), (std::vector<double>{1.0 / 32, 1.0 / 8, 0.5, 2, 8, 32, 128}));
}

// ---------------------------------------------------------------- kernel ridge

TEST(KernelRidge, TinyLambdaInterpolates) {
  const FeatureMatrix m = make_matrix(3, 1, {0.0, 1.0, 2.5});
  const std::vector<double> y = {1.0, -2.0, 0.5};
  const KernelRidgeModel k = kernel_ridge(m, y, 1.0, 1e-9);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(k.predict(m.row(i)), y[i], 1e-5);
}

TEST(KernelRidge, HugeLambdaShrinksToZero) {
  const FeatureMatrix m = random_matrix(10, 2, 4);
  std::vector<double> y(10);
  for (std::size_t i = 0; i < 10; ++i) y[i] = (i % 2 ? 1.0 : -1.0);
  const KernelRidgeModel k = kernel_ridge(m, y, 0.5, 1e9);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_NEAR(k.predict(m.row(i)), 0.0, 1e-8);
}

TEST(KernelRidge, MatchesDirectLinearSolve) {
  const FeatureMatrix m = random_matrix(12, 3, 19);
  std::vector<double> y(12);
  for (std::size_t i = 0; i < 12; ++i) y[i] = m.at(i, 0) - m.at(i, 2);
  const double gamma = 0.4, lambda = 0.1;
  Eigen::MatrixXd a(12, 12);
  Eigen::VectorXd rhs(12);
  for (int i = 0; i < 12; ++i) {
    rhs(i) = y[static_cast<std::size_t>(i)];
    for (int j = 0; j < 12; ++j) {
      double d2 = 0;
      for (std::size_t c = 0; c < 3; ++c) {
        const double d = m.at(static_cast<std::size_t>(i), c) - m.at(static_cast<std::size_t>(j), c);
        d2 += d * d;
      }
      a(i, j) = std::exp(-gamma * d2) + (i == j ? lambda : 0.0);
    }
  }
  const Eigen::VectorXd sol = a.fullPivLu().solve(rhs);
  const KernelRidgeModel k = kernel_ridge(m, y, gamma, lambda);
  for (int i = 0; i < 12; ++i) EXPECT_NEAR(k.coef[static_cast<std::size_t>(i)], sol(i), 1e-9);
}
