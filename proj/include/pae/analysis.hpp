#pragma once

// Feature-importance analysis (LASSO regression with held-out Spearman
// correlation) and the beautiful / not-beautiful SVM classification study.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pae/dataset.hpp"
#include "pae/error.hpp"
#include "pae/learn/folds.hpp"
#include "pae/learn/lasso.hpp"
#include "pae/learn/matrix.hpp"
#include "pae/learn/stats.hpp"
#include "pae/learn/svm.hpp"

namespace pae {

inline constexpr int kOuterFolds = 5;
inline constexpr int kInnerFolds = 5;

// Distinct, reproducible seeds for nested fold plans.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Standardization fitted on `fit_rows`, applied to a copy of `m`.
inline FeatureMatrix standardized_by(const FeatureMatrix& m, const std::vector<std::size_t>& fit_rows) {
  const Standardization s = fit_standardization(m.select_rows(fit_rows));
  FeatureMatrix out = m;
  s.apply(out);
  return out;
}

inline std::vector<double> take(const std::vector<double>& v, const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

// ------------------------------------------------------------ LASSO + CV

// Path step with the lowest inner-CV MSE; ties keep the larger lambda.
inline std::size_t select_lasso_step(const FeatureMatrix& train, const std::vector<double>& y,
                                     const std::vector<double>& grid, std::uint64_t seed,
                                     const LassoOptions& opt = {}) {
  const FoldPlan plan = make_folds(train.rows(), kInnerFolds, seed);
  std::vector<double> sse(grid.size(), 0.0);
  for (int f = 0; f < kInnerFolds; ++f) {
    const auto tr = plan.train_indices(f), te = plan.test_indices(f);
    const LassoPath p = lasso_path(train.select_rows(tr), take(y, tr), grid, opt);
    for (std::size_t s = 0; s < grid.size(); ++s)
      for (std::size_t i : te) {
        const double e = p.predict(s, train.row(i)) - y[i];
        sse[s] += e * e;
      }
  }
  std::size_t best = 0;
  for (std::size_t s = 1; s < sse.size(); ++s)
    if (sse[s] < sse[best]) best = s;
  return best;
}

struct FoldFit {
  LassoPath path;
  std::size_t selected_step = 0;
  std::vector<std::size_t> test;
  std::vector<double> predictions;  // at the selected step, aligned with `test`
  double rho = 0.0;
  bool degenerate = false;
  double mse = 0.0;
};

// Outer fold: standardize on training rows, LASSO path on the training rows,
// lambda by inner CV, Spearman on the held-out rows.
inline FoldFit fit_fold(const FeatureMatrix& m, const std::vector<double>& y, const FoldPlan& plan, int fold,
                        const LassoOptions& opt = {}) {
  const auto train_idx = plan.train_indices(fold);
  FoldFit out;
  out.test = plan.test_indices(fold);
  const FeatureMatrix z = standardized_by(m, train_idx);
  const FeatureMatrix train = z.select_rows(train_idx);
  const std::vector<double> ty = take(y, train_idx);
  const CenteredProblem prob = center_problem(train, ty);
  const std::vector<double> grid = lambda_grid(lambda_max(prob), opt.grid_size, opt.min_ratio);
  out.path = lasso_path(prob, grid, opt);
  out.selected_step = select_lasso_step(train, ty, grid, derive_seed(plan.seed, static_cast<std::uint64_t>(fold)), opt);
  double se = 0.0;
  for (std::size_t i : out.test) {
    out.predictions.push_back(out.path.predict(out.selected_step, z.row(i)));
    se += std::pow(out.predictions.back() - y[i], 2);
  }
  out.mse = se / static_cast<double>(out.test.size());
  const Correlation c = spearman(out.predictions, take(y, out.test));
  out.rho = c.rho;
  out.degenerate = c.degenerate;
  return out;
}

struct GroupCorrelation {
  std::string group;
  std::size_t features = 0;
  std::vector<double> fold_rho;
  std::vector<double> fold_mse;
  MeanStd rho;
  MeanStd mse;
};

inline GroupCorrelation summarize_folds(std::string group, std::size_t features, const std::vector<FoldFit>& fits) {
  GroupCorrelation g;
  g.group = std::move(group);
  g.features = features;
  for (const auto& f : fits) {
    g.fold_rho.push_back(f.rho);
    g.fold_mse.push_back(f.mse);
  }
  g.rho = mean_std(g.fold_rho);
  g.mse = mean_std(g.fold_mse);
  return g;
}

inline GroupCorrelation group_correlation(const FeatureMatrix& m, const std::vector<double>& y, const FoldPlan& plan,
                                          const std::string& group = "all", const LassoOptions& opt = {}) {
  if (y.size() != m.rows()) fail_data("score count does not match rows");
  std::vector<FoldFit> fits;
  for (int f = 0; f < plan.k; ++f) fits.push_back(fit_fold(m, y, plan, f, opt));
  return summarize_folds(group, m.cols(), fits);
}

// ----------------------------------------------------------- entry table

struct EntryRow {
  std::size_t rank = 0;  // 1-based
  std::string feature;
  int entry_step = 0;  // grid size when never active
  double entry_lambda = 0.0;
  double coef_at_entry = 0.0;
  double coef_final = 0.0;  // at the smallest lambda
};

inline std::vector<EntryRow> entry_table(const LassoPath& p, const std::vector<std::string>& names) {
  std::vector<EntryRow> rows;
  const int grid_n = static_cast<int>(p.lambdas.size());
  for (std::size_t r = 0; r < p.entry_order.size(); ++r) {
    const std::size_t j = p.entry_order[r];
    EntryRow e;
    e.rank = r + 1;
    e.feature = names[j];
    e.entry_step = p.entry_step[j];
    if (e.entry_step < grid_n) {
      e.entry_lambda = p.lambdas[static_cast<std::size_t>(e.entry_step)];
      e.coef_at_entry = p.coefficients[static_cast<std::size_t>(e.entry_step)][j];
    }
    e.coef_final = p.coefficients.back()[j];
    rows.push_back(e);
  }
  return rows;
}

// ------------------------------------------------------------ per feature

struct FeatureRho {
  std::string feature;
  double rho = 0.0;
  bool degenerate = false;
};

inline std::vector<FeatureRho> per_feature_rho(const FeatureMatrix& m, const std::vector<double>& y) {
  std::vector<FeatureRho> out;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    const Correlation r = spearman(m.column(c), y);
    out.push_back({m.registry[c], r.rho, r.degenerate});
  }
  return out;
}

// ---------------------------------------------------------------- curve

inline std::vector<std::size_t> curve_counts(std::size_t d) {
  std::vector<std::size_t> out;
  for (std::size_t k : {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20, 30, 50, 75, 100, 150, 200, 250, 300})
    if (k < d) out.push_back(k);
  out.push_back(d);
  return out;
}

struct CurvePoint {
  std::size_t features = 0;
  MeanStd rho;
};

// Held-out Spearman when the model is restricted to at most k active
// features: per outer fold, the last path step whose active set has <= k
// members.
inline std::vector<CurvePoint> correlation_curve(const std::vector<FoldFit>& fits, const FeatureMatrix& m,
                                                 const std::vector<double>& y, const FoldPlan& plan) {
  std::vector<CurvePoint> curve;
  std::vector<FeatureMatrix> z;
  for (int f = 0; f < plan.k; ++f) z.push_back(standardized_by(m, plan.train_indices(f)));
  for (std::size_t k : curve_counts(m.cols())) {
    std::vector<double> rhos;
    for (std::size_t f = 0; f < fits.size(); ++f) {
      const LassoPath& p = fits[f].path;
      std::size_t step = 0;
      for (std::size_t s = 0; s < p.lambdas.size(); ++s)
        if (p.active_count(s) <= k) step = s;
      std::vector<double> pred;
      for (std::size_t i : fits[f].test) pred.push_back(p.predict(step, z[f].row(i)));
      rhos.push_back(spearman(pred, take(y, fits[f].test)).rho);
    }
    curve.push_back({k, mean_std(rhos)});
  }
  return curve;
}

// -------------------------------------------------------- full analysis

struct AnalysisResult {
  std::vector<GroupCorrelation> groups;  // one per group present, then "all"
  LassoPath full_path;                   // on the whole standardized matrix
  std::vector<EntryRow> entries;
  std::vector<FeatureRho> feature_rho;
  std::vector<CurvePoint> curve;
};

inline AnalysisResult analyze(const FeatureMatrix& m, std::uint64_t seed, const LassoOptions& opt = {}) {
  m.validate();
  if (!m.has_scores()) fail_data("analysis needs mean scores");
  if (m.rows() < 10) fail_data("analysis needs at least 10 rows for nested 5-fold CV");
  const std::vector<double>& y = m.scores;
  const FoldPlan plan = make_folds(m.rows(), kOuterFolds, seed);
  AnalysisResult r;

  for (Group g : kAllGroups) {
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < m.cols(); ++c)
      if (group_of_column(m.registry[c]) == g) cols.push_back(c);
    if (cols.empty()) continue;
    r.groups.push_back(group_correlation(m.select_columns(cols), y, plan, group_name(g), opt));
  }
  std::vector<FoldFit> fits;
  for (int f = 0; f < plan.k; ++f) fits.push_back(fit_fold(m, y, plan, f, opt));
  r.groups.push_back(summarize_folds("all", m.cols(), fits));
  r.curve = correlation_curve(fits, m, y, plan);

  std::vector<std::size_t> all(m.rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  r.full_path = lasso_path(standardized_by(m, all), y, opt);
  r.entries = entry_table(r.full_path, m.registry);
  r.feature_rho = per_feature_rho(m, y);
  return r;
}

// -------------------------------------------------------- classification

struct Confusion {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t total() const { return tp + fp + tn + fn; }
  double accuracy() const { return total() ? static_cast<double>(tp + tn) / static_cast<double>(total()) : 0.0; }
};

struct ClassFold {
  std::size_t train_size = 0;  // after delta filtering
  std::size_t test_size = 0;
  double C = 0.0;
  double accuracy = 0.0;
  Confusion confusion;
};

struct ClassificationResult {
  double threshold = 0.0;
  double delta = 0.0;
  std::size_t positives = 0, negatives = 0;
  std::vector<ClassFold> folds;
  MeanStd accuracy;
};

struct ClassifyOptions {
  std::optional<double> threshold;
  double delta = 0.0;
  std::uint64_t seed = 0;
  int folds = kOuterFolds;
  int c_folds = 10;
  std::vector<double> c_grid = default_c_grid();
};

inline ClassificationResult classify(const FeatureMatrix& m, const ClassifyOptions& opt) {
  m.validate();
  if (!m.has_scores()) fail_data("classification needs mean scores");
  if (opt.c_grid.empty()) fail_config("C grid is empty");
  for (double c : opt.c_grid)
    if (!(c > 0.0) || !std::isfinite(c)) fail_config("C grid values must be positive");
  const Binarization bin = binarize_scores(m.scores, opt.threshold);
  ClassificationResult r;
  r.threshold = bin.threshold;
  r.delta = opt.delta;
  r.positives = static_cast<std::size_t>(std::count(bin.labels.begin(), bin.labels.end(), 1));
  r.negatives = bin.labels.size() - r.positives;
  if (r.positives == 0 || r.negatives == 0) fail_data("binarized labels contain a single class");

  const FoldPlan plan = make_folds(m.rows(), opt.folds, opt.seed);
  const KernelSpec kernel{KernelType::rbf, 1.0 / static_cast<double>(m.cols())};
  std::vector<double> accs;
  for (int f = 0; f < opt.folds; ++f) {
    const auto train = delta_filter(plan.train_indices(f), m.scores, bin.threshold, opt.delta);
    const auto test = plan.test_indices(f);
    ClassFold cf;
    cf.train_size = train.size();
    cf.test_size = test.size();
    const FeatureMatrix z = standardized_by(m, train);
    std::vector<int> ty;
    for (std::size_t i : train) ty.push_back(bin.labels[i]);
    const bool has_pos = std::count(ty.begin(), ty.end(), 1) > 0;
    const bool has_neg = std::count(ty.begin(), ty.end(), -1) > 0;
    auto record = [&](std::size_t i, int predicted) {
      const int truth = bin.labels[i];
      if (predicted > 0) (truth > 0 ? cf.confusion.tp : cf.confusion.fp)++;
      else (truth > 0 ? cf.confusion.fn : cf.confusion.tn)++;
    };
    if (!has_pos || !has_neg) {
      // Degenerate training fold: predict its only class.
      for (std::size_t i : test) record(i, has_pos ? 1 : -1);
    } else {
      const FeatureMatrix tz = z.select_rows(train);
      const KernelMatrix km = kernel_matrix(tz, kernel);
      const int cv = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(opt.c_folds), train.size()));
      cf.C = select_c_by_cv(km, ty, opt.c_grid, cv, derive_seed(opt.seed, 100 + static_cast<std::uint64_t>(f)));
      const SvmModel model = model_from_solution(tz, ty, smo_solve(km, ty, {cf.C}), kernel, cf.C);
      for (std::size_t i : test) record(i, model.decision(z.row(i)) > 0.0 ? 1 : -1);
    }
    cf.accuracy = cf.confusion.accuracy();
    accs.push_back(cf.accuracy);
    r.folds.push_back(cf);
  }
  r.accuracy = mean_std(accs);
  return r;
}

}  // namespace pae
