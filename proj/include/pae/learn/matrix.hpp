#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "pae/error.hpp"

namespace pae {

// N x D feature table. `scores` holds the per-row regression target when
// one is known and is otherwise empty.
struct FeatureMatrix {
  std::vector<std::string> ids;
  std::vector<std::string> registry;
  std::vector<double> values;  // row-major
  std::vector<double> scores;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::vector<std::string> names)
      : ids(rows), registry(std::move(names)), values(rows * registry.size(), 0.0) {}

  std::size_t rows() const { return ids.size(); }
  std::size_t cols() const { return registry.size(); }

  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }

  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * cols(), cols()};
  }
  std::span<double> row(std::size_t r) { return {values.data() + r * cols(), cols()}; }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows());
    for (std::size_t r = 0; r < rows(); ++r) out[r] = at(r, c);
    return out;
  }

  bool has_scores() const { return scores.size() == rows() && rows() > 0; }

  FeatureMatrix select_rows(std::span<const std::size_t> which) const {
    FeatureMatrix out;
    out.registry = registry;
    out.ids.reserve(which.size());
    out.values.reserve(which.size() * cols());
    for (std::size_t r : which) {
      out.ids.push_back(ids[r]);
      const auto src = row(r);
      out.values.insert(out.values.end(), src.begin(), src.end());
      if (has_scores()) out.scores.push_back(scores[r]);
    }
    return out;
  }

  FeatureMatrix select_columns(std::span<const std::size_t> which) const {
    FeatureMatrix out;
    out.ids = ids;
    out.scores = scores;
    for (std::size_t c : which) out.registry.push_back(registry[c]);
    out.values.reserve(rows() * which.size());
    for (std::size_t r = 0; r < rows(); ++r)
      for (std::size_t c : which) out.values.push_back(at(r, c));
    return out;
  }

  void validate() const {
    if (rows() == 0) fail_data("feature matrix has no rows");
    if (values.size() != rows() * cols()) fail_data("feature matrix size mismatch");
    if (!scores.empty() && scores.size() != rows()) fail_data("score count does not match row count");
    std::unordered_set<std::string> seen;
    for (const auto& n : registry)
      if (!seen.insert(n).second) fail_data("duplicate feature name: " + n);
    for (double v : values)
      if (!std::isfinite(v)) fail_data("feature matrix contains a non-finite value");
    for (double v : scores)
      if (!std::isfinite(v)) fail_data("score column contains a non-finite value");
  }
};

// Per-column affine map x -> (x - mean) / scale. Zero-variance columns map
// to themselves (mean 0, scale 1) and are flagged.
struct Standardization {
  std::vector<double> mean;
  std::vector<double> scale;
  std::vector<bool> constant;

  bool empty() const { return mean.empty(); }

  void apply_row(std::span<double> row) const {
    for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - mean[c]) / scale[c];
  }

  std::vector<double> applied(std::span<const double> row) const {
    std::vector<double> out(row.begin(), row.end());
    if (!empty()) apply_row(out);
    return out;
  }

  void apply(FeatureMatrix& m) const {
    if (m.cols() != mean.size()) fail_data("standardization dimension mismatch");
    for (std::size_t r = 0; r < m.rows(); ++r) apply_row(m.row(r));
  }
};

inline Standardization fit_standardization(const FeatureMatrix& m) {
  const std::size_t n = m.rows(), d = m.cols();
  Standardization s{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0),
                    std::vector<bool>(d, false)};
  if (n == 0) return s;
  for (std::size_t c = 0; c < d; ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) sum += m.at(r, c);
    const double mu = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double dv = m.at(r, c) - mu;
      ss += dv * dv;
    }
    const double var = ss / static_cast<double>(n);
    if (var > 1e-24) {
      s.mean[c] = mu;
      s.scale[c] = std::sqrt(var);
    } else {
      s.constant[c] = true;  // left unchanged
    }
  }
  return s;
}

// Population (1/N) moments; returns the standardized copy and the map.
inline std::pair<FeatureMatrix, Standardization> standardize(const FeatureMatrix& m) {
  Standardization s = fit_standardization(m);
  FeatureMatrix out = m;
  s.apply(out);
  return {std::move(out), std::move(s)};
}

}  // namespace pae
