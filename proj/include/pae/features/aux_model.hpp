#pragma once

// Auxiliary predictors whose outputs become features: an RBF SVM for binary
// traits (emotion, splicing) and an RBF kernel ridge regressor for graded
// ones (originality, memorability). Both standardize their inputs with
// moments fitted on the training rows.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pae/error.hpp"
#include "pae/learn/kernel_ridge.hpp"
#include "pae/learn/matrix.hpp"
#include "pae/learn/serialize.hpp"
#include "pae/learn/svm.hpp"

namespace pae {

enum class AuxKind { classifier, regressor };

inline const char* to_string(AuxKind k) { return k == AuxKind::classifier ? "classifier" : "regressor"; }

inline constexpr std::size_t kAuxMinSamples = 10;

struct AuxModel {
  AuxKind kind = AuxKind::classifier;
  std::vector<std::string> registry;
  Standardization standardization;
  std::optional<SvmModel> svm;
  std::optional<KernelRidgeModel> ridge;
  double target_mean = 0.0;  // regressor offset; ridge fits centered targets
  std::vector<double> training_predictions;

  std::size_t dim() const { return registry.size(); }

  // Classifier: signed SVM decision value. Regressor: predicted target.
  double predict(std::span<const double> raw) const {
    if (raw.size() != dim()) fail_data("aux model input has the wrong dimension");
    const std::vector<double> x = standardization.applied(raw);
    if (kind == AuxKind::classifier) return svm->decision(x);
    return target_mean + ridge->predict(x);
  }

  void check() const {
    if (registry.empty()) fail_data("aux model has an empty input registry");
    if (standardization.mean.size() != registry.size()) fail_data("aux model standardization does not match registry");
    if (kind == AuxKind::classifier && (!svm || svm->dim != dim())) fail_data("aux classifier parameters are missing");
    if (kind == AuxKind::regressor && (!ridge || ridge->dim != dim())) fail_data("aux regressor parameters are missing");
  }
};

inline std::vector<int> binary_labels(std::span<const double> labels) {
  std::vector<int> y;
  y.reserve(labels.size());
  for (double v : labels) {
    if (v == 1.0) y.push_back(1);
    else if (v == -1.0 || v == 0.0) y.push_back(-1);
    else fail_data("classifier labels must be binary (+1/-1 or 1/0)");
  }
  return y;
}

inline AuxModel train_aux(const FeatureMatrix& m, std::span<const double> labels, AuxKind kind, std::uint64_t seed) {
  m.validate();
  if (m.rows() < kAuxMinSamples) fail_data("aux model needs at least 10 samples");
  if (labels.size() != m.rows()) fail_data("aux model label count does not match rows");
  for (double v : labels)
    if (!std::isfinite(v)) fail_data("aux model label is not finite");

  AuxModel model;
  model.kind = kind;
  model.registry = m.registry;
  auto [x, stdz] = standardize(m);
  model.standardization = std::move(stdz);
  const double gamma = 1.0 / static_cast<double>(m.cols());
  const KernelSpec kernel{KernelType::rbf, gamma};
  const KernelMatrix km = kernel_matrix(x, kernel);

  if (kind == AuxKind::classifier) {
    const std::vector<int> y = checked_labels(binary_labels(labels));
    const int folds = static_cast<int>(std::min<std::size_t>(10, m.rows()));
    const double c = select_c_by_cv(km, y, default_c_grid(), folds, seed);
    model.svm = model_from_solution(x, y, smo_solve(km, y, {c}), kernel, c);
  } else {
    double mu = 0.0;
    for (double v : labels) mu += v;
    mu /= static_cast<double>(labels.size());
    std::vector<double> centered;
    for (double v : labels) centered.push_back(v - mu);
    const double lambda = select_ridge_lambda(km, centered, default_ridge_grid(), 5, seed);
    KernelRidgeModel r;
    r.kernel = kernel;
    r.lambda = lambda;
    r.dim = x.cols();
    r.train_points = x.values;
    r.coef = solve_regularized(km, centered, lambda);
    model.ridge = std::move(r);
    model.target_mean = mu;
  }
  for (std::size_t i = 0; i < m.rows(); ++i) model.training_predictions.push_back(model.predict(m.row(i)));
  return model;
}

inline Json to_json(const AuxModel& m) {
  Json j = {{"format", "pae-aux-model"},
            {"schema_version", 1},
            {"kind", to_string(m.kind)},
            {"registry", m.registry},
            {"standardization", to_json(m.standardization)},
            {"target_mean", m.target_mean},
            {"training_predictions", m.training_predictions}};
  j["params"] = m.kind == AuxKind::classifier ? to_json(*m.svm) : to_json(*m.ridge);
  return j;
}

inline AuxModel aux_from_json(const Json& j) {
  if (detail::json_get<std::string>(j, "format") != "pae-aux-model") fail_data("not an aux model file");
  if (detail::json_get<int>(j, "schema_version") != 1) fail_data("unsupported aux model version");
  AuxModel m;
  const auto kind = detail::json_get<std::string>(j, "kind");
  if (kind == "classifier") m.kind = AuxKind::classifier;
  else if (kind == "regressor") m.kind = AuxKind::regressor;
  else fail_data("unknown aux model kind '" + kind + "'");
  m.registry = detail::json_get<std::vector<std::string>>(j, "registry");
  m.standardization = standardization_from_json(detail::json_get<Json>(j, "standardization"));
  m.target_mean = detail::json_get<double>(j, "target_mean");
  m.training_predictions = detail::json_get<std::vector<double>>(j, "training_predictions");
  const Json params = detail::json_get<Json>(j, "params");
  if (m.kind == AuxKind::classifier) m.svm = svm_from_json(params);
  else m.ridge = kernel_ridge_from_json(params);
  m.check();
  return m;
}

inline void save_aux_model(const AuxModel& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail_data("cannot write " + path.string());
  out << to_json(m).dump(1) << "\n";
}

inline AuxModel load_aux_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail_data("cannot open " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception& e) {
    fail_data(path.string() + ": " + e.what());
  }
  return aux_from_json(j);
}

}  // namespace pae
