#pragma once

// Versioned text forms of trained models: JSON for SVM / kernel ridge /
// standardization, a line-oriented format for LASSO paths.

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pae/error.hpp"
#include "pae/format.hpp"
#include "pae/learn/kernel_ridge.hpp"
#include "pae/learn/lasso.hpp"
#include "pae/learn/matrix.hpp"
#include "pae/learn/svm.hpp"

namespace pae {

using Json = nlohmann::json;

namespace detail {

template <typename T>
T json_get(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) fail_data(std::string("model file is missing '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    fail_data(std::string("model field '") + key + "' has the wrong type");
  }
}

}  // namespace detail

inline Json to_json(const Standardization& s) {
  std::vector<int> constant(s.constant.begin(), s.constant.end());
  return {{"mean", s.mean}, {"scale", s.scale}, {"constant", constant}};
}

inline Standardization standardization_from_json(const Json& j) {
  Standardization s;
  s.mean = detail::json_get<std::vector<double>>(j, "mean");
  s.scale = detail::json_get<std::vector<double>>(j, "scale");
  const auto c = detail::json_get<std::vector<int>>(j, "constant");
  s.constant.assign(c.begin(), c.end());
  if (s.scale.size() != s.mean.size() || s.constant.size() != s.mean.size())
    fail_data("standardization vectors differ in length");
  for (double v : s.scale)
    if (!(v > 0.0)) fail_data("standardization scale must be positive");
  return s;
}

inline Json to_json(const KernelSpec& k) {
  return {{"type", k.type == KernelType::linear ? "linear" : "rbf"}, {"gamma", k.gamma}};
}

inline KernelSpec kernel_from_json(const Json& j) {
  const auto type = detail::json_get<std::string>(j, "type");
  if (type != "linear" && type != "rbf") fail_data("unknown kernel type '" + type + "'");
  return {type == "linear" ? KernelType::linear : KernelType::rbf, detail::json_get<double>(j, "gamma")};
}

inline Json to_json(const SvmModel& m) {
  Json j = {{"format", "pae-svm"},
            {"schema_version", 1},
            {"kernel", to_json(m.kernel)},
            {"C", m.C},
            {"bias", m.bias},
            {"dim", m.dim},
            {"support_vectors", m.support_vectors},
            {"dual_coef", m.dual_coef},
            {"kkt_gap", m.kkt_gap},
            {"iterations", m.iterations}};
  if (!m.standardization.empty()) j["standardization"] = to_json(m.standardization);
  return j;
}

inline SvmModel svm_from_json(const Json& j) {
  if (detail::json_get<std::string>(j, "format") != "pae-svm") fail_data("not an SVM model");
  if (detail::json_get<int>(j, "schema_version") != 1) fail_data("unsupported SVM model version");
  SvmModel m;
  m.kernel = kernel_from_json(detail::json_get<Json>(j, "kernel"));
  m.C = detail::json_get<double>(j, "C");
  m.bias = detail::json_get<double>(j, "bias");
  m.dim = detail::json_get<std::size_t>(j, "dim");
  m.support_vectors = detail::json_get<std::vector<double>>(j, "support_vectors");
  m.dual_coef = detail::json_get<std::vector<double>>(j, "dual_coef");
  m.kkt_gap = detail::json_get<double>(j, "kkt_gap");
  m.iterations = detail::json_get<long>(j, "iterations");
  if (j.contains("standardization")) m.standardization = standardization_from_json(j.at("standardization"));
  if (m.support_vectors.size() != m.dual_coef.size() * m.dim) fail_data("SVM support vector block has the wrong size");
  return m;
}

inline Json to_json(const KernelRidgeModel& m) {
  return {{"kernel", to_json(m.kernel)}, {"lambda", m.lambda}, {"dim", m.dim},
          {"train_points", m.train_points}, {"coef", m.coef}};
}

inline KernelRidgeModel kernel_ridge_from_json(const Json& j) {
  KernelRidgeModel m;
  m.kernel = kernel_from_json(detail::json_get<Json>(j, "kernel"));
  m.lambda = detail::json_get<double>(j, "lambda");
  m.dim = detail::json_get<std::size_t>(j, "dim");
  m.train_points = detail::json_get<std::vector<double>>(j, "train_points");
  m.coef = detail::json_get<std::vector<double>>(j, "coef");
  if (m.train_points.size() != m.coef.size() * m.dim) fail_data("kernel ridge point block has the wrong size");
  return m;
}

// Text format:
//   pae-lasso-path 1
//   features <D> steps <S>
//   step <i> lambda <l> intercept <b0> sweeps <n> coef <D numbers>   (S lines)
//   entry <D integers>
inline void save_lasso_path(const LassoPath& p, std::ostream& out) {
  const std::size_t d = p.features();
  out << "pae-lasso-path 1\n";
  out << "features " << d << " steps " << p.lambdas.size() << "\n";
  for (std::size_t s = 0; s < p.lambdas.size(); ++s) {
    out << "step " << s << " lambda " << format_double(p.lambdas[s]) << " intercept "
        << format_double(p.intercepts[s]) << " sweeps " << p.sweeps[s] << " coef";
    for (double c : p.coefficients[s]) out << ' ' << format_double(c);
    out << "\n";
  }
  out << "entry";
  for (int e : p.entry_step) out << ' ' << e;
  out << "\n";
}

inline LassoPath load_lasso_path(std::istream& in) {
  auto expect = [&](const char* word) {
    std::string tok;
    if (!(in >> tok) || tok != word) fail_data(std::string("lasso path: expected '") + word + "'");
  };
  auto number = [&]() {
    std::string tok;
    if (!(in >> tok)) fail_data("lasso path is truncated");
    return parse_double(tok);
  };
  expect("pae-lasso-path");
  if (number() != 1.0) fail_data("unsupported lasso path version");
  expect("features");
  const auto d = static_cast<std::size_t>(number());
  expect("steps");
  const auto steps = static_cast<std::size_t>(number());
  LassoPath p;
  for (std::size_t s = 0; s < steps; ++s) {
    expect("step");
    if (static_cast<std::size_t>(number()) != s) fail_data("lasso path steps out of order");
    expect("lambda");
    p.lambdas.push_back(number());
    expect("intercept");
    p.intercepts.push_back(number());
    expect("sweeps");
    p.sweeps.push_back(static_cast<int>(number()));
    expect("coef");
    std::vector<double> coef(d);
    for (double& c : coef) c = number();
    p.coefficients.push_back(std::move(coef));
  }
  expect("entry");
  p.entry_step.resize(d);
  for (int& e : p.entry_step) e = static_cast<int>(number());
  order_by_entry(p);
  return p;
}

}  // namespace pae
