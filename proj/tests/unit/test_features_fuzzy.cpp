#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <numbers>
#include <sstream>

#include "pae/features/fuzzy.hpp"
#include "pae/learn/lasso.hpp"
#include "pae/learn/serialize.hpp"
#include "pae/random.hpp"
#include "support/synth.hpp"

using namespace pae;

namespace {

// Row DFTs then column DFTs, straight from the definition.
std::vector<double> separable_dft_amplitude(const Plane& p) {
  const int n = p.width;
  std::vector<std::complex<double>> a(p.values.begin(), p.values.end()), b(a.size());
  auto tw = [n](int k) { return std::polar(1.0, -2.0 * std::numbers::pi * k / n); };
  for (int y = 0; y < n; ++y)
    for (int u = 0; u < n; ++u) {
      std::complex<double> s = 0;
      for (int x = 0; x < n; ++x) s += a[y * n + x] * tw((u * x) % n);
      b[y * n + u] = s;
    }
  std::vector<double> out(a.size());
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      std::complex<double> s = 0;
      for (int y = 0; y < n; ++y) s += b[y * n + u] * tw((v * y) % n);
      out[v * n + u] = std::abs(s);
    }
  return out;
}

FeatureMatrix toy_matrix(std::size_t n, std::uint64_t seed) {
  FeatureMatrix m(n, {"a.x1", "a.x2"});
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    m.ids[i] = "r" + std::to_string(i);
    m.at(i, 0) = rng.uniform(-1.0, 1.0);
    m.at(i, 1) = rng.uniform(-1.0, 1.0);
  }
  return m;
}

std::vector<double> separable_labels(const FeatureMatrix& m) {
  std::vector<double> y;
  for (std::size_t i = 0; i < m.rows(); ++i) y.push_back(m.at(i, 0) + 0.5 * m.at(i, 1) > 0 ? 1.0 : -1.0);
  return y;
}

}  // namespace

// ----------------------------------------------------------------- spectrum

TEST(Spectrum, IdenticalCorpusEqualsMember) {
  const RasterImage img = synth::noise_image(96, 80, 3);
  const SpectrumReference ref = build_spectrum_reference({img, img, img});
  EXPECT_EQ(ref.count, 3u);
  const Plane s = image_spectrum(img);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(ref.mean_amplitude.values[i], s.values[i], 1e-9);
  EXPECT_NEAR(uniqueness(img, ref), 0.0, 1e-9);
}

TEST(Spectrum, SingletonReferenceGivesExactZero) {
  const RasterImage img = synth::noise_image(50, 70, 4);
  EXPECT_EQ(uniqueness(img, build_spectrum_reference({img})), 0.0);
}

TEST(Spectrum, TwoImageMidpointMatchesOracle) {
  const RasterImage a = synth::gray(synth::smooth_texture(128, 128, 8, 1));
  const RasterImage b = synth::noise_image(128, 128, 2);
  const SpectrumReference ref = build_spectrum_reference({a, b});
  const auto fa = separable_dft_amplitude(luminance(a));
  const auto fb = separable_dft_amplitude(luminance(b));
  double dist2 = 0.0;
  for (std::size_t i = 0; i < fa.size(); ++i) {
    EXPECT_NEAR(ref.mean_amplitude.values[i], 0.5 * (fa[i] + fb[i]), 1e-6);
    dist2 += (fa[i] - ref.mean_amplitude.values[i]) * (fa[i] - ref.mean_amplitude.values[i]);
  }
  EXPECT_NEAR(uniqueness(a, ref), std::sqrt(dist2), 1e-6);
}

TEST(Spectrum, OrderIndependent) {
  const std::vector<RasterImage> c{synth::noise_image(64, 64, 1), synth::noise_image(64, 64, 2),
                                   synth::gray(synth::ramp(64, 64))};
  const RasterImage probe = synth::noise_image(64, 64, 9);
  const double u1 = uniqueness(probe, build_spectrum_reference(c));
  const double u2 = uniqueness(probe, build_spectrum_reference({c[2], c[0], c[1]}));
  EXPECT_NEAR(u1, u2, 1e-9 * u1);
}

TEST(Spectrum, EmptyCorpusRejected) { EXPECT_THROW(build_spectrum_reference({}), Error); }

TEST(Spectrum, TextRoundTrip) {
  const SpectrumReference ref = build_spectrum_reference({synth::noise_image(40, 40, 5)});
  std::stringstream ss;
  save_spectrum_reference(ref, ss);
  const SpectrumReference back = load_spectrum_reference(ss);
  EXPECT_EQ(back.count, ref.count);
  EXPECT_EQ(back.mean_amplitude, ref.mean_amplitude);
  std::stringstream bad("pae-spectrum-reference 1\nsize 64 count 1\n");
  EXPECT_THROW(load_spectrum_reference(bad), Error);
}

// ------------------------------------------------------------------ aux models

TEST(AuxModel, SeparableClassifierFitsTraining) {
  const FeatureMatrix m = toy_matrix(60, 1);
  const auto y = separable_labels(m);
  const AuxModel model = train_aux(m, y, AuxKind::classifier, 7);
  for (std::size_t i = 0; i < m.rows(); ++i) EXPECT_EQ(model.predict(m.row(i)) > 0, y[i] > 0) << i;
}

TEST(AuxModel, RegressorOnFirstCoordinate) {
  const FeatureMatrix m = toy_matrix(60, 2);
  std::vector<double> y;
  for (std::size_t i = 0; i < m.rows(); ++i) y.push_back(m.at(i, 0));
  const AuxModel model = train_aux(m, y, AuxKind::regressor, 7);
  double mse = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) mse += std::pow(model.predict(m.row(i)) - y[i], 2);
  EXPECT_LT(mse / m.rows(), 1e-4);
}

TEST(AuxModel, SameSeedSameModel) {
  const FeatureMatrix m = toy_matrix(40, 3);
  const auto y = separable_labels(m);
  const AuxModel a = train_aux(m, y, AuxKind::classifier, 11);
  const AuxModel b = train_aux(m, y, AuxKind::classifier, 11);
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
}

TEST(AuxModel, TrainingPredictionsReproducedBitIdentically) {
  const FeatureMatrix m = toy_matrix(30, 4);
  std::vector<double> y;
  for (std::size_t i = 0; i < m.rows(); ++i) y.push_back(3.0 + m.at(i, 0) - m.at(i, 1));
  for (AuxKind kind : {AuxKind::classifier, AuxKind::regressor}) {
    const AuxModel model = train_aux(m, kind == AuxKind::classifier ? separable_labels(m) : y, kind, 5);
    const AuxModel back = aux_from_json(Json::parse(to_json(model).dump()));
    for (std::size_t i = 0; i < m.rows(); ++i) {
      EXPECT_EQ(model.predict(m.row(i)), model.training_predictions[i]);
      EXPECT_EQ(back.predict(m.row(i)), back.training_predictions[i]);
      EXPECT_EQ(back.predict(m.row(i)), model.predict(m.row(i)));
    }
  }
}

TEST(AuxModel, FileRoundTrip) {
  const FeatureMatrix m = toy_matrix(20, 6);
  const AuxModel model = train_aux(m, separable_labels(m), AuxKind::classifier, 1);
  const auto path = std::filesystem::temp_directory_path() / "pae_aux_roundtrip.json";
  save_aux_model(model, path);
  const AuxModel back = load_aux_model(path);
  std::filesystem::remove(path);
  EXPECT_EQ(back.registry, model.registry);
  EXPECT_EQ(back.training_predictions, model.training_predictions);
}

TEST(AuxModel, Errors) {
  const FeatureMatrix small = toy_matrix(9, 1);
  EXPECT_THROW(train_aux(small, separable_labels(small), AuxKind::classifier, 1), Error);
  const FeatureMatrix m = toy_matrix(20, 1);
  EXPECT_THROW(train_aux(m, std::vector<double>(20, 1.0), AuxKind::classifier, 1), Error);  // single class
  std::vector<double> real(20, 0.5);
  EXPECT_THROW(train_aux(m, real, AuxKind::classifier, 1), Error);  // not binary
  EXPECT_THROW(aux_from_json(Json::parse("{\"format\": \"other\"}")), Error);
  const AuxModel model = train_aux(m, separable_labels(m), AuxKind::classifier, 1);
  EXPECT_THROW(model.predict(std::vector<double>{1.0}), Error);
}

// -------------------------------------------------------------------- block

TEST(FuzzyBlock, AllModelsAbsent) {
  const RasterImage img = synth::noise_image(64, 64, 8);
  const SpectrumReference ref = build_spectrum_reference({synth::noise_image(64, 64, 9)});
  const FuzzyBlock b = fuzzy_block({}, {}, img, &ref);
  EXPECT_EQ(b.emotion, 0.0);
  EXPECT_EQ(b.originality, 0.0);
  EXPECT_EQ(b.memorability, 0.0);
  EXPECT_EQ(b.uniqueness, uniqueness(img, ref));
  EXPECT_TRUE(b.missing[0] && b.missing[1] && b.missing[2]);
  EXPECT_FALSE(b.missing[3]);
  EXPECT_EQ(b.to_vector().size(), 4u);
  EXPECT_EQ(fuzzy_names().size(), 4u);
}

TEST(FuzzyBlock, ModelsReadTheirRegisteredSlice) {
  const FeatureMatrix m = toy_matrix(40, 12);
  std::vector<double> y;
  for (std::size_t i = 0; i < m.rows(); ++i) y.push_back(m.at(i, 1));
  const AuxModel reg = train_aux(m, y, AuxKind::regressor, 3);
  const AuxModel cls = train_aux(m, separable_labels(m), AuxKind::classifier, 3);
  const NamedFeatures feats{{"a.x1", m.at(5, 0)}, {"a.x2", m.at(5, 1)}, {"other.z", 99.0}};
  const RasterImage img = synth::noise_image(32, 32, 1);
  const FuzzyBlock b = fuzzy_block(feats, {&cls, &reg, &reg}, img, nullptr);
  EXPECT_EQ(b.emotion, cls.training_predictions[5]);
  EXPECT_EQ(b.originality, reg.training_predictions[5]);
  EXPECT_EQ(b.memorability, b.originality);
  EXPECT_TRUE(b.missing[3]);
  EXPECT_EQ(b.uniqueness, 0.0);
  const FuzzyBlock again = fuzzy_block(feats, {&cls, &reg, &reg}, img, nullptr);
  EXPECT_EQ(again.to_vector(), b.to_vector());
  EXPECT_THROW(fuzzy_block({{"a.x1", 0.0}}, {&cls, nullptr, nullptr}, img, nullptr), Error);
}

// ------------------------------------------------------------ serialization

TEST(Serialize, SvmJsonRoundTrip) {
  const FeatureMatrix m = toy_matrix(30, 21);
  std::vector<int> y;
  for (double v : separable_labels(m)) y.push_back(static_cast<int>(v));
  const SvmModel model = svm_train(m, y, {KernelType::rbf, 0.5}, 2.0);
  const SvmModel back = svm_from_json(Json::parse(to_json(model).dump()));
  EXPECT_EQ(back.support_vectors, model.support_vectors);
  EXPECT_EQ(back.dual_coef, model.dual_coef);
  EXPECT_EQ(back.bias, model.bias);
  for (std::size_t i = 0; i < m.rows(); ++i) EXPECT_EQ(back.decision(m.row(i)), model.decision(m.row(i)));
}

TEST(Serialize, LassoPathRoundTrip) {
  FeatureMatrix m = toy_matrix(25, 22);
  std::vector<double> y;
  for (std::size_t i = 0; i < m.rows(); ++i) y.push_back(2.0 * m.at(i, 0) - m.at(i, 1));
  const LassoPath p = lasso_path(m, y);
  std::stringstream ss;
  save_lasso_path(p, ss);
  const LassoPath back = load_lasso_path(ss);
  EXPECT_EQ(back.lambdas, p.lambdas);
  EXPECT_EQ(back.coefficients, p.coefficients);
  EXPECT_EQ(back.intercepts, p.intercepts);
  EXPECT_EQ(back.entry_step, p.entry_step);
  EXPECT_EQ(back.entry_order, p.entry_order);
  std::stringstream bad("pae-lasso-path 1\nfeatures 2 steps 3\nstep 0 lambda x\n");
  EXPECT_THROW(load_lasso_path(bad), Error);
}
