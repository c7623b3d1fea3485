#pragma once

// Fuzzy properties: spectral uniqueness against a corpus-average amplitude
// spectrum, plus emotion / originality / memorability from auxiliary models.

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "pae/error.hpp"
#include "pae/features/aux_model.hpp"
#include "pae/fft.hpp"
#include "pae/format.hpp"
#include "pae/image.hpp"

namespace pae {

inline constexpr int kSpectrumSize = 128;

struct SpectrumReference {
  int size = kSpectrumSize;
  Plane mean_amplitude;
  std::size_t count = 0;
};

inline Plane image_spectrum(const RasterImage& img) {
  validate(img);
  return fft_amplitude(luminance(img), kSpectrumSize);
}

// Running sum so corpora never need to be held in memory.
class SpectrumAccumulator {
 public:
  void add(const Plane& spectrum) {
    if (spectrum.width != kSpectrumSize || spectrum.height != kSpectrumSize) fail_data("spectrum has the wrong size");
    if (sum_.empty()) sum_.assign(spectrum.size(), 0.0);
    for (std::size_t i = 0; i < sum_.size(); ++i) sum_[i] += spectrum.values[i];
    ++count_;
  }
  void add(const RasterImage& img) { add(image_spectrum(img)); }

  std::size_t count() const { return count_; }

  SpectrumReference finish() const {
    if (count_ == 0) fail_data("spectrum reference needs at least one image");
    SpectrumReference ref;
    ref.count = count_;
    ref.mean_amplitude = Plane(kSpectrumSize, kSpectrumSize);
    for (std::size_t i = 0; i < sum_.size(); ++i) ref.mean_amplitude.values[i] = sum_[i] / static_cast<double>(count_);
    return ref;
  }

 private:
  std::vector<double> sum_;
  std::size_t count_ = 0;
};

inline SpectrumReference build_spectrum_reference(const std::vector<RasterImage>& corpus) {
  SpectrumAccumulator acc;
  for (const auto& img : corpus) acc.add(img);
  return acc.finish();
}

inline double uniqueness(const Plane& spectrum, const SpectrumReference& ref) {
  if (spectrum.size() != ref.mean_amplitude.size()) fail_data("spectrum size does not match the reference");
  double s = 0.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double d = spectrum.values[i] - ref.mean_amplitude.values[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double uniqueness(const RasterImage& img, const SpectrumReference& ref) {
  return uniqueness(image_spectrum(img), ref);
}

inline void save_spectrum_reference(const SpectrumReference& ref, std::ostream& out) {
  out << "pae-spectrum-reference 1\nsize " << ref.size << " count " << ref.count << "\n";
  for (int y = 0; y < ref.size; ++y) {
    for (int x = 0; x < ref.size; ++x) out << (x ? " " : "") << format_double(ref.mean_amplitude.at(x, y));
    out << "\n";
  }
  if (!out) fail_data("failed to write spectrum reference");
}

inline void save_spectrum_reference(const SpectrumReference& ref, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) fail_data("cannot write " + path.string());
  save_spectrum_reference(ref, out);
}

inline SpectrumReference load_spectrum_reference(std::istream& in) {
  std::string magic, size_kw, count_kw;
  int version = 0;
  SpectrumReference ref;
  if (!(in >> magic >> version) || magic != "pae-spectrum-reference" || version != 1)
    fail_data("not a spectrum reference file");
  if (!(in >> size_kw >> ref.size >> count_kw >> ref.count) || size_kw != "size" || count_kw != "count" ||
      ref.size != kSpectrumSize || ref.count < 1)
    fail_data("malformed spectrum reference header");
  ref.mean_amplitude = Plane(ref.size, ref.size);
  std::string tok;
  for (double& v : ref.mean_amplitude.values) {
    if (!(in >> tok)) fail_data("spectrum reference is truncated");
    v = parse_double(tok);
    if (!(v >= 0.0)) fail_data("spectrum reference has a negative entry");
  }
  return ref;
}

inline SpectrumReference load_spectrum_reference(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail_data("cannot open " + path.string());
  return load_spectrum_reference(in);
}

// ------------------------------------------------------------------- block

struct FuzzyModels {
  const AuxModel* emotion = nullptr;
  const AuxModel* originality = nullptr;
  const AuxModel* memorability = nullptr;
};

struct FuzzyBlock {
  double emotion = 0.0, originality = 0.0, memorability = 0.0, uniqueness = 0.0;
  // Set when the corresponding input was absent and the value defaulted to 0.
  std::array<bool, 4> missing{};

  std::vector<double> to_vector() const { return {emotion, originality, memorability, uniqueness}; }
};

inline std::vector<std::string> fuzzy_names() { return {"emotion", "originality", "memorability", "uniqueness"}; }

// Feature values by registry name ("group.name"), used to feed aux models.
using NamedFeatures = std::unordered_map<std::string, double>;

inline std::vector<double> gather_inputs(const AuxModel& m, const NamedFeatures& feats) {
  std::vector<double> x;
  x.reserve(m.dim());
  for (const auto& name : m.registry) {
    const auto it = feats.find(name);
    if (it == feats.end()) fail_config("aux model input '" + name + "' is not among the extracted features");
    x.push_back(it->second);
  }
  return x;
}

inline FuzzyBlock fuzzy_block(const NamedFeatures& feats, const FuzzyModels& models, const Plane& spectrum,
                              const SpectrumReference* ref) {
  FuzzyBlock b;
  const std::array<const AuxModel*, 3> ms{models.emotion, models.originality, models.memorability};
  const std::array<double*, 3> outs{&b.emotion, &b.originality, &b.memorability};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!ms[i]) {
      b.missing[i] = true;
      continue;
    }
    *outs[i] = ms[i]->predict(gather_inputs(*ms[i], feats));
  }
  if (ref) b.uniqueness = uniqueness(spectrum, *ref);
  else b.missing[3] = true;
  return b;
}

inline FuzzyBlock fuzzy_block(const NamedFeatures& feats, const FuzzyModels& models, const RasterImage& img,
                              const SpectrumReference* ref) {
  return fuzzy_block(feats, models, image_spectrum(img), ref);
}

}  // namespace pae
