#pragma once

// Writes a synthetic portrait corpus to disk: PNG images, annotation
// sidecars and a manifest. Each image carries three latents (eye sharpness,
// face/background brightness contrast, exposure balance) and its score is a
// fixed noiseless linear function of them, mapped into [1, 10].

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "face_synth.hpp"
#include "pae/codec.hpp"
#include "pae/dataset.hpp"
#include "pae/random.hpp"

namespace synth {

struct Latents {
  double sharpness = 0.0;  // in [0, 1]; sets the eye blur, see eye_blur_for
  double contrast = 0.0;   // face/background level ratio, normalized to [0, 1]
  double exposure = 0.0;   // 1 - |offset| / 0.1, in [0, 1]
};

// The eyes are a 2 px checker (period 4); a gaussian of sigma s scales its
// fundamental by exp(-pi^2 s^2 / 8). The blur is chosen so that this factor
// runs linearly from 0.1 (sharpness 0) to 1 (sharpness 1).
inline double eye_blur_for(double sharpness) {
  const double amplitude = 0.1 + 0.9 * sharpness;
  return std::sqrt(-8.0 * std::log(amplitude)) / std::numbers::pi;
}
inline constexpr double kScoreWeights[3] = {0.7, 0.2, 0.1};

inline double latent_score(const Latents& l) {
  return 1.0 + 9.0 * (kScoreWeights[0] * l.sharpness + kScoreWeights[1] * l.contrast + kScoreWeights[2] * l.exposure);
}

struct CorpusSample {
  std::string id;
  FaceParams params;
  pae::FaceAnnotation annotation;
  Latents latents;
  double score = 0.0;
};

inline std::vector<CorpusSample> make_samples(std::size_t n, std::uint64_t seed, int size = 112) {
  pae::Rng rng(seed);
  std::vector<CorpusSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    CorpusSample s;
    char id[32];
    std::snprintf(id, sizeof id, "img%04zu", i);
    s.id = id;
    const double sharp = rng.uniform();
    const double blur = eye_blur_for(sharp);
    const double ratio = rng.uniform(1.2, 2.2);
    const double bg = rng.uniform(0.25, 0.4);
    const double offset = rng.uniform(-0.1, 0.1);
    s.params.width = s.params.height = size;
    s.params.seed = seed * 1000003u + i;
    s.params.right_eye_blur = blur;
    s.params.left_eye_blur = blur;
    s.params.background_level = bg;
    s.params.face_gain = ratio * bg / 0.62;
    s.params.exposure_offset = offset;
    s.latents = {sharp, (ratio - 1.2) / 1.0, 1.0 - std::abs(offset) / 0.1};
    s.score = latent_score(s.latents);

    s.annotation = face_annotation();
    s.annotation.yaw = rng.uniform(-20.0, 20.0);
    s.annotation.pitch = rng.uniform(-10.0, 10.0);
    s.annotation.age = rng.uniform(18.0, 70.0);
    s.annotation.gender = rng.uniform();
    s.annotation.smiling = rng.uniform();
    const double r0 = rng.uniform(), r1 = rng.uniform() * (1.0 - r0);
    s.annotation.race = {r0, r1, 1.0 - r0 - r1};
    out.push_back(std::move(s));
  }
  return out;
}

// Writes images/<id>.png, annotations/<id>.json and manifest.tsv under dir;
// returns the manifest path.
inline std::filesystem::path write_corpus(const std::filesystem::path& dir, const std::vector<CorpusSample>& samples) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "annotations");
  pae::Manifest m;
  for (const auto& s : samples) {
    const fs::path img = dir / "images" / (s.id + ".png");
    const fs::path ann = dir / "annotations" / (s.id + ".json");
    pae::write_png(img, face_scene(s.params, s.annotation));
    std::ofstream(ann) << pae::annotation_document({s.annotation});
    pae::ManifestEntry e;
    e.id = s.id;
    e.image = img;
    e.annotation = ann;
    e.mean_score = s.score;
    e.challenge_title = "Portrait Of The Day";
    m.entries.push_back(e);
  }
  const fs::path manifest = dir / "manifest.tsv";
  pae::save_manifest(m, manifest);
  return manifest;
}

}  // namespace synth
