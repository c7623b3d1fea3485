#pragma once

// Portrait features computed from an externally supplied face annotation:
// passthrough subject attributes, landmark statistics and sharpness, and
// face/background contrasts.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pae/error.hpp"
#include "pae/features/compositional.hpp"
#include "pae/features/lighting.hpp"
#include "pae/image.hpp"

namespace pae {

struct RelPoint {
  double x = 0.0, y = 0.0;
};

struct RelBox {
  double x = 0.0, y = 0.0, width = 0.0, height = 0.0;
  double area() const { return width * height; }
  bool contains(RelPoint p) const { return p.x >= x && p.x <= x + width && p.y >= y && p.y <= y + height; }
};

enum class Landmark { right_eye = 0, left_eye = 1, nose = 2, mouth = 3 };

inline constexpr std::array<Landmark, 4> kLandmarkOrder{Landmark::right_eye, Landmark::left_eye, Landmark::nose,
                                                        Landmark::mouth};

inline const char* landmark_name(Landmark l) {
  switch (l) {
    case Landmark::right_eye: return "right_eye";
    case Landmark::left_eye: return "left_eye";
    case Landmark::nose: return "nose";
    case Landmark::mouth: return "mouth";
  }
  return "";
}

struct FaceAnnotation {
  RelBox face_box;
  double yaw = 0.0, pitch = 0.0, roll = 0.0;  // degrees
  std::array<double, 3> race{};                // white, black, asian
  double age = 0.0;
  double gender = 0.0;                         // 1 = female
  std::array<RelPoint, 4> landmarks{};         // indexed by Landmark
  double smiling = 0.0;
  std::array<double, 3> glasses{};             // none, normal, sunglasses
  bool landmarks_outside_box = false;          // flagged, not fatal

  RelPoint landmark(Landmark l) const { return landmarks[static_cast<std::size_t>(l)]; }
};

// ----------------------------------------------------------- sidecar parsing

namespace detail {

inline double ann_number(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_number())
    fail_data(std::string("annotation: missing or non-numeric '") + key + "'");
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) fail_data(std::string("annotation: non-finite '") + key + "'");
  return v;
}

inline const nlohmann::json& ann_object(const nlohmann::json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_object())
    fail_data(std::string("annotation: missing object '") + key + "'");
  return j.at(key);
}

inline void check_unit(double v, const char* what) {
  if (v < 0.0 || v > 1.0) fail_data(std::string("annotation: ") + what + " outside [0,1]");
}

inline void check_simplex(const std::array<double, 3>& a, const char* what) {
  for (double v : a) check_unit(v, what);
  if (std::abs(a[0] + a[1] + a[2] - 1.0) > 1e-6) fail_data(std::string("annotation: ") + what + " scores do not sum to 1");
}

inline FaceAnnotation parse_face(const nlohmann::json& f) {
  FaceAnnotation a;
  const auto& box = ann_object(f, "face_box");
  a.face_box = {ann_number(box, "x"), ann_number(box, "y"), ann_number(box, "width"), ann_number(box, "height")};
  check_unit(a.face_box.x, "face_box.x");
  check_unit(a.face_box.y, "face_box.y");
  check_unit(a.face_box.width, "face_box.width");
  check_unit(a.face_box.height, "face_box.height");
  if (!(a.face_box.width > 0.0) || !(a.face_box.height > 0.0)) fail_data("annotation: face_box is degenerate");
  if (a.face_box.x + a.face_box.width > 1.0 + 1e-9 || a.face_box.y + a.face_box.height > 1.0 + 1e-9)
    fail_data("annotation: face_box extends past the image");

  const auto& pose = ann_object(f, "pose");
  a.yaw = ann_number(pose, "yaw");
  a.pitch = ann_number(pose, "pitch");
  a.roll = ann_number(pose, "roll");

  const auto& race = ann_object(f, "race");
  a.race = {ann_number(race, "white"), ann_number(race, "black"), ann_number(race, "asian")};
  check_simplex(a.race, "race");
  a.age = ann_number(f, "age");
  if (a.age < 0.0) fail_data("annotation: negative age");
  a.gender = ann_number(f, "gender");
  check_unit(a.gender, "gender");

  const auto& lm = ann_object(f, "landmarks");
  for (Landmark l : kLandmarkOrder) {
    const auto& p = ann_object(lm, landmark_name(l));
    RelPoint pt{ann_number(p, "x"), ann_number(p, "y")};
    check_unit(pt.x, "landmark x");
    check_unit(pt.y, "landmark y");
    a.landmarks[static_cast<std::size_t>(l)] = pt;
    if (!a.face_box.contains(pt)) a.landmarks_outside_box = true;
  }
  a.smiling = ann_number(f, "smiling");
  check_unit(a.smiling, "smiling");
  const auto& g = ann_object(f, "glasses");
  a.glasses = {ann_number(g, "none"), ann_number(g, "normal"), ann_number(g, "sunglasses")};
  check_simplex(a.glasses, "glasses");
  return a;
}

}  // namespace detail

inline constexpr int kAnnotationSchemaVersion = 1;

// All faces of a sidecar document, in file order. Unknown fields are ignored.
inline std::vector<FaceAnnotation> parse_annotation(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail_data(std::string("annotation: ") + e.what());
  }
  if (!j.is_object()) fail_data("annotation: document is not an object");
  if (detail::ann_number(j, "schema_version") != kAnnotationSchemaVersion)
    fail_data("annotation: unsupported schema_version");
  if (!j.contains("faces") || !j.at("faces").is_array()) fail_data("annotation: missing 'faces' array");
  std::vector<FaceAnnotation> faces;
  for (const auto& f : j.at("faces")) faces.push_back(detail::parse_face(f));
  return faces;
}

inline std::vector<FaceAnnotation> load_annotation(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_data("cannot open annotation " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_annotation(ss.str());
  } catch (const Error& e) {
    fail_data(path.string() + ": " + e.what());
  }
}

// Largest relative area wins; ties keep the earlier face.
inline const FaceAnnotation& largest_face(const std::vector<FaceAnnotation>& faces) {
  if (faces.empty()) fail_data("annotation has no faces");
  std::size_t best = 0;
  for (std::size_t i = 1; i < faces.size(); ++i)
    if (faces[i].face_box.area() > faces[best].face_box.area()) best = i;
  return faces[best];
}

inline nlohmann::json to_json(const FaceAnnotation& a) {
  nlohmann::json lm = nlohmann::json::object();
  for (Landmark l : kLandmarkOrder) lm[landmark_name(l)] = {{"x", a.landmark(l).x}, {"y", a.landmark(l).y}};
  return {{"face_box", {{"x", a.face_box.x}, {"y", a.face_box.y}, {"width", a.face_box.width}, {"height", a.face_box.height}}},
          {"pose", {{"yaw", a.yaw}, {"pitch", a.pitch}, {"roll", a.roll}}},
          {"race", {{"white", a.race[0]}, {"black", a.race[1]}, {"asian", a.race[2]}}},
          {"age", a.age},
          {"gender", a.gender},
          {"landmarks", lm},
          {"smiling", a.smiling},
          {"glasses", {{"none", a.glasses[0]}, {"normal", a.glasses[1]}, {"sunglasses", a.glasses[2]}}}};
}

inline std::string annotation_document(const std::vector<FaceAnnotation>& faces) {
  nlohmann::json j = {{"schema_version", kAnnotationSchemaVersion}, {"faces", nlohmann::json::array()}};
  for (const auto& f : faces) j["faces"].push_back(to_json(f));
  return j.dump(1) + "\n";
}

// ------------------------------------------------------------------ regions

struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool empty() const { return x1 <= x0 || y1 <= y0; }
  bool operator==(const PixelRect&) const = default;
};

inline constexpr double kLandmarkRegionShare = 0.2;

// Square of side max(1, round(0.2 * face diagonal in pixels)) centred on the
// landmark, clipped to the image.
inline PixelRect landmark_region(const FaceAnnotation& a, Landmark which, int width, int height) {
  const double fw = a.face_box.width * width, fh = a.face_box.height * height;
  const int side = std::max(1, static_cast<int>(std::lround(kLandmarkRegionShare * std::hypot(fw, fh))));
  const RelPoint p = a.landmark(which);
  const int cx = static_cast<int>(std::lround(p.x * width));
  const int cy = static_cast<int>(std::lround(p.y * height));
  PixelRect r{cx - side / 2, cy - side / 2, cx - side / 2 + side, cy - side / 2 + side};
  r.x0 = std::clamp(r.x0, 0, width);
  r.x1 = std::clamp(r.x1, 0, width);
  r.y0 = std::clamp(r.y0, 0, height);
  r.y1 = std::clamp(r.y1, 0, height);
  if (r.empty()) fail_data(std::string("landmark region for ") + landmark_name(which) + " is empty after clipping");
  return r;
}

// floor of the near edge, ceil of the far edge, clipped.
inline PixelRect face_rect(const FaceAnnotation& a, int width, int height) {
  PixelRect r{static_cast<int>(std::floor(a.face_box.x * width)), static_cast<int>(std::floor(a.face_box.y * height)),
              static_cast<int>(std::ceil((a.face_box.x + a.face_box.width) * width)),
              static_cast<int>(std::ceil((a.face_box.y + a.face_box.height) * height))};
  r.x0 = std::clamp(r.x0, 0, width);
  r.x1 = std::clamp(r.x1, 0, width);
  r.y0 = std::clamp(r.y0, 0, height);
  r.y1 = std::clamp(r.y1, 0, height);
  if (r.empty()) fail_data("face box is empty in pixel coordinates");
  return r;
}

inline double region_mean(const Plane& p, const PixelRect& r) {
  double s = 0.0;
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x) s += p.at(x, y);
  return s / (static_cast<double>(r.width()) * r.height());
}

// ----------------------------------------------------------------- features

inline std::array<double, 4> landmark_sharpness(const Plane& grad_mag, const FaceAnnotation& a) {
  std::array<double, 4> out{};
  for (std::size_t i = 0; i < 4; ++i)
    out[i] = region_mean(grad_mag, landmark_region(a, kLandmarkOrder[i], grad_mag.width, grad_mag.height));
  return out;
}

inline std::array<double, 4> landmark_sharpness(const RasterImage& img, const FaceAnnotation& a) {
  return landmark_sharpness(sobel_magnitude(luminance(img)), a);
}

// Hue/brightness pairs per landmark, then the four saturations.
inline std::array<double, 12> landmark_stats(const HsvPlanes& hsv, const FaceAnnotation& a) {
  std::array<double, 12> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    const PixelRect r = landmark_region(a, kLandmarkOrder[i], hsv.h.width, hsv.h.height);
    const HsvMeans m = hsv_means(hsv, r.x0, r.y0, r.x1, r.y1);
    out[2 * i] = m.h;
    out[2 * i + 1] = m.v;
    out[8 + i] = m.s;
  }
  return out;
}

inline std::array<double, 12> landmark_stats(const RasterImage& img, const FaceAnnotation& a) {
  return landmark_stats(rgb_to_hsv(img), a);
}

inline constexpr double kRatioFloor = 1e-6;

// mean over F / mean over B; a zero numerator gives 0 even when B is also 0.
inline double face_background_ratio(const Plane& p, const PixelRect& face) {
  double fs = 0.0, bs = 0.0;
  std::size_t fn = 0, bn = 0;
  for (int y = 0; y < p.height; ++y)
    for (int x = 0; x < p.width; ++x) {
      const bool in = x >= face.x0 && x < face.x1 && y >= face.y0 && y < face.y1;
      (in ? fs : bs) += p.at(x, y);
      ++(in ? fn : bn);
    }
  const double fm = fs / static_cast<double>(fn), bm = bs / static_cast<double>(bn);
  if (fm == 0.0) return 0.0;
  return fm / std::max(bm, kRatioFloor);
}

struct FaceBackgroundContrasts {
  double lighting = 0.0, sharpness = 0.0, brightness = 0.0;
};

inline FaceBackgroundContrasts face_background_contrasts(const RasterImage& img, const FaceAnnotation& a) {
  validate(img);
  const PixelRect face = face_rect(a, img.width, img.height);
  if (face.width() == img.width && face.height() == img.height)
    fail_data("face box covers the whole image; background is empty");
  const HsvPlanes hsv = rgb_to_hsv(img);
  return {face_background_ratio(estimate_illuminance(img), face),
          face_background_ratio(sobel_magnitude(luminance(img)), face), face_background_ratio(hsv.v, face)};
}

struct PortraitBlock {
  std::array<double, 4> face_position{};
  std::array<double, 3> face_orientation{};
  std::array<double, 6> demographics{};  // race x3, age, gender, reserved 0
  std::array<double, 8> landmark_coords{};
  double smiling = 0.0;
  std::array<double, 3> glasses{};
  std::array<double, 12> landmark_stats{};
  std::array<double, 4> landmark_sharpness{};
  std::array<double, 3> fb_contrasts{};  // lighting, sharpness, brightness

  std::vector<double> to_vector() const {
    std::vector<double> v;
    v.reserve(44);
    auto add = [&](const auto& a) { v.insert(v.end(), a.begin(), a.end()); };
    add(face_position);
    add(face_orientation);
    add(demographics);
    add(landmark_coords);
    v.push_back(smiling);
    add(glasses);
    add(landmark_stats);
    add(landmark_sharpness);
    add(fb_contrasts);
    return v;
  }
};

inline std::vector<std::string> portrait_names() {
  std::vector<std::string> n{"face_x",     "face_y",     "face_width", "face_height", "yaw",
                             "pitch",      "roll",       "race_white", "race_black",  "race_asian",
                             "age",        "gender",     "demographics_reserved"};
  for (Landmark l : kLandmarkOrder) {
    n.push_back(std::string(landmark_name(l)) + "_x");
    n.push_back(std::string(landmark_name(l)) + "_y");
  }
  n.insert(n.end(), {"smiling", "glasses_none", "glasses_normal", "glasses_sunglasses"});
  for (Landmark l : kLandmarkOrder) {
    n.push_back(std::string(landmark_name(l)) + "_hue");
    n.push_back(std::string(landmark_name(l)) + "_brightness");
  }
  for (Landmark l : kLandmarkOrder) n.push_back(std::string(landmark_name(l)) + "_saturation");
  for (Landmark l : kLandmarkOrder) n.push_back(std::string(landmark_name(l)) + "_sharpness");
  n.insert(n.end(), {"lighting_contrast", "sharpness_contrast", "brightness_contrast"});
  return n;
}

inline PortraitBlock portrait_block(const RasterImage& img, const FaceAnnotation& a) {
  validate(img);
  PortraitBlock b;
  b.face_position = {a.face_box.x, a.face_box.y, a.face_box.width, a.face_box.height};
  b.face_orientation = {a.yaw, a.pitch, a.roll};
  b.demographics = {a.race[0], a.race[1], a.race[2], a.age, a.gender, 0.0};
  for (std::size_t i = 0; i < 4; ++i) {
    b.landmark_coords[2 * i] = a.landmark(kLandmarkOrder[i]).x;
    b.landmark_coords[2 * i + 1] = a.landmark(kLandmarkOrder[i]).y;
  }
  b.smiling = a.smiling;
  b.glasses = a.glasses;
  const HsvPlanes hsv = rgb_to_hsv(img);
  b.landmark_stats = landmark_stats(hsv, a);
  b.landmark_sharpness = landmark_sharpness(img, a);
  const FaceBackgroundContrasts c = face_background_contrasts(img, a);
  b.fb_contrasts = {c.lighting, c.sharpness, c.brightness};
  return b;
}

}  // namespace pae
