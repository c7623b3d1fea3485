#pragma once

// Basic quality metrics: noise, contrast and exposure balance, JPEG
// blockiness, and manipulation evidence (splicing, median filtering).

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "pae/error.hpp"
#include "pae/features/aux_model.hpp"
#include "pae/image.hpp"
#include "pae/random.hpp"

namespace pae {

// -------------------------------------------------------------------- noise

struct NlmParams {
  int patch_radius = 3;   // 7x7
  int search_radius = 10; // 21x21
  double h = 0.1;
  int max_side = 256;
};

// Non-local means on a plane. Patch distance is the mean squared difference
// over the patch, weights exp(-d^2/h^2); the centre pixel takes the largest
// weight seen among its neighbours. Patch sums come from one integral image
// per search offset. Neighbour values are accumulated relative to the centre
// so flat regions are reproduced exactly.
inline Plane nl_means(const Plane& p, const NlmParams& prm = {}) {
  const int w = p.width, h = p.height;
  const int pr = prm.patch_radius, sr = prm.search_radius, pad = pr + sr;
  const int pw = w + 2 * pad, ph = h + 2 * pad;
  std::vector<double> padded(static_cast<std::size_t>(pw) * ph);
  for (int y = 0; y < ph; ++y)
    for (int x = 0; x < pw; ++x) padded[static_cast<std::size_t>(y) * pw + x] = p.clamped(x - pad, y - pad);
  auto P = [&](int x, int y) { return padded[static_cast<std::size_t>(y + pad) * pw + (x + pad)]; };

  const std::size_t n = p.size();
  std::vector<double> wsum(n, 0.0), vsum(n, 0.0), wmax(n, 0.0);
  // Squared differences over the patch support [-pr, w+pr) x [-pr, h+pr).
  const int dw = w + 2 * pr, dh = h + 2 * pr;
  std::vector<double> integral(static_cast<std::size_t>(dw + 1) * (dh + 1));
  const double inv_area = 1.0 / ((2 * pr + 1) * (2 * pr + 1));
  const double inv_h2 = 1.0 / (prm.h * prm.h);
  for (int oy = -sr; oy <= sr; ++oy)
    for (int ox = -sr; ox <= sr; ++ox) {
      if (ox == 0 && oy == 0) continue;
      for (int y = 0; y < dh; ++y) {
        double row = 0.0;
        for (int x = 0; x < dw; ++x) {
          const double d = P(x - pr, y - pr) - P(x - pr + ox, y - pr + oy);
          row += d * d;
          integral[static_cast<std::size_t>(y + 1) * (dw + 1) + x + 1] =
              integral[static_cast<std::size_t>(y) * (dw + 1) + x + 1] + row;
        }
      }
      auto I = [&](int x, int y) { return integral[static_cast<std::size_t>(y) * (dw + 1) + x]; };
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          // Patch of (x, y) covers d-coordinates [x, x + 2pr] x [y, y + 2pr].
          const int x1 = x + 2 * pr + 1, y1 = y + 2 * pr + 1;
          const double d2 = (I(x1, y1) - I(x, y1) - I(x1, y) + I(x, y)) * inv_area;
          const double wt = std::exp(-std::max(d2, 0.0) * inv_h2);
          const std::size_t i = static_cast<std::size_t>(y) * w + x;
          wsum[i] += wt;
          vsum[i] += wt * (P(x + ox, y + oy) - P(x, y));
          wmax[i] = std::max(wmax[i], wt);
        }
    }
  Plane out(w, h);
  for (std::size_t i = 0; i < n; ++i) {
    const double self = wmax[i] > 0.0 ? wmax[i] : 1.0;
    out.values[i] = p.values[i] + vsum[i] / (wsum[i] + self);
  }
  return out;
}

inline double noise_estimate(const RasterImage& img) {
  validate(img);
  const NlmParams prm;
  const Plane y = fit_within(luminance(img), prm.max_side);
  return rms_distance(y, nl_means(y, prm));
}

// ----------------------------------------------------------- contrast/exposure

inline double contrast_quality(const RasterImage& img) {
  const Plane y = luminance(img);
  return -rms_distance(y, equalize_contrast(y));
}

// Count-weighted population skewness of the 256-bin histogram at bin centres.
inline double histogram_skewness(const Histogram256& h) {
  if (h.total == 0) return 0.0;
  const double n = static_cast<double>(h.total);
  double mu = 0.0;
  for (int b = 0; b < 256; ++b) mu += h.bins[b] * ((b + 0.5) / 256.0);
  mu /= n;
  double m2 = 0.0, m3 = 0.0;
  for (int b = 0; b < 256; ++b) {
    const double d = (b + 0.5) / 256.0 - mu;
    m2 += h.bins[b] * d * d;
    m3 += h.bins[b] * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  if (m2 < 1e-12) return 0.0;
  return m3 / std::pow(m2, 1.5);
}

inline double exposure_quality(const RasterImage& img) {
  return -std::abs(histogram_skewness(histogram256(luminance(img))));
}

// --------------------------------------------------------------------- jpeg

struct BlockinessTerms {
  double B = 0.0;  // mean |difference| across 8-px block boundaries
  double A = 0.0;  // activity: mean |difference| with the boundary share removed
  double Z = 0.0;  // zero-crossing rate of the difference signal
};

// Horizontal and vertical terms averaged; values on the 0..255 scale.
inline BlockinessTerms blockiness_terms(const Plane& y) {
  const int w = y.width, h = y.height;
  auto terms = [](int len, int lines, auto&& sample) {
    BlockinessTerms t;
    if (len < 16 || lines < 1) return t;
    double bsum = 0.0, asum = 0.0, zsum = 0.0;
    long bcount = 0;
    for (int l = 0; l < lines; ++l) {
      std::vector<double> d(len - 1);
      for (int i = 0; i + 1 < len; ++i) d[i] = 255.0 * (sample(l, i + 1) - sample(l, i));
      for (int i = 0; i + 1 < len; ++i) asum += std::abs(d[i]);
      for (int k = 1; 8 * k < 8 * (len / 8); ++k) {
        bsum += std::abs(d[8 * k - 1]);
        ++bcount;
      }
      for (int i = 0; i + 2 < len; ++i) zsum += (d[i] * d[i + 1] < 0.0) ? 1.0 : 0.0;
    }
    t.B = bcount > 0 ? bsum / bcount : 0.0;
    t.A = (8.0 * asum / (static_cast<double>(lines) * (len - 1)) - t.B) / 7.0;
    t.Z = zsum / (static_cast<double>(lines) * (len - 2));
    return t;
  };
  const BlockinessTerms hz = terms(w, h, [&](int l, int i) { return y.at(i, l); });
  const BlockinessTerms vt = terms(h, w, [&](int l, int i) { return y.at(l, i); });
  return {(hz.B + vt.B) / 2.0, (hz.A + vt.A) / 2.0, (hz.Z + vt.Z) / 2.0};
}

inline constexpr double kJpegAlpha = -245.9;
inline constexpr double kJpegBeta = 261.9;
inline constexpr double kJpegGamma1 = -0.0240;
inline constexpr double kJpegGamma2 = 0.0160;
inline constexpr double kJpegGamma3 = 0.0646;

// S = alpha + beta B^g1 A^g2 Z^g3; returns 0 when any term is non-positive.
inline double jpeg_quality_score(const BlockinessTerms& t) {
  if (!(t.B > 0.0) || !(t.A > 0.0) || !(t.Z > 0.0)) return 0.0;
  return kJpegAlpha + kJpegBeta * std::pow(t.B, kJpegGamma1) * std::pow(t.A, kJpegGamma2) * std::pow(t.Z, kJpegGamma3);
}

inline double jpeg_quality(const RasterImage& img) { return jpeg_quality_score(blockiness_terms(luminance(img))); }

// --------------------------------------------------------------------- spam

inline constexpr int kSpamT = 3;
inline constexpr int kSpamStates = 2 * kSpamT + 1;               // 7
inline constexpr int kSpamFamily = kSpamStates * kSpamStates * kSpamStates;  // 343
inline constexpr int kSpamDim = 2 * kSpamFamily;                 // 686

struct SpamFeatures {
  std::vector<double> values;  // horizontal family then vertical family
};

// Index of P(d3 | d1, d2): ((d1+T)*7 + (d2+T))*7 + (d3+T).
inline int spam_index(int d1, int d2, int d3) {
  return ((d1 + kSpamT) * kSpamStates + (d2 + kSpamT)) * kSpamStates + (d3 + kSpamT);
}

// Joint counts of truncated-difference triples along one direction.
// Step (dx, dy): D(p) = I(p) - I(p + step), triples (D(p), D(p+step), D(p+2 step)).
inline void spam_count(const std::vector<int>& q, int w, int h, int dx, int dy, std::vector<double>& counts) {
  auto at = [&](int x, int y) { return q[static_cast<std::size_t>(y) * w + x]; };
  auto diff = [&](int x, int y) { return std::clamp(at(x, y) - at(x + dx, y + dy), -kSpamT, kSpamT); };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int x3 = x + 3 * dx, y3 = y + 3 * dy;
      if (x3 < 0 || x3 >= w || y3 < 0 || y3 >= h) continue;
      counts[spam_index(diff(x, y), diff(x + dx, y + dy), diff(x + 2 * dx, y + 2 * dy))] += 1.0;
    }
}

// Rows (fixed d1, d2) normalized to conditional distributions; empty rows stay 0.
inline void normalize_conditional(std::span<double> family) {
  for (int row = 0; row < kSpamStates * kSpamStates; ++row) {
    double s = 0.0;
    for (int k = 0; k < kSpamStates; ++k) s += family[row * kSpamStates + k];
    if (s > 0.0)
      for (int k = 0; k < kSpamStates; ++k) family[row * kSpamStates + k] /= s;
  }
}

// Second-order SPAM on 8-bit luminance. Horizontal family pools the
// left-to-right and right-to-left chains, vertical pools down and up.
inline SpamFeatures spam_features(const RasterImage& img) {
  const Plane y = luminance(img);
  const auto bytes = quantize8(y);
  const std::vector<int> q(bytes.begin(), bytes.end());
  SpamFeatures f;
  f.values.assign(kSpamDim, 0.0);
  std::vector<double> hcount(kSpamFamily, 0.0), vcount(kSpamFamily, 0.0);
  spam_count(q, y.width, y.height, 1, 0, hcount);
  spam_count(q, y.width, y.height, -1, 0, hcount);
  spam_count(q, y.width, y.height, 0, 1, vcount);
  spam_count(q, y.width, y.height, 0, -1, vcount);
  std::copy(hcount.begin(), hcount.end(), f.values.begin());
  std::copy(vcount.begin(), vcount.end(), f.values.begin() + kSpamFamily);
  normalize_conditional(std::span<double>(f.values).subspan(0, kSpamFamily));
  normalize_conditional(std::span<double>(f.values).subspan(kSpamFamily, kSpamFamily));
  return f;
}

inline std::vector<std::string> spam_names() {
  std::vector<std::string> n;
  for (int i = 0; i < kSpamDim; ++i) {
    std::string s = std::to_string(i);
    n.push_back("spam_" + std::string(3 - std::min<std::size_t>(3, s.size()), '0') + s);
  }
  return n;
}

// ------------------------------------------------------------------ splicing

inline double splicing_score(const SpamFeatures& f, const AuxModel& model) {
  if (model.kind != AuxKind::classifier) fail_data("splicing model must be a classifier");
  return model.predict(f.values);
}

inline double splicing_score(const RasterImage& img, const AuxModel& model) {
  return splicing_score(spam_features(img), model);
}

// Pastes a random rectangle of `donor` into a copy of `host`. Rectangle sides
// are 25-50% of the host's, placed uniformly; the donor patch is taken from
// a random position after nearest resampling to the host size.
inline RasterImage splice(const RasterImage& host, const RasterImage& donor, Rng& rng) {
  RasterImage out = host;
  const int rw = std::max(1, static_cast<int>(host.width * rng.uniform(0.25, 0.5)));
  const int rh = std::max(1, static_cast<int>(host.height * rng.uniform(0.25, 0.5)));
  const int x0 = static_cast<int>(rng.index(static_cast<std::uint64_t>(host.width - rw + 1)));
  const int y0 = static_cast<int>(rng.index(static_cast<std::uint64_t>(host.height - rh + 1)));
  const int sx = static_cast<int>(rng.index(static_cast<std::uint64_t>(host.width - rw + 1)));
  const int sy = static_cast<int>(rng.index(static_cast<std::uint64_t>(host.height - rh + 1)));
  for (int y = 0; y < rh; ++y)
    for (int x = 0; x < rw; ++x) {
      const int dx = std::min(donor.width - 1, (sx + x) * donor.width / host.width);
      const int dy = std::min(donor.height - 1, (sy + y) * donor.height / host.height);
      const double* s = donor.pixel(dx, dy);
      out.set(x0 + x, y0 + y, s[0], s[1], s[2]);
    }
  return out;
}

struct SplicingCorpus {
  FeatureMatrix features;  // SPAM rows
  std::vector<double> labels;  // +1 spliced, -1 pristine
};

// Every corpus image contributes itself (pristine) and one splice with a
// randomly chosen other image as donor.
inline SplicingCorpus make_splicing_corpus(const std::vector<RasterImage>& images, std::uint64_t seed) {
  if (images.size() < 2) fail_data("splicing corpus needs at least two images");
  Rng rng(seed);
  SplicingCorpus c;
  c.features = FeatureMatrix(0, spam_names());
  auto add = [&](const RasterImage& img, double label, std::string id) {
    const SpamFeatures f = spam_features(img);
    c.features.ids.push_back(std::move(id));
    c.features.values.insert(c.features.values.end(), f.values.begin(), f.values.end());
    c.labels.push_back(label);
  };
  for (std::size_t i = 0; i < images.size(); ++i) {
    std::size_t j = static_cast<std::size_t>(rng.index(images.size() - 1));
    if (j >= i) ++j;
    add(images[i], -1.0, "pristine_" + std::to_string(i));
    add(splice(images[i], images[j], rng), 1.0, "spliced_" + std::to_string(i));
  }
  return c;
}

inline AuxModel train_splicing_model(const std::vector<RasterImage>& images, std::uint64_t seed) {
  const SplicingCorpus c = make_splicing_corpus(images, seed);
  return train_aux(c.features, c.labels, AuxKind::classifier, seed);
}

// ----------------------------------------------------------- median filtering

inline double median_filtering_score(const RasterImage& img) {
  const Plane y = luminance(img);
  const Plane m = median3(y);
  std::size_t fixed = 0;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (std::abs(m.values[i] - y.values[i]) < 1.0 / 255.0) ++fixed;
  return static_cast<double>(fixed) / static_cast<double>(y.size());
}

// ----------------------------------------------------------------- assembly

struct QualityBlock {
  double noise = 0.0;
  double contrast_quality = 0.0;
  double exposure_quality = 0.0;
  double jpeg_quality = 0.0;
  double splicing = 0.0;
  double median_filtering = 0.0;

  std::vector<double> to_vector() const {
    return {noise, contrast_quality, exposure_quality, jpeg_quality, splicing, median_filtering};
  }
};

inline std::vector<std::string> quality_names() {
  return {"noise", "contrast_quality", "exposure_quality", "jpeg_quality", "splicing", "median_filtering"};
}

// Without a splicing model the splicing entry stays 0; callers flag it.
inline QualityBlock quality_block(const RasterImage& img, const AuxModel* splicing) {
  validate(img);
  QualityBlock q;
  q.noise = noise_estimate(img);
  q.contrast_quality = contrast_quality(img);
  q.exposure_quality = exposure_quality(img);
  q.jpeg_quality = jpeg_quality(img);
  if (splicing) q.splicing = splicing_score(img, *splicing);
  q.median_filtering = median_filtering_score(img);
  return q;
}

}  // namespace pae
