#include <gtest/gtest.h>

#include <cmath>

#include "pae/fft.hpp"
#include "pae/image.hpp"
#include "support/oracles.hpp"
#include "support/synth.hpp"

using namespace pae;

TEST(Luminance, CoefficientDefinition) {
  EXPECT_DOUBLE_EQ(luminance(synth::constant(1, 1, 1, 1, 1)).values[0], 1.0);
  EXPECT_DOUBLE_EQ(luminance(synth::constant(1, 1, 0, 1, 0)).values[0], 0.587);
}

TEST(Luminance, MatchesScalarLoop) {
  const RasterImage img = synth::noise_image(17, 13, 3);
  const Plane y = luminance(img);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double expect = 0.299 * img.rgb[3 * i] + 0.587 * img.rgb[3 * i + 1] + 0.114 * img.rgb[3 * i + 2];
    EXPECT_NEAR(y.values[i], expect, 1e-6);
  }
}

TEST(Hsv, Hexcone) {
  auto red = rgb_to_hsv(1, 0, 0);
  EXPECT_DOUBLE_EQ(red.h, 0.0);
  EXPECT_DOUBLE_EQ(red.s, 1.0);
  EXPECT_DOUBLE_EQ(red.v, 1.0);
  auto grey = rgb_to_hsv(0.5, 0.5, 0.5);
  EXPECT_DOUBLE_EQ(grey.h, 0.0);
  EXPECT_DOUBLE_EQ(grey.s, 0.0);
  EXPECT_DOUBLE_EQ(grey.v, 0.5);
  auto blue = rgb_to_hsv(0, 0, 1);
  EXPECT_NEAR(blue.h, 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(blue.s, 1.0);
  // magenta-ish red wraps into [0,1)
  auto m = rgb_to_hsv(1, 0, 0.5);
  EXPECT_GE(m.h, 0.0);
  EXPECT_LT(m.h, 1.0);
  EXPECT_NEAR(m.h, 1.0 - 0.5 / 6.0, 1e-12);
}

TEST(Convolve, IdentityIsExact) {
  const Plane p = synth::noise_plane(9, 7, 1);
  const Kernel id{3, 3, {0, 0, 0, 0, 1, 0, 0, 0, 0}};
  EXPECT_EQ(convolve(p, id), p);
}

TEST(Convolve, ConstantStaysConstant) {
  const Plane p(8, 8, 0.3);
  const Kernel k{3, 3, {1, 2, 1, 2, 4, 2, 1, 2, 1}};
  Kernel norm = k;
  for (double& w : norm.weights) w /= 16.0;
  for (double v : convolve(p, norm).values) EXPECT_NEAR(v, 0.3, 1e-15);
}

TEST(Convolve, BoxOnRampMatchesNestedLoop) {
  Plane ramp(5, 5);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 5; ++x) ramp.at(x, y) = x + 5 * y;
  Kernel box{3, 3, std::vector<double>(9, 1.0 / 9.0)};
  const auto expect = oracle::convolve(ramp, std::vector<std::vector<double>>(3, std::vector<double>(3, 1.0 / 9.0)));
  const Plane got = convolve(ramp, box);
  for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_NEAR(got.values[i], expect[i], 1e-12);
  // corner (0,0): replicated neighbourhood {0,0,1,0,0,1,5,5,6} / 9
  EXPECT_NEAR(got.at(0, 0), 18.0 / 9.0, 1e-12);
}

TEST(Convolve, AsymmetricKernelIsFlipped) {
  Plane impulse(5, 5, 0.0);
  impulse.at(2, 2) = 1.0;
  const Kernel k{3, 1, {1, 2, 3}};
  const Plane out = convolve(impulse, k);
  EXPECT_DOUBLE_EQ(out.at(1, 2), 1.0);
  EXPECT_DOUBLE_EQ(out.at(3, 2), 3.0);
}

TEST(Convolve, EvenKernelRejected) {
  EXPECT_THROW(convolve(Plane(4, 4), Kernel{2, 3, std::vector<double>(6, 0.0)}), Error);
}

TEST(Sobel, ConstantPlaneIsZero) {
  for (double v : sobel_magnitude(Plane(12, 9, 0.7)).values) EXPECT_EQ(v, 0.0);
}

TEST(Sobel, VerticalStepHasMagnitudeFour) {
  Plane step(8, 6, 0.0);
  for (int y = 0; y < 6; ++y)
    for (int x = 4; x < 8; ++x) step.at(x, y) = 1.0;
  const Plane m = sobel_magnitude(step);
  for (int y = 1; y < 5; ++y) {
    EXPECT_DOUBLE_EQ(m.at(3, y), 4.0);
    EXPECT_DOUBLE_EQ(m.at(4, y), 4.0);
    EXPECT_DOUBLE_EQ(m.at(1, y), 0.0);
  }
}

TEST(Sobel, MatchesOracleExactly) {
  const Plane p = synth::noise_plane(32, 24, 11);
  const auto expect = oracle::sobel_magnitude(p);
  const Plane got = sobel_magnitude(p);
  for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_NEAR(got.values[i], expect[i], 1e-12);
}

TEST(GaussianBlur, ConstantUnchanged) {
  for (double v : gaussian_blur(Plane(10, 10, 0.25), 1.5).values) EXPECT_NEAR(v, 0.25, 1e-15);
}

TEST(GaussianBlur, ImpulseSumsToOne) {
  Plane impulse(41, 41, 0.0);
  impulse.at(20, 20) = 1.0;
  const Plane out = gaussian_blur(impulse, 2.0);
  double sum = 0.0;
  for (double v : out.values) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-6);
}

TEST(GaussianBlur, MatchesTwoDimensionalOracle) {
  const Plane p = synth::noise_plane(24, 20, 5);
  const auto expect = oracle::gaussian_blur(p, 2.0);
  const Plane got = gaussian_blur(p, 2.0);
  for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_NEAR(got.values[i], expect[i], 1e-12);
}

TEST(GaussianBlur, PreservesMeanWithConstantBorder) {
  Plane p(40, 40, 0.2);
  for (int y = 15; y < 25; ++y)
    for (int x = 12; x < 28; ++x) p.at(x, y) = 0.9;
  EXPECT_NEAR(mean(gaussian_blur(p, 2.0)), mean(p), 1e-6);
}

TEST(GaussianBlur, RejectsNonPositiveSigma) {
  EXPECT_THROW(gaussian_blur(Plane(4, 4), 0.0), Error);
  EXPECT_THROW(gaussian_blur(Plane(4, 4), -1.0), Error);
}

TEST(Fft, ConstantHasOnlyDc) {
  const Plane a = fft_amplitude(Plane(8, 8, 0.5), 8);
  EXPECT_NEAR(a.values[0], 64 * 0.5, 1e-12);
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_NEAR(a.values[i], 0.0, 1e-12);
}

TEST(Fft, ImpulseIsFlat) {
  Plane p(8, 8, 0.0);
  p.at(3, 5) = 1.0;
  for (double v : fft_amplitude(p, 8).values) EXPECT_NEAR(v, 1.0, 1e-12);
}

TEST(Fft, MatchesNaiveDft) {
  for (int n : {8, 16}) {
    const Plane p = synth::noise_plane(n, n, 40 + n);
    const auto expect = oracle::dft_amplitude(p);
    const Plane got = fft_amplitude(p, n);
    for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_NEAR(got.values[i], expect[i], 1e-4);
  }
}

TEST(Fft, RejectsNonPowerOfTwo) { EXPECT_THROW(fft_amplitude(Plane(8, 8), 12), Error); }

TEST(Fft, InverseRoundTrip) {
  const Plane p = synth::noise_plane(16, 8, 9);
  std::vector<Complex> f = fft2d(p);
  fft2d_inplace(f, 16, 8, true);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(f[i].real() / 128.0, p.values[i], 1e-12);
}

TEST(Histogram, ConstantZeroPlane) {
  const Histogram256 h = histogram256(Plane(5, 2, 0.0));
  EXPECT_EQ(h.bins[0], 10u);
  EXPECT_EQ(h.total, 10u);
}

TEST(Histogram, TopBinIsClosed) {
  const Histogram256 h = histogram256(Plane(1, 1, 1.0));
  EXPECT_EQ(h.bins[255], 1u);
}

TEST(Histogram, MatchesLoopOracle) {
  const Plane p = synth::noise_plane(31, 29, 77);
  const auto expect = oracle::histogram(p);
  const Histogram256 h = histogram256(p);
  std::uint64_t total = 0;
  for (int b = 0; b < 256; ++b) {
    EXPECT_EQ(static_cast<long>(h.bins[b]), expect[b]);
    total += h.bins[b];
  }
  EXPECT_EQ(total, h.total);
}

TEST(Equalize, UniformHistogramIsNearIdentity) {
  Plane p(256, 1);
  for (int i = 0; i < 256; ++i) p.values[i] = (i + 0.5) / 256.0;
  const Plane e = equalize_contrast(p);
  for (int i = 0; i < 256; ++i) EXPECT_NEAR(e.values[i], p.values[i], 1.0 / 256.0);
}

TEST(Equalize, ConstantMapsToSingleLevel) {
  for (double v : equalize_contrast(Plane(6, 6, 0.8)).values) EXPECT_EQ(v, 0.5);
}

TEST(Equalize, OutputInUnitRangeAndCdfNearLinear) {
  // continuous-tone fixture: smooth texture
  const Plane p = synth::smooth_texture(64, 64, 8, 21);
  const Plane e = equalize_contrast(p);
  for (double v : e.values) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  // empirical CDF of the output vs the identity, in quantization levels
  std::vector<double> sorted = e.values;
  std::sort(sorted.begin(), sorted.end());
  const Histogram256 h = histogram256(e);
  std::uint64_t run = 0;
  double worst = 0.0;
  for (int b = 0; b < 256; ++b) {
    run += h.bins[b];
    const double cdf = static_cast<double>(run) / h.total;
    worst = std::max(worst, std::abs(cdf - (b + 1) / 256.0));
  }
  // deviation bounded by one occupied level's mass plus one bin
  double max_level = 0.0;
  const Histogram256 hin = histogram256(p);
  for (auto c : hin.bins) max_level = std::max(max_level, static_cast<double>(c) / hin.total);
  EXPECT_LE(worst, max_level + 1.0 / 256.0);
}

TEST(Median, ConstantAndImpulse) {
  for (double v : median3(Plane(5, 5, 0.4)).values) EXPECT_EQ(v, 0.4);
  Plane p(7, 7, 0.2);
  p.at(3, 3) = 1.0;
  for (double v : median3(p).values) EXPECT_EQ(v, 0.2);
}

TEST(Median, MatchesSortOracle) {
  const Plane p = synth::noise_plane(19, 23, 8);
  const auto expect = oracle::median3(p);
  const Plane got = median3(p);
  for (std::size_t i = 0; i < expect.size(); ++i) EXPECT_EQ(got.values[i], expect[i]);
}

TEST(Resize, SameSizeIsIdentity) {
  const Plane p = synth::noise_plane(9, 6, 2);
  EXPECT_EQ(resize_bilinear(p, 9, 6), p);
}

TEST(Resize, ConstantStaysConstant) {
  for (double v : resize_bilinear(Plane(5, 3, 0.6), 17, 11).values) EXPECT_NEAR(v, 0.6, 1e-15);
}

TEST(Resize, TwoByTwoToFourByFour) {
  Plane p(2, 2);
  p.values = {0.0, 1.0, 2.0, 3.0};
  const Plane r = resize_bilinear(p, 4, 4);
  // source coordinate of output index i is clamp((i + 0.5) / 2 - 0.5, 0, 1):
  // i = 0..3 -> 0, 0.25, 0.75, 1
  const double t[4] = {0.0, 0.25, 0.75, 1.0};
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) EXPECT_NEAR(r.at(x, y), t[x] * 1.0 + t[y] * 2.0, 1e-15);
}

TEST(Entropy, KnownValues) {
  Histogram256 one;
  one.bins[10] = 50;
  one.total = 50;
  EXPECT_EQ(shannon_entropy(one), 0.0);
  Histogram256 two;
  two.bins[0] = 8;
  two.bins[200] = 8;
  two.total = 16;
  EXPECT_DOUBLE_EQ(shannon_entropy(two), 1.0);
}

TEST(Entropy, FixtureMatchesDirectSum) {
  const Plane p = synth::smooth_texture(48, 48, 6, 4);
  const auto counts = oracle::histogram(p);
  double expect = 0.0;
  for (long c : counts)
    if (c) expect -= (c / 2304.0) * std::log2(c / 2304.0);
  EXPECT_NEAR(shannon_entropy(histogram256(p)), expect, 1e-12);
}

TEST(Compression, ConstantVersusNoise) {
  const double flat = compression_ratio(Plane(128, 128, 0.3));
  const double noisy = compression_ratio(synth::noise_plane(128, 128, 99));
  EXPECT_LT(flat, 0.1);
  EXPECT_GT(noisy, flat);
  // measured once: 8-bit uniform noise barely deflates
  EXPECT_NEAR(noisy, 1.0, 0.05);
}

TEST(Purity, SameInputSameBits) {
  const Plane p = synth::noise_plane(33, 21, 6);
  EXPECT_EQ(gaussian_blur(p, 1.3), gaussian_blur(p, 1.3));
  EXPECT_EQ(fft_amplitude(p, 16), fft_amplitude(p, 16));
  EXPECT_EQ(equalize_contrast(p), equalize_contrast(p));
}
