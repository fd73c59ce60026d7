// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "polarcap/stokes.hpp"
#include "support/oracles.hpp"

namespace polarcap {
namespace {

using testing::uniform_capture;
using testing::uniform_stokes;

TEST(ComputeStokes, SubstitutionExamples) {
  auto s = compute_stokes(uniform_capture(1.0, 0.5, 0.0));
  EXPECT_DOUBLE_EQ(s.s0[0][0], 1.0);
  EXPECT_DOUBLE_EQ(s.s1[0][0], 1.0);
  EXPECT_DOUBLE_EQ(s.s2[0][0], 0.0);

  for (double k : {0.0, 0.3, 7.0}) {
    s = compute_stokes(uniform_capture(k, k, k));
    EXPECT_DOUBLE_EQ(s.s0[0][1], 2 * k);
    EXPECT_DOUBLE_EQ(s.s1[0][1], 0.0);
    EXPECT_DOUBLE_EQ(s.s2[0][1], 0.0);
  }
}

TEST(ComputeStokes, MatchesSinusoidModelAtCaptureAngles) {
  const auto s = compute_stokes(uniform_capture(0.6, 0.9, 0.6));
  EXPECT_NEAR(s.s0[0][2], 1.2, 1e-12);
  EXPECT_NEAR(s.s1[0][2], 0.0, 1e-12);
  EXPECT_NEAR(s.s2[0][2], 0.6, 1e-12);
  // The sinusoid with these components reproduces the three captures.
  EXPECT_NEAR(testing::sinusoid(1.2, 0.0, 0.6, 0.0), 0.6, 1e-12);
  EXPECT_NEAR(testing::sinusoid(1.2, 0.0, 0.6, testing::kOraclePi / 4), 0.9, 1e-12);
  EXPECT_NEAR(testing::sinusoid(1.2, 0.0, 0.6, testing::kOraclePi / 2), 0.6, 1e-12);
}

TEST(ComputeStokes, RejectsMismatchedDimensions) {
  CaptureSet c = uniform_capture(1, 1, 1, 4, 4);
  c.i45 = RadianceImage(4, 3);
  try {
    compute_stokes(c);
    FAIL() << "expected an input error";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kInput);
  }
}

TEST(ComputeStokes, IsLinear) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const CaptureSet c1 = testing::random_capture(rng, 5, 4);
    const CaptureSet c2 = testing::random_capture(rng, 5, 4);
    const double a = 0.25 + trial * 0.1, b = 1.5;
    CaptureSet mix = c1;
    for (std::size_t i = 0; i < mix.i0.size(); ++i) {
      for (int k = 0; k < 3; ++k) {
        mix.i0[i][k] = a * c1.i0[i][k] + b * c2.i0[i][k];
        mix.i45[i][k] = a * c1.i45[i][k] + b * c2.i45[i][k];
        mix.i90[i][k] = a * c1.i90[i][k] + b * c2.i90[i][k];
      }
    }
    const auto s1 = compute_stokes(c1), s2 = compute_stokes(c2), sm = compute_stokes(mix);
    for (std::size_t i = 0; i < sm.s0.size(); ++i) {
      for (int k = 0; k < 3; ++k) {
        EXPECT_NEAR(sm.s0[i][k], a * s1.s0[i][k] + b * s2.s0[i][k], 1e-12);
        EXPECT_NEAR(sm.s1[i][k], a * s1.s1[i][k] + b * s2.s1[i][k], 1e-12);
        EXPECT_NEAR(sm.s2[i][k], a * s1.s2[i][k] + b * s2.s2[i][k], 1e-12);
      }
    }
  }
}

TEST(FilterImage, Examples) {
  std::mt19937_64 rng(3);
  const CaptureSet c = testing::random_capture(rng, 3, 3);
  const auto at0 = filter_image(compute_stokes(c), 0.0);
  for (std::size_t i = 0; i < at0.size(); ++i) {
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(at0[i][k], c.i0[i][k], 1e-15 * (1 + c.i0[i][k]));
  }

  for (double phi : {0.0, 17.0, 45.0, 133.3}) {
    EXPECT_DOUBLE_EQ(filter_image(uniform_stokes(0.8, 0, 0), phi)[0][0], 0.4);
  }
  EXPECT_NEAR(filter_image(uniform_stokes(1.2, 0.0, 0.6), 135.0)[0][0], 0.3, 1e-12);
  // I(135) + I(45) = s0
  EXPECT_NEAR(testing::sinusoid(1.2, 0, 0.6, 3 * testing::kOraclePi / 4) +
                  testing::sinusoid(1.2, 0, 0.6, testing::kOraclePi / 4),
              1.2, 1e-12);
}

TEST(FilterImage, UnphysicalStokesIsReported) {
  try {
    filter_image(uniform_stokes(1.0, 0.0, 1.5), 135.0);  // (1 - 1.5) / 2 < 0
    FAIL() << "expected unphysical error";
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kUnphysical);
  }
  // Rounding-level negatives clamp silently.
  EXPECT_EQ(filter_image(uniform_stokes(1.0, 0.0, 1.0 + 1e-10), 135.0)[0][0], 0.0);
}

TEST(FilterImage, OrthogonalPairsSumToS0) {
  std::mt19937_64 rng(5);
  const auto s = compute_stokes(testing::random_capture(rng, 6, 6));
  std::uniform_real_distribution<double> ang(0.0, 180.0);
  for (int t = 0; t < 25; ++t) {
    const double phi = ang(rng);
    const auto a = filter_image(s, phi), b = filter_image(s, phi + 90.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (int k = 0; k < 3; ++k) EXPECT_NEAR(a[i][k] + b[i][k], s.s0[i][k], 1e-12);
    }
  }
}

TEST(DeriveInputs, Examples) {
  auto d = derive_inputs(uniform_capture(1.0, 0.5, 0.0));
  EXPECT_DOUBLE_EQ(d.full[0][0], 1.0);
  EXPECT_DOUBLE_EQ(d.i135[0][0], 0.5);
  d = derive_inputs(uniform_capture(0.4, 0.4, 0.4));
  EXPECT_DOUBLE_EQ(d.full[0][0], 0.8);
  EXPECT_DOUBLE_EQ(d.i135[0][0], 0.4);
  EXPECT_EQ(d.clamped_negative, 0u);
}

TEST(DeriveInputs, NegativeI135IsClampedAndCounted) {
  const auto d = derive_inputs(uniform_capture(0.1, 0.9, 0.1, 2, 1));
  EXPECT_EQ(d.i135[0][0], 0.0);
  EXPECT_EQ(d.clamped_negative, 6u);
}

TEST(DeriveInputs, MatchesFilterAt135Property) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 50; ++t) {
    const CaptureSet c = testing::random_capture(rng, 4, 4);
    const auto d = derive_inputs(c);
    const auto f = filter_image(compute_stokes(c), 135.0);
    for (std::size_t i = 0; i < f.size(); ++i) {
      for (int k = 0; k < 3; ++k) EXPECT_NEAR(d.i135[i][k], f[i][k], 1e-12);
    }
  }
}

TEST(NormalizeStokes, Examples) {
  auto m = normalize_stokes(uniform_stokes(1.0, 0.3, 0.4), 1e-4);
  EXPECT_TRUE(m.valid[0][0]);
  EXPECT_NEAR(m.u[0][0], 0.6, 1e-15);
  EXPECT_NEAR(m.u[0][1], 0.8, 1e-15);

  m = normalize_stokes(uniform_stokes(1.0, 0.0, 0.0), 1e-4);
  EXPECT_FALSE(m.valid[0][0]);
  EXPECT_EQ(m.u[0][0], 0.0);
  EXPECT_EQ(m.u[0][1], 0.0);
}

TEST(NormalizeStokes, UsesChannelAverage) {
  StokesImage s(1, 1);
  s.s0[0] = {1, 1, 1};
  s.s1[0] = {0.3, -0.3, 0.3};  // mean 0.1
  s.s2[0] = {0.0, 0.0, 0.0};
  const auto m = normalize_stokes(s, 1e-4);
  ASSERT_TRUE(m.valid[0][0]);
  EXPECT_NEAR(m.u[0][0], 1.0, 1e-15);
}

TEST(NormalizeStokes, UnitLengthAndScaleInvariantProperty) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> scale(1.0, 50.0);
  for (int t = 0; t < 30; ++t) {
    const auto s = compute_stokes(testing::random_capture(rng, 8, 8));
    const auto m = normalize_stokes(s, 1e-6);
    StokesImage scaled = s;
    const double k = scale(rng);
    for (std::size_t i = 0; i < s.s0.size(); ++i) {
      for (int c = 0; c < 3; ++c) {
        scaled.s0[i][c] *= k;
        scaled.s1[i][c] *= k;
        scaled.s2[i][c] *= k;
      }
    }
    const auto ms = normalize_stokes(scaled, 1e-6);
    for (std::size_t i = 0; i < m.u.size(); ++i) {
      if (!m.valid[i][0]) {
        EXPECT_EQ(m.u[i][0], 0.0);
        continue;
      }
      EXPECT_NEAR(std::hypot(m.u[i][0], m.u[i][1]), 1.0, 1e-6);
      ASSERT_TRUE(ms.valid[i][0]);
      EXPECT_NEAR(ms.u[i][0], m.u[i][0], 1e-12);
      EXPECT_NEAR(ms.u[i][1], m.u[i][1], 1e-12);
    }
  }
}

TEST(NormalizeStokes, DefaultEpsilonScalesWithImage) {
  const auto s = uniform_stokes(2.0, 0.0, 0.0, 4, 4);
  EXPECT_NEAR(default_stokes_epsilon(s), 2e-4, 1e-18);
}

TEST(DopAolp, Examples) {
  auto r = dop_aolp(uniform_stokes(2, 0, 0));
  EXPECT_EQ(r.dop[0][0], 0.0);
  r = dop_aolp(uniform_stokes(1, 1, 0));
  EXPECT_NEAR(r.dop[0][0], 1.0, 1e-15);
  EXPECT_NEAR(r.aolp[0][0], 0.0, 1e-15);
  r = dop_aolp(uniform_stokes(1, 0, 1));
  EXPECT_NEAR(r.dop[0][0], 1.0, 1e-15);
  EXPECT_NEAR(r.aolp[0][0], testing::kOraclePi / 4, 1e-15);
  const auto brute = testing::brute_force_extrema(1, 0, 1);
  EXPECT_NEAR(r.aolp[0][0], brute.argmax_rad, testing::kOraclePi / 3600);
}

TEST(DopAolp, ZeroIntensityPixelsAreFlagged) {
  const auto r = dop_aolp(uniform_stokes(0, 0, 0));
  EXPECT_FALSE(r.defined[0][0]);
  EXPECT_EQ(r.dop[0][0], 0.0);
  EXPECT_EQ(r.aolp[0][0], 0.0);
}

TEST(DopAolp, AolpMatchesBruteForceArgmaxProperty) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 200; ++t) {
    const double s1 = u(rng), s2 = u(rng);
    const double s0 = std::hypot(s1, s2) * 1.5 + 0.01;
    const auto r = dop_aolp(uniform_stokes(s0, s1, s2));
    const auto b = testing::brute_force_extrema(s0, s1, s2);
    double d = std::abs(r.aolp[0][0] - b.argmax_rad);
    d = std::min(d, testing::kOraclePi - d);
    EXPECT_LT(d, 2 * testing::kOraclePi / 3600);
    EXPECT_LE(r.dop[0][0], 1.0);
  }
}

TEST(DopAolp, FrameRotationShiftsAolp) {
  // Rotating the polarization frame by beta rotates (s1, s2) by 2 beta.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0), b(0.0, testing::kOraclePi);
  for (int t = 0; t < 100; ++t) {
    const double s1 = u(rng), s2 = u(rng), beta = b(rng);
    const double r1 = s1 * std::cos(2 * beta) - s2 * std::sin(2 * beta);
    const double r2 = s1 * std::sin(2 * beta) + s2 * std::cos(2 * beta);
    const double a0 = dop_aolp(uniform_stokes(2, s1, s2)).aolp[0][0];
    const double a1 = dop_aolp(uniform_stokes(2, r1, r2)).aolp[0][0];
    double d = std::fmod(a1 - a0 - beta + 4 * testing::kOraclePi, testing::kOraclePi);
    d = std::min(d, testing::kOraclePi - d);
    EXPECT_LT(d, 1e-9);
  }
}

NormalizedStokesMap random_map(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ang(0.0, 2 * testing::kOraclePi);
  NormalizedStokesMap m(w, h);
  for (std::size_t i = 0; i < m.u.size(); ++i) {
    if (i % 7 == 3) continue;  // sprinkle invalid pixels
    const double a = ang(rng);
    m.u[i] = {std::cos(a), std::sin(a)};
    m.valid[i][0] = 1;
  }
  return m;
}

TEST(AddStokesNoise, ZeroSigmaIsIdentityAndSeedIsDeterministic) {
  const auto m = random_map(16, 16, 1);
  const auto z = add_stokes_noise(m, 0.0, 77);
  EXPECT_EQ(z.u, m.u);
  EXPECT_EQ(z.valid, m.valid);
  const auto a = add_stokes_noise(m, 0.1, 77);
  const auto b = add_stokes_noise(m, 0.1, 77);
  EXPECT_EQ(a.u, b.u);
  EXPECT_EQ(a.valid, m.valid);
  const auto c = add_stokes_noise(m, 0.1, 78);
  EXPECT_NE(a.u, c.u);
  for (std::size_t i = 0; i < a.u.size(); ++i) {
    if (!m.valid[i][0]) {
      EXPECT_EQ(a.u[i], m.u[i]);
    } else {
      EXPECT_NEAR(std::hypot(a.u[i][0], a.u[i][1]), 1.0, 1e-12);
    }
  }
}

TEST(AddStokesNoise, RejectsNegativeSigma) {
  EXPECT_THROW(add_stokes_noise(random_map(2, 2, 1), -0.1, 1), Error);
}

// Expected mean |angle| between (1, 0) and (1 + e1, e2), e ~ N(0, sigma^2 I),
// by tensor-product quadrature over the Gaussian (no random numbers).
double expected_angular_deviation(double sigma) {
  const int n = 801;
  const double lim = 8.0 * sigma, h = 2 * lim / (n - 1);
  double sum = 0.0, wsum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double e1 = -lim + i * h;
    const double w1 = std::exp(-0.5 * e1 * e1 / (sigma * sigma));
    for (int j = 0; j < n; ++j) {
      const double e2 = -lim + j * h;
      const double w = w1 * std::exp(-0.5 * e2 * e2 / (sigma * sigma));
      sum += w * std::abs(std::atan2(e2, 1.0 + e1));
      wsum += w;
    }
  }
  return sum / wsum;
}

TEST(AddStokesNoise, MeanAngularDeviationMatchesGaussianModel) {
  const double sigma = 0.1;
  const double expected = expected_angular_deviation(sigma);
  // First-order check of the quadrature itself: sigma * sqrt(2 / pi).
  EXPECT_NEAR(expected, sigma * std::sqrt(2 / testing::kOraclePi), 2e-3);

  NormalizedStokesMap m(512, 512);
  for (std::size_t i = 0; i < m.u.size(); ++i) {
    const double a = 0.001 * static_cast<double>(i);
    m.u[i] = {std::cos(a), std::sin(a)};
    m.valid[i][0] = 1;
  }
  const auto noisy = add_stokes_noise(m, sigma, 2024);
  double sum = 0.0;
  for (std::size_t i = 0; i < m.u.size(); ++i) {
    const double d = m.u[i][0] * noisy.u[i][0] + m.u[i][1] * noisy.u[i][1];
    const double x = m.u[i][0] * noisy.u[i][1] - m.u[i][1] * noisy.u[i][0];
    sum += std::abs(std::atan2(x, d));
  }
  const double mean = sum / static_cast<double>(m.u.size());
  // Std of |angle| is ~0.06 here; 262144 samples give a standard error ~1.2e-4.
  EXPECT_NEAR(mean, expected, 6e-4);
}

TEST(VisualizeStokes, ColorConvention) {
  NormalizedStokesMap m(3, 1);
  m.u[0] = {1.0, 0.0};
  m.valid[0][0] = 1;
  m.u[1] = {0.0, -1.0};
  m.valid[1][0] = 1;
  const auto img = visualize_stokes(m);
  EXPECT_EQ(img[0], (std::array<std::uint8_t, 3>{127, 255, 127}));
  EXPECT_EQ(img[1], (std::array<std::uint8_t, 3>{127, 127, 0}));
  EXPECT_EQ(img[2], (std::array<std::uint8_t, 3>{0, 0, 0}));
}

}  // namespace
}  // namespace polarcap
