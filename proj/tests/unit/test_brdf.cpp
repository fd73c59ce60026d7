// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "polarcap/brdf.hpp"
#include "support/oracles.hpp"

namespace polarcap::brdf {
namespace {

constexpr double kTestPi = testing::kOraclePi;

TEST(Fresnel, NormalIncidence) {
  const auto f = fresnel(0.0, 1.5);
  EXPECT_NEAR(f.r_s, 0.04, 1e-15);
  EXPECT_NEAR(f.r_p, 0.04, 1e-15);
}

TEST(Fresnel, BrewsterAngleZeroesParallelReflectance) {
  EXPECT_LT(fresnel(std::atan(1.5), 1.5).r_p, 1e-9);
  for (double n : {1.3, 1.5, 1.7, 2.4}) EXPECT_LT(fresnel(std::atan(n), n).r_p, 1e-9);
}

TEST(Fresnel, GrazingLimit) {
  const auto f = fresnel(deg_to_rad(89.999), 1.5);
  EXPECT_GT(f.r_s, 0.999);
  EXPECT_GT(f.r_p, 0.99);
}

TEST(Fresnel, DomainErrors) {
  EXPECT_THROW(fresnel(0.5 * kTestPi, 1.5), Error);
  EXPECT_THROW(fresnel(-0.1, 1.5), Error);
  EXPECT_THROW(fresnel(0.3, 1.0), Error);
  try {
    fresnel(2.0, 1.5);
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::kDomain);
  }
}

// Snell plus the amplitude coefficients written with sines and tangents,
// a different algebraic route from the cosine form used by the library.
std::pair<double, double> fresnel_by_angles(double ti, double n) {
  const double tt = std::asin(std::sin(ti) / n);
  const double rs = -std::sin(ti - tt) / std::sin(ti + tt);
  const double rp = std::tan(ti - tt) / std::tan(ti + tt);
  return {rs * rs, rp * rp};
}

TEST(Fresnel, MatchesSineTangentFormsProperty) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> th(0.01, 1.55), nn(1.1, 2.5);
  for (int t = 0; t < 500; ++t) {
    const double theta = th(rng), n = nn(rng);
    const auto f = fresnel(theta, n);
    const auto [rs, rp] = fresnel_by_angles(theta, n);
    EXPECT_NEAR(f.r_s, rs, 1e-12);
    EXPECT_NEAR(f.r_p, rp, 1e-12);
    EXPECT_LE(f.r_p, f.r_s);
    EXPECT_LT(f.r_p, f.r_s);  // strict away from normal incidence
    EXPECT_GE(f.r_p, 0.0);
    EXPECT_LE(f.r_s, 1.0);
  }
}

TEST(Fresnel, ReflectancesRiseTowardGrazing) {
  double prev_s = 0.0;
  for (double deg = 60.0; deg < 89.95; deg += 0.1) {
    const auto f = fresnel(deg_to_rad(deg), 1.5);
    EXPECT_GT(f.r_s, prev_s);
    prev_s = f.r_s;
  }
  double prev_p = fresnel(std::atan(1.5), 1.5).r_p;
  for (double deg = 57.0; deg < 89.95; deg += 0.1) {
    const double rp = fresnel(deg_to_rad(deg), 1.5).r_p;
    EXPECT_GT(rp, prev_p);
    prev_p = rp;
  }
}

TEST(DiffuseDop, Examples) {
  EXPECT_EQ(diffuse_dop(0.0), 0.0);
  EXPECT_NEAR(diffuse_dop(0.5 * kTestPi), 0.3846, 5e-5);
  // At grazing: (n - 1/n)^2 / (2 + 2n^2 - (n + 1/n)^2) evaluated by hand for n = 1.5.
  const double n = 1.5;
  const double expected = std::pow(n - 1 / n, 2) / (2 + 2 * n * n - std::pow(n + 1 / n, 2));
  EXPECT_NEAR(diffuse_dop(0.5 * kTestPi), expected, 1e-14);
}

TEST(DiffuseDop, StrictlyIncreasingOnFineGrid) {
  double prev = diffuse_dop(0.0);
  for (int i = 1; i < 900; ++i) {
    const double v = diffuse_dop(deg_to_rad(0.1 * i));
    EXPECT_GT(v, prev) << "at " << 0.1 * i << " deg";
    EXPECT_LT(v, 1.0);
    prev = v;
  }
}

TEST(DiffuseDop, SlopeMatchesFiniteDifference) {
  for (double c = 0.05; c < 0.999; c += 0.01) {
    for (double n : {1.3, 1.5, 1.8}) {
      const double h = 1e-6;
      const double fd = (diffuse_dop_cos(c + h, n).value - diffuse_dop_cos(c - h, n).value) / (2 * h);
      EXPECT_NEAR(diffuse_dop_cos(c, n).d_cos, fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(DiffuseDop, InverseRoundTrip) {
  for (double deg = 1.0; deg < 89.0; deg += 0.5) {
    const double c = std::cos(deg_to_rad(deg));
    EXPECT_NEAR(invert_diffuse_dop(diffuse_dop_cos(c, 1.5).value), c, 1e-9);
  }
  EXPECT_EQ(invert_diffuse_dop(0.0), 1.0);
  EXPECT_EQ(invert_diffuse_dop(0.9), 0.0);
}

MaterialSample make_material(const Vec3& rd, const Vec3& rs, double alpha, const Vec3& n = {0, 0, 1}) {
  MaterialSample m;
  m.diffuse_albedo = rd;
  m.specular_albedo = rs;
  m.roughness = alpha;
  m.normal = n;
  return m;
}

Vec3 dir(double theta, double phi) {
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)};
}

TEST(EvalBrdf, LambertAtNormalIncidence) {
  const auto f = eval_brdf(make_material({1, 1, 1}, {0, 0, 0}, 0.5), {0, 0, 1}, {0, 0, 1});
  EXPECT_NEAR(f.diffuse.x, 1 / kTestPi, 1e-15);
  EXPECT_NEAR(f.diffuse.z, 1 / kTestPi, 1e-15);
  EXPECT_EQ(f.specular.x, 0.0);
}

TEST(EvalBrdf, BelowHorizonIsBlack) {
  const auto m = make_material({1, 1, 1}, {1, 1, 1}, 0.5);
  for (const Vec3& l : {Vec3{0, 0, -1}, Vec3{1, 0, 0}, normalize(Vec3{1, 0, -0.1})}) {
    const auto f = eval_brdf(m, l, {0, 0, 1});
    EXPECT_EQ(f.diffuse.x + f.diffuse.y + f.diffuse.z, 0.0);
    EXPECT_EQ(f.specular.x + f.specular.y + f.specular.z, 0.0);
  }
}

// GGX lobe written out from the microfacet definitions with explicit angles.
double specular_oracle(const Vec3& l, const Vec3& v, double alpha, double n_ior) {
  const Vec3 h = normalize(l + v);
  const double th = std::acos(std::min(1.0, h.z));
  const double a2 = alpha * alpha;
  const double cos4 = std::pow(std::cos(th), 4);
  const double tan2 = std::pow(std::tan(th), 2);
  const double d = a2 / (kTestPi * cos4 * (a2 + tan2) * (a2 + tan2));
  auto lambda = [&](double c) {
    const double t2 = (1 - c * c) / (c * c);
    return (std::sqrt(1 + a2 * t2) - 1) / 2;
  };
  const double g = 1 / (1 + lambda(l.z) + lambda(v.z));
  const double ti = std::acos(std::clamp(dot(h, l), 0.0, 1.0));
  double f;
  if (ti < 1e-9) {
    f = std::pow((n_ior - 1) / (n_ior + 1), 2);
  } else {
    const auto [rs, rp] = fresnel_by_angles(ti, n_ior);
    f = 0.5 * (rs + rp);
  }
  return d * g * f / (4 * l.z * v.z) * l.z;
}

TEST(EvalBrdf, SpecularMatchesAngleFormOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> th(0.05, 1.45), ph(0, 2 * kTestPi), al(0.05, 1.0);
  for (int t = 0; t < 500; ++t) {
    const Vec3 l = dir(th(rng), ph(rng)), v = dir(th(rng), ph(rng));
    const double a = al(rng);
    const auto f = eval_brdf(make_material({0, 0, 0}, {1, 1, 1}, a), l, v);
    EXPECT_LT(testing::rel_err(f.specular.x, specular_oracle(l, v, a, 1.5)), 1e-9);
  }
}

TEST(EvalBrdf, SpecularReciprocityProperty) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> th(0.0, 1.5), ph(0, 2 * kTestPi), al(0.01, 1.0);
  for (int t = 0; t < 1000; ++t) {
    const Vec3 l = dir(th(rng), ph(rng)), v = dir(th(rng), ph(rng));
    const auto m = make_material({0.3, 0.3, 0.3}, {0.7, 0.5, 0.2}, al(rng));
    // The returned values carry the cosine of the light direction; divide it out.
    const auto a = eval_brdf(m, l, v), b = eval_brdf(m, v, l);
    EXPECT_LT(testing::rel_err(a.specular.x / l.z, b.specular.x / v.z), 1e-10);
  }
}

TEST(EvalBrdf, FiniteAndNonNegativeAtExtremesProperty) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> th(1.5, 0.5 * kTestPi - 1e-9), ph(0, 2 * kTestPi);
  for (int t = 0; t < 2000; ++t) {
    const Vec3 l = dir(th(rng), ph(rng)), v = dir(th(rng), ph(rng));
    for (double a : {0.0, kAlphaMin, 0.02, 1.0}) {
      const auto f = eval_brdf(make_material({1, 1, 1}, {1, 1, 1}, a), l, v);
      EXPECT_TRUE(is_finite(f.diffuse) && is_finite(f.specular));
      EXPECT_GE(f.specular.x, 0.0);
      EXPECT_GE(f.diffuse.x, 0.0);
    }
  }
  // Exact mirror configuration at the roughness floor.
  const Vec3 l = dir(1.5, 0.0), v = dir(1.5, kTestPi);
  const auto f = eval_brdf(make_material({1, 1, 1}, {1, 1, 1}, kAlphaMin), l, v);
  EXPECT_TRUE(is_finite(f.specular));
}

TEST(EvalBrdf, FurnaceBound) {
  // Albedo = integral over the hemisphere of the cosine-weighted response.
  // Stratified uniform-hemisphere Monte Carlo, 1e5 samples per view.
  for (double alpha : {0.2, 0.5, 1.0}) {
    for (double view_deg : {0.0, 30.0, 60.0, 80.0}) {
      const Vec3 v = dir(deg_to_rad(view_deg), 0.3);
      const auto m = make_material({0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}, alpha);
      const int nu = 400, nv = 250;
      std::mt19937_64 rng(11);
      std::uniform_real_distribution<double> jit(0.0, 1.0);
      double sum = 0.0;
      for (int i = 0; i < nu; ++i) {
        for (int j = 0; j < nv; ++j) {
          const double cz = (i + jit(rng)) / nu;  // uniform in cos theta => uniform on hemisphere
          const double phi = 2 * kTestPi * (j + jit(rng)) / nv;
          const double sz = std::sqrt(1 - cz * cz);
          const auto f = eval_brdf(m, {sz * std::cos(phi), sz * std::sin(phi), cz}, v);
          sum += f.diffuse.x + f.specular.x;
        }
      }
      const double albedo = sum * 2 * kTestPi / (nu * nv);
      EXPECT_LE(albedo, 1.02) << "alpha " << alpha << " view " << view_deg;
      EXPECT_GT(albedo, 0.45);
    }
  }
}

TEST(CollocatedLobe, MatchesGeneralEvaluation) {
  for (double c = 0.05; c <= 1.0; c += 0.05) {
    for (double a : {0.01, 0.1, 0.3, 0.7, 1.0}) {
      const Vec3 v = dir(std::acos(std::min(1.0, c)), 0.7);
      const double d = ggx_distribution(c, a), g = smith_g2(c, c, a);
      EXPECT_LT(testing::rel_err(collocated_lobe(c, a).value, d * g / (4 * c)), 1e-10);
      // eval_brdf carries F(0) on top of the lobe; the light cosine cancels.
      const auto f = eval_brdf(make_material({0, 0, 0}, {1, 1, 1}, a), v, v);
      EXPECT_LT(testing::rel_err(f.specular.x, collocated_lobe(c, a).value * 0.04), 1e-9);
    }
  }
}

TEST(CollocatedLobe, LogDerivativesMatchFiniteDifferences) {
  for (double c = 0.1; c < 0.99; c += 0.07) {
    for (double a = 0.05; a < 0.99; a += 0.09) {
      const auto l = collocated_lobe(c, a);
      const double h = 1e-6;
      const double fdc = (std::log(collocated_lobe(c + h, a).value) - std::log(collocated_lobe(c - h, a).value)) / (2 * h);
      const double fda = (std::log(collocated_lobe(c, a + h).value) - std::log(collocated_lobe(c, a - h).value)) / (2 * h);
      EXPECT_NEAR(l.dlog_dc, fdc, 1e-5 * std::max(1.0, std::abs(fdc)));
      EXPECT_NEAR(l.dlog_dalpha, fda, 1e-5 * std::max(1.0, std::abs(fda)));
    }
  }
}

}  // namespace
}  // namespace polarcap::brdf
