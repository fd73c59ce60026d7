// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

// Dielectric reflectance: Fresnel equations, a GGX / height-correlated Smith
// microfacet specular lobe, Lambertian diffuse, and the degree of linear
// polarization of diffusely exitant light.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "polarcap/core/error.hpp"
#include "polarcap/core/vec.hpp"

namespace polarcap::brdf {

inline constexpr double kDefaultIor = 1.5;
inline constexpr double kAlphaMin = 0.01;

struct MaterialSample {
  Vec3 diffuse_albedo;
  Vec3 specular_albedo;
  double roughness = 0.5;  // GGX alpha, floored at kAlphaMin on evaluation
  Vec3 normal{0.0, 0.0, 1.0};
  double ior = kDefaultIor;
};

struct FresnelCoefficients {
  double r_s = 0.0;  // perpendicular
  double r_p = 0.0;  // parallel

  double unpolarized() const { return 0.5 * (r_s + r_p); }
};

/// Fresnel reflectances for a cosine of incidence in [0, 1]. No domain checks;
/// cos_i == 0 gives the grazing limit r_s = r_p = 1.
inline FresnelCoefficients fresnel_cos(double cos_i, double n) {
  cos_i = std::clamp(cos_i, 0.0, 1.0);
  const double sin2_i = 1.0 - cos_i * cos_i;
  const double cos_t = std::sqrt(std::max(0.0, 1.0 - sin2_i / (n * n)));
  const double rs = (cos_i - n * cos_t) / (cos_i + n * cos_t);
  const double rp = (cos_t - n * cos_i) / (cos_t + n * cos_i);
  return {rs * rs, rp * rp};
}

/// Dielectric Fresnel reflectances at incidence angle theta (radians).
inline FresnelCoefficients fresnel(double theta, double n) {
  if (!(theta >= 0.0) || !(theta < 0.5 * kPi)) {
    fail(ErrorCategory::kDomain, "fresnel: incidence angle must be in [0, 90) degrees, got " +
                                     std::to_string(rad_to_deg(theta)));
  }
  if (!(n > 1.0)) fail(ErrorCategory::kDomain, "fresnel: ior must be > 1");
  return fresnel_cos(std::cos(theta), n);
}

/// Diffuse degree of polarization as a function of the exitance cosine, with
/// its derivative with respect to that cosine.
struct DopWithSlope {
  double value;
  double d_cos;
};

inline DopWithSlope diffuse_dop_cos(double c, double n) {
  c = std::clamp(c, 0.0, 1.0);
  const double s2 = 1.0 - c * c;
  const double a = (n - 1.0 / n) * (n - 1.0 / n);
  const double b = (n + 1.0 / n) * (n + 1.0 / n);
  const double r = std::sqrt(n * n - s2);
  const double num = a * s2;
  const double den = 2.0 + 2.0 * n * n - b * s2 + 4.0 * c * r;
  const double d_num = -2.0 * a * c;
  const double d_den = 2.0 * b * c + 4.0 * r + 4.0 * c * c / r;
  return {num / den, (d_num * den - num * d_den) / (den * den)};
}

/// Degree of linear polarization of light leaving a dielectric after
/// subsurface scattering, at exitance angle theta (radians).
inline double diffuse_dop(double theta_view, double n = kDefaultIor) {
  if (!(theta_view >= 0.0) || !(theta_view <= 0.5 * kPi)) {
    fail(ErrorCategory::kDomain, "diffuse_dop: exitance angle must be in [0, 90] degrees");
  }
  return diffuse_dop_cos(std::cos(theta_view), n).value;
}

/// Exitance cosine whose diffuse DOP equals `dop`; saturates at grazing.
inline double invert_diffuse_dop(double dop, double n = kDefaultIor) {
  if (!(dop > 0.0)) return 1.0;
  if (dop >= diffuse_dop_cos(0.0, n).value) return 0.0;
  double lo = 0.0;  // cosine; dop decreases as the cosine grows
  double hi = 1.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (diffuse_dop_cos(mid, n).value > dop) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline double ggx_distribution(double n_dot_h, double alpha) {
  const double a2 = alpha * alpha;
  const double q = n_dot_h * n_dot_h * (a2 - 1.0) + 1.0;
  return a2 / (kPi * q * q);
}

inline double smith_lambda(double cos_theta, double alpha) {
  const double c2 = cos_theta * cos_theta;
  const double tan2 = (1.0 - c2) / c2;
  return 0.5 * (-1.0 + std::sqrt(1.0 + alpha * alpha * tan2));
}

/// Height-correlated Smith masking-shadowing.
inline double smith_g2(double n_dot_l, double n_dot_v, double alpha) {
  return 1.0 / (1.0 + smith_lambda(n_dot_l, alpha) + smith_lambda(n_dot_v, alpha));
}

struct BrdfValue {
  Vec3 diffuse;   // rho_d / pi * cos(theta_l)
  Vec3 specular;  // rho_s * D G F / (4 cos_l cos_v) * cos(theta_l)
};

/// Cosine-weighted reflectance for unit light/view directions. Below-horizon
/// configurations return zeros.
inline BrdfValue eval_brdf(const MaterialSample& m, const Vec3& light_dir, const Vec3& view_dir) {
  const double nl = dot(m.normal, light_dir);
  const double nv = dot(m.normal, view_dir);
  if (!(nl > 0.0) || !(nv > 0.0)) return {};
  const double alpha = std::clamp(m.roughness, kAlphaMin, 1.0);
  const Vec3 h = normalize(light_dir + view_dir);
  const double nh = std::max(0.0, dot(m.normal, h));
  const double hl = std::max(0.0, dot(h, light_dir));
  const double d = ggx_distribution(nh, alpha);
  const double g = smith_g2(nl, nv, alpha);
  const double f = fresnel_cos(hl, m.ior).unpolarized();
  const double spec = d * g * f / (4.0 * nv);
  return {m.diffuse_albedo * (nl / kPi), m.specular_albedo * spec};
}

/// D G / (4 cos) for collocated light and view at cosine c, plus the partial
/// derivatives of its logarithm. Closed form used by the analytic gradients:
/// S = alpha^2 / (4 pi q^2 sqrt(m)), q = c^2 (alpha^2 - 1) + 1,
/// m = c^2 (1 - alpha^2) + alpha^2.
struct CollocatedLobe {
  double value;
  double dlog_dc;
  double dlog_dalpha;
};

inline CollocatedLobe collocated_lobe(double c, double alpha) {
  const double a2 = alpha * alpha;
  const double c2 = c * c;
  const double q = c2 * (a2 - 1.0) + 1.0;
  const double m = c2 * (1.0 - a2) + a2;
  const double value = a2 / (4.0 * kPi * q * q * std::sqrt(m));
  const double dq_dc = 2.0 * c * (a2 - 1.0);
  const double dm_dc = 2.0 * c * (1.0 - a2);
  const double dq_da = 2.0 * alpha * c2;
  const double dm_da = 2.0 * alpha * (1.0 - c2);
  return {value, -2.0 * dq_dc / q - 0.5 * dm_dc / m,
          2.0 / alpha - 2.0 * dq_da / q - 0.5 * dm_da / m};
}

}  // namespace polarcap::brdf
