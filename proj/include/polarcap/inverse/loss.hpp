// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

// Polarized rendering loss between predicted maps and an observed capture,
// and its analytic gradient with respect to the per-pixel parameters.
//
// Per pixel and channel k, with E = flash / d^2 and c = n.v:
//   L_d = E rho_d c / pi,  L_s = E rho_s F0 S(c, alpha)
//   I_phi = (L_d (1 + dop(c) P_phi) + L_s) / 2,  P_phi = C2 cos 2phi + S2 sin 2phi
// where (C2, S2) is the diffuse polarization axis of the normal.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "polarcap/brdf.hpp"
#include "polarcap/core/error.hpp"
#include "polarcap/core/image.hpp"
#include "polarcap/core/parallel.hpp"
#include "polarcap/render/camera.hpp"
#include "polarcap/render/shade.hpp"
#include "polarcap/stokes.hpp"
#include "polarcap/svbrdf_maps.hpp"

namespace polarcap::inverse {

inline constexpr std::array<double, 4> kLossAngles{0.0, 45.0, 90.0, 135.0};

/// The four polarizer-filtered images a loss compares against.
struct Observation {
  std::array<RadianceImage, 4> images;  // 0, 45, 90, 135 degrees

  int width() const { return images[0].width(); }
  int height() const { return images[0].height(); }

  static Observation from_capture(const CaptureSet& c) {
    const DerivedInputs d = derive_inputs(c);
    return {{c.i0, c.i45, c.i90, d.i135}};
  }

  /// Unfiltered image, i0 + i90.
  RadianceImage full() const {
    RadianceImage f(width(), height());
    for (std::size_t i = 0; i < f.size(); ++i) {
      for (int k = 0; k < 3; ++k) f[i][k] = images[0][i][k] + images[2][i][k];
    }
    return f;
  }
};

/// Camera, flash and index of refraction shared by prediction and capture.
struct ShadingSetup {
  render::Camera camera;
  render::FlashLight flash;
  double ior = brdf::kDefaultIor;
};

enum class RenderLoss {
  kPolarized,  // per-angle filtered images
  kPlain,      // unfiltered image only
};

struct LossOptions {
  RenderLoss render = RenderLoss::kPolarized;
  double render_weight = 1.0;
  double map_weight = 1.0;
  const SvbrdfMaps* gt = nullptr;  // enables the L1 map term
};

struct LossBreakdown {
  double total = 0.0;
  double l1_map_term = 0.0;
  double polarized_render_term = 0.0;
  std::array<double, 4> per_angle{};
  double plain_render_term = 0.0;
};

/// Per-pixel optimization variables. The normal is stored in stereographic
/// coordinates (a, b): n = (2a, 2b, 1 - a^2 - b^2) / (1 + a^2 + b^2).
struct ParamMaps {
  RgbImage diffuse;
  RgbImage specular;
  ScalarImage roughness;
  Image<double, 2> normal;

  ParamMaps() = default;
  ParamMaps(int w, int h) : diffuse(w, h), specular(w, h), roughness(w, h), normal(w, h) {}
  int width() const { return diffuse.width(); }
  int height() const { return diffuse.height(); }
};

inline Vec3 normal_from_stereo(double a, double b) {
  const double d = 1.0 + a * a + b * b;
  return {2.0 * a / d, 2.0 * b / d, (1.0 - a * a - b * b) / d};
}

inline std::array<double, 2> stereo_from_normal(const Vec3& n) {
  const Vec3 u = normalize(n);
  const double d = 1.0 + std::max(u.z, -1.0 + 1e-12);
  return {u.x / d, u.y / d};
}

inline ParamMaps params_from_maps(const SvbrdfMaps& m) {
  ParamMaps p(m.width(), m.height());
  p.diffuse = m.diffuse;
  p.specular = m.specular;
  p.roughness = m.roughness;
  for (std::size_t i = 0; i < m.mask.size(); ++i) {
    if (m.mask[i][0]) p.normal[i] = stereo_from_normal(m.normal_at(i));
  }
  return p;
}

/// Writes the parameters into `m` (normals decoded, unit length); depth and
/// mask are left alone.
inline void apply_params(const ParamMaps& p, SvbrdfMaps& m) {
  m.diffuse = p.diffuse;
  m.specular = p.specular;
  m.roughness = p.roughness;
  for (std::size_t i = 0; i < m.mask.size(); ++i) {
    if (m.mask[i][0]) m.set_normal(i, normal_from_stereo(p.normal[i][0], p.normal[i][1]));
  }
}

namespace detail {

inline void check_loss_inputs(const SvbrdfMaps& pred, const Observation& obs, const Mask& mask) {
  pred.validate();
  for (const auto& img : obs.images) require_same_size(mask, img, "loss observation");
  require_same_size(mask, pred.mask, "loss prediction");
  if (count(mask) == 0) fail(ErrorCategory::kInput, "loss: empty mask");
}

inline double mean_abs(const RadianceImage& a, const RadianceImage& b, const Mask& mask) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i][0]) continue;
    for (int k = 0; k < 3; ++k) sum += std::abs(a[i][k] - b[i][k]);
    ++n;
  }
  return sum / (3.0 * static_cast<double>(n));
}

template <int C>
double map_l1(const Image<double, C>& a, const Image<double, C>& b, const Mask& mask) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i][0]) continue;
    for (int k = 0; k < C; ++k) sum += std::abs(a[i][k] - b[i][k]);
    ++n;
  }
  return sum / (C * static_cast<double>(n));
}

inline double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

/// Residuals this close to zero are rounding noise at an exact fit; they sit
/// on the absolute-value kink and get subgradient zero.
inline constexpr double kKinkTolerance = 1e-12;

inline double residual_sign(double r, double target) {
  return std::abs(r) <= kKinkTolerance * std::max(1.0, std::abs(target)) ? 0.0 : sign(r);
}

}  // namespace detail

/// Mean of the five per-map L1 distances over the mask.
inline double l1_map_term(const SvbrdfMaps& pred, const SvbrdfMaps& gt, const Mask& mask) {
  return (detail::map_l1(pred.diffuse, gt.diffuse, mask) + detail::map_l1(pred.specular, gt.specular, mask) +
          detail::map_l1(pred.roughness, gt.roughness, mask) + detail::map_l1(pred.normal, gt.normal, mask) +
          detail::map_l1(pred.depth, gt.depth, mask)) /
         5.0;
}

/// Re-renders `pred` (positions from its depth map) and compares with the
/// observation on `mask`. This is the reference evaluation through the
/// forward renderer; loss_gradients uses the closed form above.
inline LossBreakdown polarized_render_loss(const SvbrdfMaps& pred, const Observation& obs, const ShadingSetup& setup,
                                           const Mask& mask, const LossOptions& opt = {}) {
  detail::check_loss_inputs(pred, obs, mask);
  SvbrdfMaps shaded = pred;
  shaded.mask = mask;
  render::ShadeOptions so;
  so.ior = setup.ior;
  const StokesImage s = render::shade_maps(shaded, setup.camera, setup.flash, so);
  LossBreakdown out;
  if (opt.render == RenderLoss::kPolarized) {
    for (int j = 0; j < 4; ++j) {
      out.per_angle[j] = detail::mean_abs(filter_image(s, kLossAngles[j]), obs.images[j], mask);
      out.polarized_render_term += 0.25 * out.per_angle[j];
    }
  } else {
    out.plain_render_term = detail::mean_abs(s.s0, obs.full(), mask);
  }
  if (opt.gt != nullptr) out.l1_map_term = l1_map_term(pred, *opt.gt, mask);
  const double render_term =
      opt.render == RenderLoss::kPolarized ? out.polarized_render_term : out.plain_render_term;
  out.total = opt.render_weight * render_term + (opt.gt != nullptr ? opt.map_weight * out.l1_map_term : 0.0);
  return out;
}

/// Viewing geometry of one pixel at a fixed depth.
struct PixelGeometry {
  Vec3 view;      // unit, surface to camera
  double inv_d2;  // 1 / squared distance to the flash
};

inline PixelGeometry pixel_geometry(const render::Camera& cam, int x, int y, double depth) {
  const Vec3 p = cam.point_at_depth(x, y, depth);
  return {normalize(-p), 1.0 / dot(p, p)};
}

/// Rendered values and their partial derivatives for one pixel.
/// Parameter order: rho_d (3), rho_s (3), alpha, a, b.
struct PixelJet {
  static constexpr int kParams = 9;
  std::array<std::array<double, 3>, 4> value{};                 // [angle][channel]
  std::array<std::array<std::array<double, kParams>, 3>, 4> d{};  // [angle][channel][param]
};

/// Closed-form forward model with derivatives. In plain mode only entry 0
/// is filled, holding the unfiltered radiance.
inline PixelJet render_pixel_jet(const std::array<double, 3>& rd, const std::array<double, 3>& rs, double alpha,
                                 double a, double b, const PixelGeometry& g, const Vec3& flash, double ior,
                                 bool polarized) {
  PixelJet jet;
  const double den = 1.0 + a * a + b * b;
  const Vec3 n{2.0 * a / den, 2.0 * b / den, (1.0 - a * a - b * b) / den};
  const double c = dot(n, g.view);
  if (!(c > 0.0)) return jet;
  const double d2 = den * den;
  const Vec3 dn_da{2.0 * (1.0 - a * a + b * b) / d2, -4.0 * a * b / d2, -4.0 * a / d2};
  const Vec3 dn_db{-4.0 * a * b / d2, 2.0 * (1.0 + a * a - b * b) / d2, -4.0 * b / d2};
  const double dc_da = dot(dn_da, g.view);
  const double dc_db = dot(dn_db, g.view);

  const bool alpha_free = alpha > brdf::kAlphaMin && alpha < 1.0;
  alpha = std::clamp(alpha, brdf::kAlphaMin, 1.0);
  const brdf::CollocatedLobe lobe = brdf::collocated_lobe(c, alpha);
  const double f0 = brdf::fresnel_cos(1.0, ior).unpolarized();
  const brdf::DopWithSlope dop = brdf::diffuse_dop_cos(c, ior);

  // Polarization axis and its derivatives; undefined (zero) on the pole.
  double c2 = 0.0, s2 = 0.0, dc2_da = 0.0, dc2_db = 0.0, ds2_da = 0.0, ds2_db = 0.0;
  const double r2 = a * a + b * b;
  if (r2 > 0.0) {
    const double q = r2 * r2;
    c2 = -(a * a - b * b) / r2;
    s2 = -2.0 * a * b / r2;
    dc2_da = -4.0 * a * b * b / q;
    dc2_db = 4.0 * a * a * b / q;
    ds2_da = -2.0 * b * (b * b - a * a) / q;
    ds2_db = -2.0 * a * (a * a - b * b) / q;
  }

  const std::array<double, 3> e{flash.x * g.inv_d2, flash.y * g.inv_d2, flash.z * g.inv_d2};
  const int angles = polarized ? 4 : 1;
  for (int j = 0; j < angles; ++j) {
    const auto w = polarizer_weights(kLossAngles[j]);
    const double pj = polarized ? c2 * w.cos2 + s2 * w.sin2 : 0.0;
    const double dpj_da = polarized ? dc2_da * w.cos2 + ds2_da * w.sin2 : 0.0;
    const double dpj_db = polarized ? dc2_db * w.cos2 + ds2_db * w.sin2 : 0.0;
    const double half = polarized ? 0.5 : 1.0;  // filtered images carry half the radiance
    const double mod = 1.0 + dop.value * pj;
    for (int k = 0; k < 3; ++k) {
      const double ld = e[k] * rd[k] * c / kPi;
      const double ls = e[k] * rs[k] * f0 * lobe.value;
      jet.value[j][k] = half * (ld * mod + ls);
      auto& dd = jet.d[j][k];
      dd[k] = half * e[k] * c / kPi * mod;
      dd[3 + k] = half * e[k] * f0 * lobe.value;
      dd[6] = alpha_free ? half * ls * lobe.dlog_dalpha : 0.0;
      const double dv_dc = half * (e[k] * rd[k] / kPi * mod + ld * dop.d_cos * pj + ls * lobe.dlog_dc);
      const double dv_dp = half * ld * dop.value;
      dd[7] = dv_dc * dc_da + dv_dp * dpj_da;
      dd[8] = dv_dc * dc_db + dv_dp * dpj_db;
    }
  }
  return jet;
}

struct LossAndGradients {
  LossBreakdown loss;
  ParamMaps grad;
};

/// Closed-form loss and gradients with respect to every per-pixel parameter,
/// for the prediction `params` rendered at the fixed depth map `depth`.
/// Subgradient zero at residuals within rounding of zero. Pixels outside
/// `mask` get zero gradient. The map term, when enabled, differentiates the decoded normal.
inline LossAndGradients loss_and_gradients(const ParamMaps& params, const ScalarImage& depth, const Observation& obs,
                                           const ShadingSetup& setup, const Mask& mask, const LossOptions& opt = {}) {
  const int w = mask.width(), h = mask.height();
  for (const auto& img : obs.images) require_same_size(mask, img, "loss observation");
  require_same_size(mask, params.diffuse, "loss params");
  require_same_size(mask, depth, "loss depth");
  const std::size_t n = count(mask);
  if (n == 0) fail(ErrorCategory::kInput, "loss: empty mask");
  const bool polarized = opt.render == RenderLoss::kPolarized;
  const RadianceImage full = polarized ? RadianceImage() : obs.full();

  LossAndGradients out{{}, ParamMaps(w, h)};
  // Scale of one residual in the render term, and of one map entry.
  const double render_scale = opt.render_weight / (3.0 * static_cast<double>(n)) * (polarized ? 0.25 : 1.0);
  const double map_scale = opt.map_weight / (5.0 * static_cast<double>(n));

  struct RowSums {
    std::array<double, 4> angle{};
    double map = 0.0;
  };
  std::vector<RowSums> rows(static_cast<std::size_t>(h));
  parallel_for(0, h, [&](int y) {
    RowSums& acc = rows[static_cast<std::size_t>(y)];
    for (int x = 0; x < w; ++x) {
      const std::size_t i = mask.index(x, y);
      if (!mask[i][0]) continue;
      const PixelGeometry g = pixel_geometry(setup.camera, x, y, depth[i][0]);
      const auto& ab = params.normal[i];
      const PixelJet jet = render_pixel_jet(params.diffuse[i], params.specular[i], params.roughness[i][0], ab[0],
                                            ab[1], g, setup.flash.intensity, setup.ior, polarized);
      std::array<double, PixelJet::kParams> gsum{};
      for (int j = 0; j < (polarized ? 4 : 1); ++j) {
        for (int k = 0; k < 3; ++k) {
          const double target = polarized ? obs.images[j][i][k] : full[i][k];
          const double r = jet.value[j][k] - target;
          acc.angle[j] += std::abs(r);
          const double sgn = detail::residual_sign(r, target);
          if (sgn == 0.0) continue;
          for (int p = 0; p < PixelJet::kParams; ++p) gsum[p] += sgn * jet.d[j][k][p];
        }
      }
      auto& gd = out.grad.diffuse[i];
      auto& gs = out.grad.specular[i];
      for (int k = 0; k < 3; ++k) {
        gd[k] = render_scale * gsum[k];
        gs[k] = render_scale * gsum[3 + k];
      }
      out.grad.roughness[i][0] = render_scale * gsum[6];
      out.grad.normal[i] = {render_scale * gsum[7], render_scale * gsum[8]};

      if (opt.gt != nullptr) {
        const SvbrdfMaps& gt = *opt.gt;
        for (int k = 0; k < 3; ++k) {
          const double rdk = params.diffuse[i][k] - gt.diffuse[i][k];
          const double rsk = params.specular[i][k] - gt.specular[i][k];
          acc.map += std::abs(rdk) / 3.0 + std::abs(rsk) / 3.0;
          gd[k] += map_scale / 3.0 * detail::sign(rdk);
          gs[k] += map_scale / 3.0 * detail::sign(rsk);
        }
        const double rr = params.roughness[i][0] - gt.roughness[i][0];
        acc.map += std::abs(rr);
        out.grad.roughness[i][0] += map_scale * detail::sign(rr);
        const double a = ab[0], b = ab[1];
        const double den = 1.0 + a * a + b * b, d2 = den * den;
        const Vec3 nrm = normal_from_stereo(a, b);
        const Vec3 dn_da{2.0 * (1.0 - a * a + b * b) / d2, -4.0 * a * b / d2, -4.0 * a / d2};
        const Vec3 dn_db{-4.0 * a * b / d2, 2.0 * (1.0 + a * a - b * b) / d2, -4.0 * b / d2};
        for (int k = 0; k < 3; ++k) {
          const double rn = nrm[k] - gt.normal[i][k];
          acc.map += std::abs(rn) / 3.0;
          const double sgn = detail::sign(rn) * map_scale / 3.0;
          out.grad.normal[i][0] += sgn * dn_da[k];
          out.grad.normal[i][1] += sgn * dn_db[k];
        }
        acc.map += std::abs(depth[i][0] - gt.depth[i][0]);
      }
    }
  });

  LossBreakdown& lb = out.loss;
  RowSums total;
  for (const auto& r : rows) {
    for (int j = 0; j < 4; ++j) total.angle[j] += r.angle[j];
    total.map += r.map;
  }
  const double nn = static_cast<double>(n);
  if (polarized) {
    for (int j = 0; j < 4; ++j) {
      lb.per_angle[j] = total.angle[j] / (3.0 * nn);
      lb.polarized_render_term += 0.25 * lb.per_angle[j];
    }
  } else {
    lb.plain_render_term = total.angle[0] / (3.0 * nn);
  }
  if (opt.gt != nullptr) lb.l1_map_term = total.map / (5.0 * nn);
  lb.total = opt.render_weight * (polarized ? lb.polarized_render_term : lb.plain_render_term) +
             (opt.gt != nullptr ? opt.map_weight * lb.l1_map_term : 0.0);
  return out;
}

/// Gradients of polarized_render_loss for `pred` (its normals re-encoded
/// stereographically, depth held fixed).
inline ParamMaps loss_gradients(const SvbrdfMaps& pred, const Observation& obs, const ShadingSetup& setup,
                                const Mask& mask, const LossOptions& opt = {}) {
  detail::check_loss_inputs(pred, obs, mask);
  return loss_and_gradients(params_from_maps(pred), pred.depth, obs, setup, mask, opt).grad;
}

}  // namespace polarcap::inverse
