// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

// Deferred polarized shading under a collocated flash. Total radiance comes
// from the microfacet BRDF; the linear polarization is that of diffusely
// exitant light, oriented perpendicular to the image-plane azimuth of the
// normal. Specular polarization is off unless explicitly enabled.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "polarcap/brdf.hpp"
#include "polarcap/core/image.hpp"
#include "polarcap/core/parallel.hpp"
#include "polarcap/render/camera.hpp"
#include "polarcap/render/rasterize.hpp"
#include "polarcap/stokes.hpp"
#include "polarcap/svbrdf_maps.hpp"

namespace polarcap::render {

struct ShadeOptions {
  bool diffuse_polarization = true;
  bool specular_polarization = false;  // limitation experiments only
  double ior = brdf::kDefaultIor;
};

struct PixelStokes {
  Vec3 s0;
  Vec3 s1;
  Vec3 s2;
};

/// (cos 2psi*, sin 2psi*) for psi* = atan2(n_y, n_x) + 90 degrees. Zero when
/// the normal has no image-plane component.
struct PolarizationAxis {
  double cos2;
  double sin2;
};

inline PolarizationAxis diffuse_polarization_axis(const Vec3& n) {
  const double r2 = n.x * n.x + n.y * n.y;
  if (!(r2 > 0.0)) return {0.0, 0.0};
  return {-(n.x * n.x - n.y * n.y) / r2, -(2.0 * n.x * n.y) / r2};
}

/// Stokes radiance leaving surface point `p` (camera space) lit by the flash.
inline PixelStokes shade_pixel(const brdf::MaterialSample& m, const Vec3& p, const Vec3& flash_intensity,
                               const ShadeOptions& opt = {}) {
  const double dist2 = dot(p, p);
  const Vec3 v = normalize(-p);
  const brdf::BrdfValue f = brdf::eval_brdf(m, v, v);
  const Vec3 irradiance = flash_intensity / dist2;
  const Vec3 ld = hadamard(irradiance, f.diffuse);
  const Vec3 ls = hadamard(irradiance, f.specular);
  PixelStokes out{ld + ls, {}, {}};
  const double c = dot(m.normal, v);
  if (!(c > 0.0)) return out;
  const PolarizationAxis axis = diffuse_polarization_axis(m.normal);
  if (opt.diffuse_polarization) {
    const double dop = brdf::diffuse_dop_cos(c, opt.ior).value;
    out.s1 += ld * (dop * axis.cos2);
    out.s2 += ld * (dop * axis.sin2);
  }
  if (opt.specular_polarization) {
    const auto fr = brdf::fresnel_cos(c, opt.ior);
    const double dop = fr.r_s + fr.r_p > 0.0 ? (fr.r_s - fr.r_p) / (fr.r_s + fr.r_p) : 0.0;
    out.s1 += ls * (dop * axis.cos2);
    out.s2 += ls * (dop * axis.sin2);
  }
  return out;
}

namespace detail {
inline void store(StokesImage& s, std::size_t i, const PixelStokes& p) {
  s.s0[i] = {p.s0.x, p.s0.y, p.s0.z};
  s.s1[i] = {p.s1.x, p.s1.y, p.s1.z};
  s.s2[i] = {p.s2.x, p.s2.y, p.s2.z};
}
}  // namespace detail

/// Shades G-buffer geometry with per-pixel reflectance from `materials`
/// (diffuse, specular, roughness; its normal and depth maps are ignored).
inline StokesImage shade_polarized(const GBuffer& g, const SvbrdfMaps& materials, const FlashLight& flash,
                                   const ShadeOptions& opt = {}) {
  require_same_size(g.mask, materials.mask, "gbuffer/materials");
  StokesImage s(g.width(), g.height());
  parallel_for(0, g.height(), [&](int y) {
    for (int x = 0; x < g.width(); ++x) {
      const std::size_t i = g.mask.index(x, y);
      if (!g.mask[i][0]) continue;
      brdf::MaterialSample m = materials.material_at(i, opt.ior);
      m.normal = g.normal_at(i);
      detail::store(s, i, shade_pixel(m, g.position_at(i), flash.intensity, opt));
    }
  });
  return s;
}

/// Shades the maps themselves: positions reconstructed from the depth map
/// along the camera rays, normals from the normal map.
inline StokesImage shade_maps(const SvbrdfMaps& maps, const Camera& cam, const FlashLight& flash,
                              const ShadeOptions& opt = {}) {
  maps.validate();
  StokesImage s(maps.width(), maps.height());
  parallel_for(0, maps.height(), [&](int y) {
    for (int x = 0; x < maps.width(); ++x) {
      const std::size_t i = maps.mask.index(x, y);
      if (!maps.mask[i][0]) continue;
      detail::store(s, i, shade_pixel(maps.material_at(i, opt.ior), cam.point_at_depth(x, y, maps.depth[i][0]),
                                       flash.intensity, opt));
    }
  });
  return s;
}

/// Ground-truth maps of a rasterized scene: reflectance from the texture set
/// at the interpolated UVs, shape from the G-buffer.
inline SvbrdfMaps material_maps(const Scene& scene, const GBuffer& g) {
  SvbrdfMaps m(g.width(), g.height());
  for (std::size_t i = 0; i < g.mask.size(); ++i) {
    if (!g.mask[i][0]) continue;
    const MaterialPoint mp = sample_material(scene.material, g.uv[i][0], g.uv[i][1], scene.uv);
    m.diffuse[i] = {mp.diffuse.x, mp.diffuse.y, mp.diffuse.z};
    m.specular[i] = {mp.specular.x, mp.specular.y, mp.specular.z};
    m.roughness[i][0] = mp.roughness;
    m.normal[i] = g.normal[i];
    m.depth[i][0] = g.depth[i][0];
    m.mask[i][0] = 1;
  }
  return m;
}

struct RenderOptions {
  ShadeOptions shade;
  bool auto_exposure = true;
  double exposure_target = 1.0;  // 99th-percentile covered s0 after scaling
  std::vector<double> angles{0.0, 45.0, 90.0, 135.0};
};

struct RenderResult {
  CaptureSet capture;                 // 0, 45, 90 degrees
  RadianceImage i135;
  std::vector<RadianceImage> filtered;  // one per RenderOptions::angles entry
  StokesImage stokes;
  GBuffer gbuffer;
  SvbrdfMaps gt;
  FlashLight flash;  // effective flash after auto exposure
};

inline double percentile_s0(const StokesImage& s, const Mask& mask, double q) {
  std::vector<double> v;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i][0]) v.push_back(std::max({s.s0[i][0], s.s0[i][1], s.s0[i][2]}));
  }
  if (v.empty()) return 0.0;
  const std::size_t k = std::min(v.size() - 1, static_cast<std::size_t>(q * (v.size() - 1) + 0.5));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

inline RenderResult render_capture(const Scene& scene, const RenderOptions& opt = {}) {
  scene.validate();
  RenderResult r;
  r.gbuffer = rasterize(scene);
  r.gt = material_maps(scene, r.gbuffer);
  r.flash = scene.flash;
  r.stokes = shade_polarized(r.gbuffer, r.gt, r.flash, opt.shade);
  if (opt.auto_exposure) {
    const double p99 = percentile_s0(r.stokes, r.gbuffer.mask, 0.99);
    if (p99 > 0.0) {
      r.flash.intensity *= opt.exposure_target / p99;
      r.stokes = shade_polarized(r.gbuffer, r.gt, r.flash, opt.shade);
    }
  }
  for (double a : opt.angles) r.filtered.push_back(filter_image(r.stokes, a));
  r.capture = {filter_image(r.stokes, 0.0), filter_image(r.stokes, 45.0), filter_image(r.stokes, 90.0)};
  r.i135 = filter_image(r.stokes, 135.0);
  return r;
}

/// Unpolarized total radiance of the maps under a point light.
inline RadianceImage render_relit(const SvbrdfMaps& maps, const PointLight& light, const Camera& cam,
                                  double ior = brdf::kDefaultIor) {
  maps.validate();
  RadianceImage out(maps.width(), maps.height());
  parallel_for(0, maps.height(), [&](int y) {
    for (int x = 0; x < maps.width(); ++x) {
      const std::size_t i = maps.mask.index(x, y);
      if (!maps.mask[i][0]) continue;
      const Vec3 p = cam.point_at_depth(x, y, maps.depth[i][0]);
      const Vec3 to_light = light.position - p;
      const double d2 = dot(to_light, to_light);
      const brdf::BrdfValue f = brdf::eval_brdf(maps.material_at(i, ior), normalize(to_light), normalize(-p));
      const Vec3 rad = hadamard(light.intensity / d2, f.diffuse + f.specular);
      out[i] = {rad.x, rad.y, rad.z};
    }
  });
  return out;
}

}  // namespace polarcap::render
