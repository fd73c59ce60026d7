// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

// Per-pixel recovery of the five maps from one flash polarization capture:
// closed-form initialization from the polarization cues, then Adam on the
// polarized rendering loss plus a total-variation prior.

#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "polarcap/brdf.hpp"
#include "polarcap/core/error.hpp"
#include "polarcap/core/hash.hpp"
#include "polarcap/core/image.hpp"
#include "polarcap/core/log.hpp"
#include "polarcap/cues.hpp"
#include "polarcap/inverse/integrate.hpp"
#include "polarcap/inverse/loss.hpp"
#include "polarcap/stokes.hpp"
#include "polarcap/svbrdf_maps.hpp"

namespace polarcap::inverse {

enum class FitMode {
  kFull,              // polarization init + polarized loss
  kNoPolarizedLoss,   // polarization init + plain loss
  kNoPolarization,    // frontal init + plain loss
};

constexpr std::string_view to_string(FitMode m) {
  switch (m) {
    case FitMode::kFull: return "full";
    case FitMode::kNoPolarizedLoss: return "no-polarized-loss";
    case FitMode::kNoPolarization: return "no-polarization";
  }
  return "full";
}

inline FitMode fit_mode_from(std::string_view s) {
  for (FitMode m : {FitMode::kFull, FitMode::kNoPolarizedLoss, FitMode::kNoPolarization}) {
    if (s == to_string(m)) return m;
  }
  fail(ErrorCategory::kConfig, "unknown fit mode: " + std::string(s));
}

struct FitConfig {
  int iterations = 500;
  double step = 1e-2;        // initial Adam step
  double final_step = 1e-4;  // geometric decay reaches this on the last iteration
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double tv_weight = 1e-3;   // anisotropic TV on normals and roughness
  double tv_specular_weight = 0.0;  // optional TV on the specular level
  bool gray_specular = true;  // dielectric specular is achromatic
  double max_zenith_deg = 85.0;
  double working_depth = 3.0;  // plane depth when no depth map is supplied
  int divergence_window = 50;
  double tolerance = 0.0;    // relative best-loss improvement; 0 disables early stop
  int patience = 100;
  std::uint64_t seed = 0;
  FitMode mode = FitMode::kFull;
  double ior = brdf::kDefaultIor;

  void validate() const {
    if (iterations < 1) fail(ErrorCategory::kConfig, "fit: iterations must be >= 1");
    if (!(step > 0.0) || !(final_step > 0.0)) fail(ErrorCategory::kConfig, "fit: steps must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
      fail(ErrorCategory::kConfig, "fit: Adam betas must be in [0, 1)");
    }
    if (!(tv_weight >= 0.0) || !(tv_specular_weight >= 0.0)) fail(ErrorCategory::kConfig, "fit: TV weights must be >= 0");
    if (!(max_zenith_deg > 0.0 && max_zenith_deg < 90.0)) fail(ErrorCategory::kConfig, "fit: max_zenith_deg in (0, 90)");
    if (!(working_depth > 0.0)) fail(ErrorCategory::kConfig, "fit: working_depth must be > 0");
    if (divergence_window < 1) fail(ErrorCategory::kConfig, "fit: divergence_window must be >= 1");
    if (!(tolerance >= 0.0) || patience < 1) fail(ErrorCategory::kConfig, "fit: tolerance >= 0, patience >= 1");
    if (!(ior > 1.0)) fail(ErrorCategory::kConfig, "fit: ior must be > 1");
  }

  /// Canonical text form; its hash stamps fit reports.
  std::string canonical() const {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "iterations=%d;step=%.17g;final_step=%.17g;beta1=%.17g;beta2=%.17g;eps=%.17g;tv=%.17g;tvs=%.17g;"
                  "gray=%d;zmax=%.17g;wd=%.17g;div=%d;tol=%.17g;pat=%d;seed=%llu;mode=%s;ior=%.17g",
                  iterations, step, final_step, beta1, beta2, adam_eps, tv_weight, tv_specular_weight, gray_specular ? 1 : 0,
                  max_zenith_deg, working_depth, divergence_window, tolerance, patience,
                  static_cast<unsigned long long>(seed), std::string(to_string(mode)).c_str(), ior);
    return buf;
  }
  std::string hash() const { return hex64(fnv1a(canonical())); }
};

/// Everything the fit consumes. Cues default to those computed from the
/// capture when left empty.
struct FitInputs {
  CaptureSet capture;
  ShadingSetup setup;
  Mask mask;
  std::optional<NormalizedStokesMap> stokes_cue;
  std::optional<DiffuseColorMap> diffuse_cue;
  std::optional<ScalarImage> depth;  // fixed geometry, e.g. a G-buffer depth map
};

struct FitReport {
  std::vector<double> loss_curve;  // objective per iteration, before the step
  std::vector<double> best_curve;  // best-so-far objective
  double initial_loss = 0.0;
  double best_loss = 0.0;
  int best_iteration = 0;
  int iterations_run = 0;
  LossBreakdown final_terms;  // render terms of the returned parameters
  double tv_term = 0.0;
  double seconds = 0.0;
  std::string config_hash;
  std::string stop_reason;
};

struct FitResult {
  SvbrdfMaps maps;
  FitReport report;
};

namespace detail {

/// Normals from a depth map, by differences of back-projected points.
/// Central where both neighbors are covered, one-sided otherwise.
inline RgbImage normals_from_depth(const ScalarImage& depth, const Mask& mask, const render::Camera& cam) {
  const int w = mask.width(), h = mask.height();
  RgbImage out(w, h);
  const auto inside = [&](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h && mask(x, y)[0]; };
  const auto point = [&](int x, int y) { return cam.point_at_depth(x, y, depth(x, y)[0]); };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)[0]) continue;
      const Vec3 p = point(x, y);
      const Vec3 px1 = inside(x + 1, y) ? point(x + 1, y) : p;
      const Vec3 px0 = inside(x - 1, y) ? point(x - 1, y) : p;
      const Vec3 py1 = inside(x, y - 1) ? point(x, y - 1) : p;  // up
      const Vec3 py0 = inside(x, y + 1) ? point(x, y + 1) : p;
      Vec3 n = cross(px1 - px0, py1 - py0);
      if (!(length(n) > 0.0)) n = -p;
      n = normalize(n);
      if (dot(n, p) > 0.0) n = -n;
      out(x, y) = {n.x, n.y, n.z};
    }
  }
  return out;
}

/// Normals with image-plane azimuth psi making cosine c with the unit view
/// direction v. Up to two solutions, zenith in [0, zmax]; if c is out of
/// reach the closest achievable normal is returned.
inline std::vector<Vec3> normals_with_view_cosine(double psi, double c, const Vec3& v, double zmax) {
  const double A = std::cos(psi) * v.x + std::sin(psi) * v.y;
  const double B = v.z;
  const double r = std::hypot(A, B);
  const double delta = std::atan2(A, B);
  std::vector<double> betas;
  if (c >= r) {
    betas.push_back(delta);
  } else {
    const double spread = std::acos(std::clamp(c / r, -1.0, 1.0));
    betas = {delta + spread, delta - spread};
  }
  std::vector<Vec3> out;
  for (double b : betas) {
    if (b < 0.0 || b > zmax) continue;
    out.push_back({std::sin(b) * std::cos(psi), std::sin(b) * std::sin(psi), std::cos(b)});
  }
  if (out.empty()) {
    const double b = std::clamp(delta, 0.0, zmax);
    out.push_back({std::sin(b) * std::cos(psi), std::sin(b) * std::sin(psi), std::cos(b)});
  }
  return out;
}

/// Least-squares line b = slope * a + intercept through three points.
struct Line {
  double slope = 0.0;
  double intercept = 0.0;
  bool ok = false;
};

inline Line fit_line(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  const double ma = (a[0] + a[1] + a[2]) / 3.0, mb = (b[0] + b[1] + b[2]) / 3.0;
  double saa = 0.0, sab = 0.0;
  for (int k = 0; k < 3; ++k) {
    saa += (a[k] - ma) * (a[k] - ma);
    sab += (a[k] - ma) * (b[k] - mb);
  }
  Line l;
  // Channels too similar to separate diffuse from specular.
  if (!(saa > 1e-6 * ma * ma) || !(ma > 0.0)) return l;
  l.slope = sab / saa;
  l.intercept = mb - l.slope * ma;
  l.ok = l.slope > 1.0;
  return l;
}

inline double stereo_radius_limit(double zmax_deg) { return std::tan(0.5 * deg_to_rad(zmax_deg)); }

/// Keeps parameters feasible: albedos in [0,1], roughness in [alpha_min,1],
/// normal zenith at most zmax.
inline void project(ParamMaps& p, const Mask& mask, double rmax) {
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i][0]) continue;
    for (int k = 0; k < 3; ++k) {
      p.diffuse[i][k] = std::clamp(p.diffuse[i][k], 0.0, 1.0);
      p.specular[i][k] = std::clamp(p.specular[i][k], 0.0, 1.0);
    }
    p.roughness[i][0] = std::clamp(p.roughness[i][0], brdf::kAlphaMin, 1.0);
    const double r = std::hypot(p.normal[i][0], p.normal[i][1]);
    if (r > rmax) {
      p.normal[i][0] *= rmax / r;
      p.normal[i][1] *= rmax / r;
    }
  }
}

/// Anisotropic TV over 4-neighbor pairs inside the mask, on (a, b) and
/// roughness, plus optionally the specular albedo, normalized by the pixel
/// count. Adds its gradient into `g` when given.
inline double tv_term(const ParamMaps& p, const Mask& mask, double weight, double spec_weight, ParamMaps* g) {
  if (weight == 0.0 && spec_weight == 0.0) return 0.0;
  const int w = mask.width(), h = mask.height();
  const double scale = weight / static_cast<double>(count(mask));
  const double spec_scale = spec_weight / (3.0 * static_cast<double>(count(mask)));
  double sum = 0.0, sum_spec = 0.0;
  const auto pair = [&](std::size_t i, std::size_t j) {
    const double d[3] = {p.normal[j][0] - p.normal[i][0], p.normal[j][1] - p.normal[i][1],
                         p.roughness[j][0] - p.roughness[i][0]};
    for (double v : d) sum += std::abs(v);
    if (g != nullptr) {
      for (int c = 0; c < 2; ++c) {
        const double s = scale * sign(d[c]);
        g->normal[j][c] += s;
        g->normal[i][c] -= s;
      }
      const double s = scale * sign(d[2]);
      g->roughness[j][0] += s;
      g->roughness[i][0] -= s;
    }
    if (spec_weight == 0.0) return;
    for (int k = 0; k < 3; ++k) {
      const double ds = p.specular[j][k] - p.specular[i][k];
      sum_spec += std::abs(ds);
      if (g == nullptr) continue;
      const double t = spec_scale * sign(ds);
      g->specular[j][k] += t;
      g->specular[i][k] -= t;
    }
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = mask.index(x, y);
      if (!mask[i][0]) continue;
      if (x + 1 < w && mask[i + 1][0]) pair(i, i + 1);
      if (y + 1 < h && mask(x, y + 1)[0]) pair(i, mask.index(x, y + 1));
    }
  }
  return scale * sum + spec_scale * sum_spec;
}

}  // namespace detail

/// The specular level rho_s F0 S(c, alpha) only fixes rho_s for a given
/// alpha. Pick the single alpha under which the implied rho_s is most
/// uniform over the mask (mean absolute deviation from the median, relative);
/// 0.5 when no pixel shows a specular component.
inline double initial_roughness(const ScalarImage& view_cos, const ScalarImage& spec_level, const Mask& mask,
                                double f0) {
  std::vector<std::size_t> pix;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i][0] && spec_level[i][0] > 0.0) pix.push_back(i);
  }
  if (pix.size() < 16) return 0.5;
  double best_alpha = 0.5, best_spread = std::numeric_limits<double>::infinity();
  std::vector<double> rs(pix.size());
  for (int step = 0; step <= 98; ++step) {
    const double alpha = 0.02 + 0.01 * step;
    for (std::size_t q = 0; q < pix.size(); ++q) {
      rs[q] = spec_level[pix[q]][0] / (f0 * brdf::collocated_lobe(view_cos[pix[q]][0], alpha).value);
    }
    std::vector<double> sorted = rs;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
    const double med = sorted[sorted.size() / 2];
    if (!(med > 0.0) || med > 1.0) continue;  // infeasible albedo level
    double dev = 0.0;
    for (double v : rs) dev += std::abs(v - med);
    const double spread = dev / (med * static_cast<double>(rs.size()));
    if (spread < best_spread) {
      best_spread = spread;
      best_alpha = alpha;
    }
  }
  return best_alpha;
}

/// Closed-form starting point. Azimuth from the Stokes cue (aolp - 90 deg),
/// pi ambiguity resolved by depth-derived normals when a depth map is given,
/// otherwise away from the mask centroid. With gray specular, the per-channel
/// polarized amplitude a_k and intensity b_k (both divided by irradiance)
/// satisfy b_k = a_k / dop + K, which yields the view cosine through the
/// inverse of the diffuse dop curve, the diffuse albedo and the specular
/// level K. Roughness comes from initial_roughness.
inline ParamMaps initialize_params(const FitInputs& in, const ScalarImage& depth, const FitConfig& cfg) {
  const Mask& mask = in.mask;
  const int w = mask.width(), h = mask.height();
  const render::Camera& cam = in.setup.camera;
  const StokesImage s = compute_stokes(in.capture);
  const NormalizedStokesMap cue = in.stokes_cue ? *in.stokes_cue : normalize_stokes(s);
  const bool use_polarization = cfg.mode != FitMode::kNoPolarization;
  const double zmax = deg_to_rad(cfg.max_zenith_deg);
  const double f0 = brdf::fresnel_cos(1.0, cfg.ior).unpolarized();
  const double dop_cap = brdf::diffuse_dop(zmax, cfg.ior);

  std::optional<RgbImage> depth_normals;
  if (in.depth) depth_normals = detail::normals_from_depth(depth, mask, cam);
  double cx = 0.0, cy = 0.0;
  {
    std::size_t n = 0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (!mask(x, y)[0]) continue;
        cx += x;
        cy += y;
        ++n;
      }
    }
    cx /= static_cast<double>(n);
    cy /= static_cast<double>(n);
  }

  ParamMaps p(w, h);
  ScalarImage view_cos(w, h), spec_levels(w, h);
  parallel_for(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = mask.index(x, y);
      if (!mask[i][0]) continue;
      const PixelGeometry g = pixel_geometry(cam, x, y, depth[i][0]);
      const Vec3& flash = in.setup.flash.intensity;
      std::array<double, 3> a{}, b{};
      for (int k = 0; k < 3; ++k) {
        const double e = flash[k] * g.inv_d2;
        a[k] = std::hypot(s.s1[i][k], s.s2[i][k]) / e;
        b[k] = s.s0[i][k] / e;
      }

      Vec3 n{0.0, 0.0, 1.0};
      double spec_level = 0.0;  // rho_s F0 S
      if (use_polarization) {
        const detail::Line line = detail::fit_line(a, b);
        double dop = 0.0;
        if (line.ok) {
          dop = 1.0 / line.slope;
          spec_level = std::max(0.0, line.intercept);
        } else {
          const double sb = b[0] + b[1] + b[2];
          dop = sb > 0.0 ? (a[0] + a[1] + a[2]) / sb : 0.0;
        }
        const double c = brdf::invert_diffuse_dop(std::clamp(dop, 0.0, dop_cap), cfg.ior);
        if (cue.valid[i][0]) {
          const double aolp = 0.5 * std::atan2(cue.u[i][1], cue.u[i][0]);
          const double psi0 = aolp - 0.5 * kPi;
          std::vector<Vec3> cands;
          for (double psi : {psi0, psi0 + kPi}) {
            for (const Vec3& m : detail::normals_with_view_cosine(psi, c, g.view, zmax)) cands.push_back(m);
          }
          if (depth_normals) {
            const Vec3 ref{(*depth_normals)[i][0], (*depth_normals)[i][1], (*depth_normals)[i][2]};
            n = *std::max_element(cands.begin(), cands.end(),
                                  [&](const Vec3& l, const Vec3& r) { return dot(l, ref) < dot(r, ref); });
          } else {
            // Outward from the centroid in the image plane (image rows run down).
            const double ox = x - cx, oy = cy - y;
            const auto outward = [&](const Vec3& m) { return m.x * ox + m.y * oy; };
            n = cands.front();
            for (const Vec3& m : cands) {
              if (outward(m) > outward(n) + 1e-12) n = m;
            }
          }
        } else {
          n = g.view;
        }
      }
      const double c = std::max(dot(n, g.view), 1e-3);
      p.normal[i] = stereo_from_normal(n);
      for (int k = 0; k < 3; ++k) p.diffuse[i][k] = std::clamp(kPi * (b[k] - spec_level) / c, 0.0, 1.0);
      view_cos[i][0] = c;
      spec_levels[i][0] = spec_level;
    }
  });

  const double alpha = initial_roughness(view_cos, spec_levels, mask, f0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i][0]) continue;
    const double lobe = brdf::collocated_lobe(view_cos[i][0], alpha).value;
    const double k = spec_levels[i][0];
    const double rs = k > 0.0 ? std::clamp(k / (f0 * lobe), 0.0, 1.0) : 0.04;
    p.roughness[i][0] = alpha;
    p.specular[i] = {rs, rs, rs};
  }
  return p;
}

/// Recovers the five maps. Deterministic for a fixed configuration and
/// independent of the thread count. Throws kDivergence when the objective
/// rises for cfg.divergence_window consecutive iterations.
inline FitResult fit_svbrdf(const FitInputs& in, const FitConfig& cfg = {}) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  in.capture.validate();
  const Mask& mask = in.mask;
  require_same_size(mask, in.capture.i0, "fit mask");
  if (count(mask) == 0) fail(ErrorCategory::kInput, "fit: empty mask");
  if (in.setup.camera.width != mask.width() || in.setup.camera.height != mask.height()) {
    fail(ErrorCategory::kInput, "fit: camera resolution does not match the capture");
  }
  const int w = mask.width(), h = mask.height();
  ScalarImage depth(w, h, cfg.working_depth);
  if (in.depth) {
    require_same_size(mask, *in.depth, "fit depth");
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i][0] && !((*in.depth)[i][0] > 0.0)) fail(ErrorCategory::kInput, "fit: depth must be > 0 on the mask");
    }
    depth = *in.depth;
  }

  const Observation obs = Observation::from_capture(in.capture);
  LossOptions lopt;
  lopt.render = cfg.mode == FitMode::kFull ? RenderLoss::kPolarized : RenderLoss::kPlain;
  const double rmax = detail::stereo_radius_limit(cfg.max_zenith_deg);

  ParamMaps params = initialize_params(in, depth, cfg);
  detail::project(params, mask, rmax);

  // Flat parameter views: per pixel diffuse (3), specular (1 or 3), roughness, a, b.
  std::vector<std::size_t> pix;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i][0]) pix.push_back(i);
  }
  const int nspec = cfg.gray_specular ? 1 : 3;
  const int stride = 3 + nspec + 3;
  const auto gather = [&](const ParamMaps& p, bool gradient, std::vector<double>& out) {
    out.resize(pix.size() * static_cast<std::size_t>(stride));
    for (std::size_t q = 0; q < pix.size(); ++q) {
      const std::size_t i = pix[q];
      double* o = &out[q * static_cast<std::size_t>(stride)];
      for (int k = 0; k < 3; ++k) o[k] = p.diffuse[i][k];
      if (cfg.gray_specular) {
        o[3] = gradient ? p.specular[i][0] + p.specular[i][1] + p.specular[i][2] : p.specular[i][0];
      } else {
        for (int k = 0; k < 3; ++k) o[3 + k] = p.specular[i][k];
      }
      o[3 + nspec] = p.roughness[i][0];
      o[4 + nspec] = p.normal[i][0];
      o[5 + nspec] = p.normal[i][1];
    }
  };
  const auto scatter = [&](const std::vector<double>& in_vec, ParamMaps& p) {
    for (std::size_t q = 0; q < pix.size(); ++q) {
      const std::size_t i = pix[q];
      const double* o = &in_vec[q * static_cast<std::size_t>(stride)];
      for (int k = 0; k < 3; ++k) {
        p.diffuse[i][k] = o[k];
        p.specular[i][k] = o[3 + (cfg.gray_specular ? 0 : k)];
      }
      p.roughness[i][0] = o[3 + nspec];
      p.normal[i] = {o[4 + nspec], o[5 + nspec]};
    }
  };

  FitResult result;
  FitReport& rep = result.report;
  rep.config_hash = cfg.hash();
  rep.stop_reason = "budget";

  std::vector<double> x, grad, m1, m2;
  gather(params, false, x);
  m1.assign(x.size(), 0.0);
  m2.assign(x.size(), 0.0);
  ParamMaps best = params;
  double best_obj = std::numeric_limits<double>::infinity();
  double prev_obj = std::numeric_limits<double>::infinity();
  int rising = 0;
  int since_improvement = 0;
  const double decay = cfg.iterations > 1 ? std::pow(cfg.final_step / cfg.step, 1.0 / (cfg.iterations - 1)) : 1.0;

  for (int it = 0; it < cfg.iterations; ++it) {
    LossAndGradients lg = loss_and_gradients(params, depth, obs, in.setup, mask, lopt);
    const double tv = detail::tv_term(params, mask, cfg.tv_weight, cfg.tv_specular_weight, &lg.grad);
    const double obj = lg.loss.total + tv;
    if (!std::isfinite(obj)) fail(ErrorCategory::kDivergence, "fit: non-finite objective at iteration " + std::to_string(it));
    if (it == 0) rep.initial_loss = obj;
    rep.loss_curve.push_back(obj);
    if (obj < best_obj) {
      const bool significant = obj < best_obj * (1.0 - cfg.tolerance);
      best_obj = obj;
      best = params;
      rep.best_iteration = it;
      rep.final_terms = lg.loss;
      rep.tv_term = tv;
      since_improvement = significant ? 0 : since_improvement + 1;
    } else {
      ++since_improvement;
    }
    rep.best_curve.push_back(best_obj);
    rising = obj > prev_obj ? rising + 1 : 0;
    prev_obj = obj;
    rep.iterations_run = it + 1;
    if (rising >= cfg.divergence_window) {
      char msg[256];
      std::snprintf(msg, sizeof msg,
                    "fit diverged: objective rose for %d consecutive iterations (iteration %d, objective %.6g, "
                    "best %.6g at iteration %d)",
                    rising, it, obj, best_obj, rep.best_iteration);
      fail(ErrorCategory::kDivergence, msg);
    }
    if (cfg.tolerance > 0.0 && since_improvement >= cfg.patience) {
      rep.stop_reason = "tolerance";
      break;
    }
    if (it + 1 == cfg.iterations) break;

    gather(lg.grad, true, grad);
    const double lr = cfg.step * std::pow(decay, it);
    const double bc1 = 1.0 - std::pow(cfg.beta1, it + 1);
    const double bc2 = 1.0 - std::pow(cfg.beta2, it + 1);
    for (std::size_t j = 0; j < x.size(); ++j) {
      m1[j] = cfg.beta1 * m1[j] + (1.0 - cfg.beta1) * grad[j];
      m2[j] = cfg.beta2 * m2[j] + (1.0 - cfg.beta2) * grad[j] * grad[j];
      x[j] -= lr * (m1[j] / bc1) / (std::sqrt(m2[j] / bc2) + cfg.adam_eps);
    }
    scatter(x, params);
    detail::project(params, mask, rmax);
    gather(params, false, x);
  }
  rep.best_loss = best_obj;

  SvbrdfMaps& out = result.maps;
  out = SvbrdfMaps(w, h);
  out.mask = mask;
  apply_params(best, out);
  std::vector<double> d;
  for (std::size_t i : pix) d.push_back(depth[i][0]);
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
  out.depth = depth_from_normals(out.normal, mask, in.setup.camera, d[d.size() / 2]);
  rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log::info("fit " + std::string(to_string(cfg.mode)) + ": objective " + std::to_string(rep.initial_loss) + " -> " +
            std::to_string(rep.best_loss));
  return result;
}

}  // namespace polarcap::inverse
