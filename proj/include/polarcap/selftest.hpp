// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

// A quick in-binary invariant suite, run by `polarcap selftest`. Each check
// is small (seconds in total) and independent of the test tree.

#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <unistd.h>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "polarcap/brdf.hpp"
#include "polarcap/fixtures.hpp"
#include "polarcap/inverse/fit.hpp"
#include "polarcap/inverse/integrate.hpp"
#include "polarcap/inverse/loss.hpp"
#include "polarcap/io/png.hpp"
#include "polarcap/stokes.hpp"

namespace polarcap::selftest {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

inline CheckResult stokes_round_trip() {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    CaptureSet c{RadianceImage(8, 8), RadianceImage(8, 8), RadianceImage(8, 8)};
    for (std::size_t i = 0; i < c.i0.size(); ++i) {
      for (int k = 0; k < 3; ++k) {
        // Physical captures: pick (s0, s1, s2) with dop < 1, then filter.
        const double s0 = 0.1 + u(rng), r = s0 * u(rng), a = 2 * kPi * u(rng);
        c.i0[i][k] = 0.5 * (s0 + r * std::cos(a));
        c.i90[i][k] = 0.5 * (s0 - r * std::cos(a));
        c.i45[i][k] = 0.5 * (s0 + r * std::sin(a));
      }
    }
    const StokesImage s = compute_stokes(c);
    const RadianceImage* ref[3] = {&c.i0, &c.i45, &c.i90};
    for (int j = 0; j < 3; ++j) {
      const RadianceImage f = filter_image(s, 45.0 * j);
      for (std::size_t i = 0; i < f.size(); ++i) {
        for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(f[i][k] - (*ref[j])[i][k]) / (*ref[j])[i][k]);
      }
    }
  }
  return {"stokes-round-trip", worst < 1e-9, "worst rel " + num(worst)};
}

inline CheckResult fresnel_physics() {
  const double rp = brdf::fresnel(std::atan(1.5), 1.5).r_p;
  const auto f0 = brdf::fresnel(0.0, 1.5);
  bool mono = true;
  double prev = brdf::diffuse_dop(0.0);
  for (int i = 1; i < 900; ++i) {
    const double d = brdf::diffuse_dop(deg_to_rad(0.1 * i));
    mono = mono && d > prev;
    prev = d;
  }
  const bool ok = rp < 1e-9 && std::abs(f0.r_s - 0.04) < 1e-12 && std::abs(f0.r_p - 0.04) < 1e-12 &&
                  brdf::diffuse_dop(0.0) == 0.0 && mono;
  return {"fresnel-physics", ok, "r_p(brewster) " + num(rp) + ", dop monotone " + (mono ? "yes" : "no")};
}

inline CheckResult render_identities(const fixtures::Fixture& f) {
  const auto& r = f.render;
  double worst = 0.0, max_dop = 0.0;
  for (std::size_t i = 0; i < r.stokes.s0.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      const double s0 = r.stokes.s0[i][k];
      worst = std::max(worst, std::abs(r.capture.i0[i][k] + r.capture.i90[i][k] - s0));
      worst = std::max(worst, std::abs(r.capture.i45[i][k] + r.i135[i][k] - s0));
      if (s0 > 0.0) max_dop = std::max(max_dop, std::hypot(r.stokes.s1[i][k], r.stokes.s2[i][k]) / s0);
    }
  }
  return {"render-identities", worst < 1e-12 && max_dop < 1.0, "pair residual " + num(worst) + ", max dop " + num(max_dop)};
}

inline CheckResult loss_at_truth(const fixtures::Fixture& f) {
  const auto obs = inverse::Observation::from_capture(f.render.capture);
  inverse::ShadingSetup setup{f.scene.camera, f.render.flash, brdf::kDefaultIor};
  const double l = inverse::polarized_render_loss(f.render.gt, obs, setup, f.render.gbuffer.mask).total;
  const auto g = inverse::loss_gradients(f.render.gt, obs, setup, f.render.gbuffer.mask);
  double gmax = 0.0;
  for (std::size_t i = 0; i < g.diffuse.size(); ++i) {
    for (int k = 0; k < 3; ++k) gmax = std::max({gmax, std::abs(g.diffuse[i][k]), std::abs(g.specular[i][k])});
    gmax = std::max({gmax, std::abs(g.roughness[i][0]), std::abs(g.normal[i][0]), std::abs(g.normal[i][1])});
  }
  return {"loss-at-truth", l < 1e-6 && gmax < 1e-6, "loss " + num(l) + ", max |grad| " + num(gmax)};
}

inline CheckResult gradient_vs_differences(const fixtures::Fixture& f) {
  // Perturbed truth: diffuse and roughness shifted so no residual sits at 0.
  SvbrdfMaps pred = f.render.gt;
  const Mask& mask = f.render.gbuffer.mask;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i][0]) continue;
    for (int k = 0; k < 3; ++k) pred.diffuse[i][k] = std::min(1.0, pred.diffuse[i][k] * 1.2 + 0.02);
    pred.roughness[i][0] = std::min(1.0, pred.roughness[i][0] * 1.1);
  }
  const auto obs = inverse::Observation::from_capture(f.render.capture);
  inverse::ShadingSetup setup{f.scene.camera, f.render.flash, brdf::kDefaultIor};
  const auto g = inverse::loss_gradients(pred, obs, setup, mask);
  std::vector<std::size_t> pix;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i][0]) pix.push_back(i);
  }
  int passed = 0, total = 0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t i = pix[(pix.size() * static_cast<std::size_t>(t)) / 20];
    const int k = t % 3;
    const double v = pred.diffuse[i][k], h = 1e-4 * std::max(v, 1e-2);
    SvbrdfMaps a = pred, b = pred;
    a.diffuse[i][k] = v + h;
    b.diffuse[i][k] = v - h;
    const double fd = (inverse::polarized_render_loss(a, obs, setup, mask).total -
                       inverse::polarized_render_loss(b, obs, setup, mask).total) / (2 * h);
    const double an = g.diffuse[i][k];
    ++total;
    if (std::abs(an - fd) <= 1e-4 * std::max(std::abs(fd), 1e-14)) ++passed;
  }
  return {"gradient-vs-differences", passed >= 19, std::to_string(passed) + "/" + std::to_string(total) + " diffuse probes"};
}

inline CheckResult integrate_paraboloid() {
  const int n = 64;
  const double hpx = 2.0 / n;
  RgbImage normals(n, n);
  Mask mask(n, n, 1);
  ScalarImage truth(n, n);
  double mean = 0.0;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double X = -1 + (x + 0.5) * hpx, Y = 1 - (y + 0.5) * hpx;
      const Vec3 nv = normalize({X / 2, Y / 2, 1.0});  // z = -(X^2 + Y^2) / 4
      normals(x, y) = {nv.x, nv.y, nv.z};
      truth(x, y, 0) = -(X * X + Y * Y) / 4;
      mean += truth(x, y, 0);
    }
  }
  mean /= n * n;
  const ScalarImage z = inverse::integrate_normals(normals, mask, hpx);
  double se = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) se += std::pow(z[i][0] - (truth[i][0] - mean), 2);
  const double rmse = std::sqrt(se / (n * n));
  return {"integrate-paraboloid", rmse < 1e-3, "rmse " + num(rmse)};
}

inline CheckResult png16_round_trip() {
  namespace fs = std::filesystem;
  RadianceImage img(16, 16);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 3.7);
  for (auto& p : img.pixels()) p = {u(rng), u(rng), u(rng)};
  img[0] = {3.7, 0.0, 1.0};
  const fs::path path = fs::temp_directory_path() / ("polarcap_selftest_" + std::to_string(::getpid()) + ".png");
  const double scale = io::png16_write(img, path.string());
  const RadianceImage back = io::png16_read(path.string(), scale);
  fs::remove(path);
  double worst = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    for (int k = 0; k < 3; ++k) worst = std::max(worst, std::abs(back[i][k] - img[i][k]));
  }
  const double bound = 0.5 * scale / 65535.0 + 1e-9;
  return {"png16-round-trip", worst <= bound && back[0][0] == 3.7, "max err " + num(worst) + " <= " + num(bound)};
}

inline CheckResult fit_sphere(const fixtures::Fixture& f) {
  inverse::FitConfig cfg;
  cfg.iterations = 150;
  const inverse::FitResult r = inverse::fit_svbrdf(f.fit_inputs(), cfg);
  const double err = mean_angular_error_deg(r.maps.normal, f.render.gt.normal, f.render.gbuffer.mask);
  return {"fit-sphere", err < 3.0, "normal error " + num(err) + " deg"};
}

}  // namespace detail

/// Runs every check; exceptions count as failures.
inline std::vector<CheckResult> run_all() {
  const fixtures::Fixture sphere = fixtures::sphere(32);
  const std::vector<std::pair<std::string, std::function<CheckResult()>>> checks = {
      {"stokes-round-trip", detail::stokes_round_trip},
      {"fresnel-physics", detail::fresnel_physics},
      {"render-identities", [&] { return detail::render_identities(sphere); }},
      {"loss-at-truth", [&] { return detail::loss_at_truth(sphere); }},
      {"gradient-vs-differences", [&] { return detail::gradient_vs_differences(sphere); }},
      {"integrate-paraboloid", detail::integrate_paraboloid},
      {"png16-round-trip", detail::png16_round_trip},
      {"fit-sphere", [&] { return detail::fit_sphere(sphere); }},
  };
  std::vector<CheckResult> out;
  for (const auto& [name, check] : checks) {
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("threw: ") + e.what();
    }
    r.name = name;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace polarcap::selftest
