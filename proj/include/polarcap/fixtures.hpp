// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

// Small deterministic scenes used by tests, the self-test and the demo.

#pragma once

#include <string>

#include "polarcap/inverse/fit.hpp"
#include "polarcap/render/material.hpp"
#include "polarcap/render/mesh.hpp"
#include "polarcap/render/rasterize.hpp"
#include "polarcap/render/shade.hpp"

namespace polarcap::fixtures {

struct Fixture {
  std::string name;
  render::Scene scene;
  render::RenderResult render;

  /// Fit inputs with the G-buffer depth as fixed geometry.
  inverse::FitInputs fit_inputs(bool with_depth = true) const {
    inverse::FitInputs in;
    in.capture = render.capture;
    in.setup.camera = scene.camera;
    in.setup.flash = render.flash;
    in.mask = render.gbuffer.mask;
    if (with_depth) in.depth = render.gbuffer.depth;
    return in;
  }
};

inline Fixture make_fixture(std::string name, render::Scene scene) {
  Fixture f{std::move(name), std::move(scene), {}};
  f.render = render::render_capture(f.scene);
  return f;
}

/// Unit sphere three units in front of the camera, uniform colored plastic.
inline Fixture sphere(int res = 64) {
  render::Scene s;
  s.mesh = render::make_icosphere(4);
  s.camera.width = s.camera.height = res;
  s.material = render::constant_material({0.70, 0.40, 0.20}, {0.30, 0.30, 0.30}, 0.30, "sphere-plastic");
  return make_fixture("sphere", std::move(s));
}

/// Square with a textured diffuse albedo and uniform specular level and
/// roughness, tilted away from the camera so that every pixel sees an
/// oblique normal; a frontal plane would carry no polarization azimuth.
inline Fixture textured_plane(int res = 64, std::uint64_t material_seed = 11) {
  render::Scene s;
  s.mesh = render::make_plane(2.0, 8);
  s.rotation = (Quat::from_axis_angle({0.0, 1.0, 0.0}, deg_to_rad(25.0)) *
                Quat::from_axis_angle({1.0, 0.0, 0.0}, deg_to_rad(-35.0)))
                   .normalized();
  s.camera.width = s.camera.height = res;
  s.material = render::procedural_material(material_seed);
  s.material.specular = RgbImage(1, 1, 0.3);
  s.material.roughness = ScalarImage(1, 1, 0.35);
  return make_fixture("textured-plane", std::move(s));
}

}  // namespace polarcap::fixtures
