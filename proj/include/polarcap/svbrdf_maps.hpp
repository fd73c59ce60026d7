// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "polarcap/brdf.hpp"
#include "polarcap/core/image.hpp"
#include "polarcap/core/vec.hpp"

namespace polarcap {

/// The five appearance and shape maps, plus the object mask they live on.
/// Normals are camera-space unit vectors (x right, y up, z toward the camera).
/// Depth is distance along the viewing axis in scene units.
struct SvbrdfMaps {
  RgbImage diffuse;
  RgbImage specular;
  ScalarImage roughness;
  RgbImage normal;
  ScalarImage depth;
  Mask mask;

  SvbrdfMaps() = default;
  SvbrdfMaps(int w, int h)
      : diffuse(w, h), specular(w, h), roughness(w, h), normal(w, h), depth(w, h), mask(w, h) {}

  int width() const { return mask.width(); }
  int height() const { return mask.height(); }

  Vec3 normal_at(std::size_t i) const { return {normal[i][0], normal[i][1], normal[i][2]}; }
  void set_normal(std::size_t i, const Vec3& n) { normal[i] = {n.x, n.y, n.z}; }

  brdf::MaterialSample material_at(std::size_t i, double ior = brdf::kDefaultIor) const {
    brdf::MaterialSample m;
    m.diffuse_albedo = {diffuse[i][0], diffuse[i][1], diffuse[i][2]};
    m.specular_albedo = {specular[i][0], specular[i][1], specular[i][2]};
    m.roughness = roughness[i][0];
    m.normal = normal_at(i);
    m.ior = ior;
    return m;
  }

  void validate() const {
    const auto check = [&](const auto& img, const char* what) { require_same_size(mask, img, what); };
    check(diffuse, "maps diffuse");
    check(specular, "maps specular");
    check(roughness, "maps roughness");
    check(normal, "maps normal");
    check(depth, "maps depth");
  }
};

/// Mean angular error in degrees between two normal maps over a mask.
inline double mean_angular_error_deg(const RgbImage& a, const RgbImage& b, const Mask& mask) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i][0]) continue;
    const Vec3 u = normalize({a[i][0], a[i][1], a[i][2]});
    const Vec3 v = normalize({b[i][0], b[i][1], b[i][2]});
    sum += rad_to_deg(std::acos(std::clamp(dot(u, v), -1.0, 1.0)));
    ++n;
  }
  return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

}  // namespace polarcap
