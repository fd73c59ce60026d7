// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>

#include "polarcap/core/error.hpp"
#include "polarcap/core/vec.hpp"

namespace polarcap::render {

/// Pinhole camera at the origin looking down -z with +y up. `fov_deg` is the
/// vertical field of view; pixels are square.
struct Camera {
  double fov_deg = 40.0;
  int width = 512;
  int height = 512;

  void validate() const {
    if (!(fov_deg >= 10.0 && fov_deg <= 120.0)) {
      fail(ErrorCategory::kConfig, "camera fov must be in [10, 120] degrees");
    }
    if (width < 1 || height < 1) fail(ErrorCategory::kConfig, "camera resolution must be >= 1");
  }

  double tan_half_fov() const { return std::tan(deg_to_rad(0.5 * fov_deg)); }
  double aspect() const { return static_cast<double>(width) / height; }

  /// Unnormalized direction through the pixel center, with z = -1.
  Vec3 ray(double px, double py) const {
    const double t = tan_half_fov();
    const double x = (2.0 * (px + 0.5) / width - 1.0) * t * aspect();
    const double y = (1.0 - 2.0 * (py + 0.5) / height) * t;
    return {x, y, -1.0};
  }

  Vec3 ray_dir(int px, int py) const { return normalize(ray(px, py)); }

  /// Camera-space point on the pixel ray at view depth `depth` (distance along -z).
  Vec3 point_at_depth(int px, int py, double depth) const { return ray(px, py) * depth; }

  /// Continuous pixel coordinates of a camera-space point (pixel centers at +0.5).
  struct Projected {
    double sx;
    double sy;
    double depth;
  };
  Projected project(const Vec3& p) const {
    const double depth = -p.z;
    const double t = tan_half_fov();
    const double nx = p.x / (depth * t * aspect());
    const double ny = p.y / (depth * t);
    return {(nx + 1.0) * 0.5 * width, (1.0 - ny) * 0.5 * height, depth};
  }

  /// Side length of one pixel footprint at the given depth.
  double pixel_size_at(double depth) const { return 2.0 * depth * tan_half_fov() / height; }
};

/// Unpolarized flash collocated with the camera center.
struct FlashLight {
  Vec3 intensity{1.0, 1.0, 1.0};  // RGB radiant intensity, inverse-square falloff

  void validate() const {
    if (!(intensity.x > 0.0 && intensity.y > 0.0 && intensity.z > 0.0)) {
      fail(ErrorCategory::kConfig, "flash intensity must be > 0");
    }
  }
};

/// Point light at an arbitrary position, used for relighting.
struct PointLight {
  Vec3 position;
  Vec3 intensity{1.0, 1.0, 1.0};
};

}  // namespace polarcap::render
