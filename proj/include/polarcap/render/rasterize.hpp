// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "polarcap/core/image.hpp"
#include "polarcap/core/parallel.hpp"
#include "polarcap/core/vec.hpp"
#include "polarcap/render/camera.hpp"
#include "polarcap/render/material.hpp"
#include "polarcap/render/mesh.hpp"

namespace polarcap::render {

/// Object, material, pose, camera and flash. The camera frame is the world
/// frame: camera at the origin looking down -z.
struct Scene {
  Mesh mesh;
  Quat rotation;
  Vec3 translation{0.0, 0.0, -3.0};
  double scale = 1.0;
  Camera camera;
  FlashLight flash;
  TextureSet material;
  UvTransform uv;
  double near_plane = 1e-3;

  Vec3 to_camera(const Vec3& p) const { return rotation.rotate(p * scale) + translation; }

  void validate() const {
    mesh.validate();
    camera.validate();
    flash.validate();
    material.validate();
    for (const auto& p : mesh.positions) {
      if (!(-to_camera(p).z > near_plane)) {
        fail(ErrorCategory::kConfig, "scene object crosses the camera near plane");
      }
    }
  }
};

/// Per-pixel geometry from rasterization. Uncovered pixels hold zeros.
struct GBuffer {
  RgbImage position;  // camera space
  RgbImage normal;    // unit, camera space
  Image<double, 2> uv;
  ScalarImage depth;  // distance along -z
  Mask mask;

  GBuffer() = default;
  GBuffer(int w, int h) : position(w, h), normal(w, h), uv(w, h), depth(w, h), mask(w, h) {}

  int width() const { return mask.width(); }
  int height() const { return mask.height(); }
  Vec3 position_at(std::size_t i) const { return {position[i][0], position[i][1], position[i][2]}; }
  Vec3 normal_at(std::size_t i) const { return {normal[i][0], normal[i][1], normal[i][2]}; }

  friend bool operator==(const GBuffer&, const GBuffer&) = default;
};

/// Z-buffered triangle rasterization with perspective-correct attribute
/// interpolation and back-face culling. Image rows are split into bands, one
/// per worker; each band walks triangles in mesh order and keeps the nearest
/// fragment (first one on exact ties), so output does not depend on threads.
inline GBuffer rasterize(const Scene& scene) {
  scene.mesh.validate();
  scene.camera.validate();
  const Camera& cam = scene.camera;
  const Mesh& mesh = scene.mesh;

  struct Vert {
    Vec3 p;
    Vec3 n;
    Uv uv;
    double sx, sy, depth;
  };
  std::vector<Vert> verts(mesh.vertex_count());
  for (std::size_t i = 0; i < verts.size(); ++i) {
    Vert& v = verts[i];
    v.p = scene.to_camera(mesh.positions[i]);
    v.n = scene.rotation.rotate(mesh.normals[i]);
    v.uv = mesh.uvs[i];
    const auto pr = cam.project(v.p);
    v.sx = pr.sx;
    v.sy = pr.sy;
    v.depth = pr.depth;
  }

  GBuffer g(cam.width, cam.height);
  const int bands = std::min(max_threads(), cam.height);
  parallel_for(0, bands, [&](int band) {
    const int row0 = static_cast<int>(static_cast<long long>(cam.height) * band / bands);
    const int row1 = static_cast<int>(static_cast<long long>(cam.height) * (band + 1) / bands);
    for (const auto& tri : mesh.triangles) {
      const Vert& a = verts[tri[0]];
      const Vert& b = verts[tri[1]];
      const Vert& c = verts[tri[2]];
      if (!(a.depth > scene.near_plane && b.depth > scene.near_plane && c.depth > scene.near_plane)) continue;
      // Screen y points down, so counter-clockwise (front) faces have negative area.
      const double area = (b.sx - a.sx) * (c.sy - a.sy) - (c.sx - a.sx) * (b.sy - a.sy);
      if (!(area < 0.0)) continue;
      const double minx = std::min({a.sx, b.sx, c.sx}), maxx = std::max({a.sx, b.sx, c.sx});
      const double miny = std::min({a.sy, b.sy, c.sy}), maxy = std::max({a.sy, b.sy, c.sy});
      const int x0 = std::max(0, static_cast<int>(std::ceil(minx - 0.5)));
      const int x1 = std::min(cam.width - 1, static_cast<int>(std::floor(maxx - 0.5)));
      const int y0 = std::max(row0, static_cast<int>(std::ceil(miny - 0.5)));
      const int y1 = std::min(row1 - 1, static_cast<int>(std::floor(maxy - 0.5)));
      for (int y = y0; y <= y1; ++y) {
        const double py = y + 0.5;
        for (int x = x0; x <= x1; ++x) {
          const double px = x + 0.5;
          const double w0 = ((c.sx - b.sx) * (py - b.sy) - (c.sy - b.sy) * (px - b.sx)) / area;
          const double w1 = ((a.sx - c.sx) * (py - c.sy) - (a.sy - c.sy) * (px - c.sx)) / area;
          const double w2 = 1.0 - w0 - w1;
          if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
          const double inv = w0 / a.depth + w1 / b.depth + w2 / c.depth;
          const double depth = 1.0 / inv;
          const std::size_t i = g.mask.index(x, y);
          if (g.mask[i][0] && !(depth < g.depth[i][0])) continue;
          const double l0 = w0 / a.depth * depth, l1 = w1 / b.depth * depth, l2 = w2 / c.depth * depth;
          // The surface point is the pixel ray at this depth; this keeps
          // positions exactly consistent with depth-based reconstruction.
          const Vec3 p = cam.point_at_depth(x, y, depth);
          const Vec3 n = normalize(a.n * l0 + b.n * l1 + c.n * l2);
          g.position[i] = {p.x, p.y, p.z};
          g.normal[i] = {n.x, n.y, n.z};
          g.uv[i] = {a.uv[0] * l0 + b.uv[0] * l1 + c.uv[0] * l2, a.uv[1] * l0 + b.uv[1] * l1 + c.uv[1] * l2};
          g.depth[i][0] = depth;
          g.mask[i][0] = 1;
        }
      }
    }
  });
  return g;
}

}  // namespace polarcap::render
