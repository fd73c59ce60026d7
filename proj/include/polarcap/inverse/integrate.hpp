// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

// Least-squares integration of a normal map into a height field.

#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cstdint>
#include <vector>

#include "polarcap/core/error.hpp"
#include "polarcap/core/image.hpp"
#include "polarcap/render/camera.hpp"

namespace polarcap::inverse {

inline constexpr double kMinNormalZ = 0.05;

/// Height z (camera +z, toward the viewer) whose gradient best matches
/// (-nx/nz, -ny/nz) in the least-squares sense. Neighbor differences use the
/// trapezoid rule, so quadratic surfaces are reproduced exactly. `spacing`
/// is the pixel pitch in scene units. Each 4-connected component of the mask
/// is solved up to a constant and returned with zero mean; pixels outside
/// the mask are zero.
inline ScalarImage integrate_normals(const RgbImage& normals, const Mask& mask, double spacing = 1.0) {
  require_same_size(mask, normals, "integrate normals");
  const int w = mask.width(), h = mask.height();
  if (count(mask) == 0) fail(ErrorCategory::kInput, "integrate_normals: empty mask");
  if (!(spacing > 0.0)) fail(ErrorCategory::kDomain, "integrate_normals: spacing must be > 0");

  std::vector<int> var(mask.size(), -1);
  int nvar = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i][0]) var[i] = nvar++;
  }
  // Slopes per pixel: dz/dx along columns, dz/drow along rows (rows go down).
  std::vector<double> gx(mask.size()), grow(mask.size());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i][0]) continue;
    const double nz = std::max(normals[i][2], kMinNormalZ);
    gx[i] = -normals[i][0] / nz;
    grow[i] = normals[i][1] / nz;
  }

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nvar);
  const auto edge = [&](std::size_t i, std::size_t j, double diff) {  // z_j - z_i = diff
    const int a = var[i], b = var[j];
    trip.emplace_back(a, a, 1.0);
    trip.emplace_back(b, b, 1.0);
    trip.emplace_back(a, b, -1.0);
    trip.emplace_back(b, a, -1.0);
    rhs[a] -= diff;
    rhs[b] += diff;
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = mask.index(x, y);
      if (!mask[i][0]) continue;
      if (x + 1 < w && mask[i + 1][0]) edge(i, i + 1, 0.5 * spacing * (gx[i] + gx[i + 1]));
      if (y + 1 < h) {
        const std::size_t j = mask.index(x, y + 1);
        if (mask[j][0]) edge(i, j, 0.5 * spacing * (grow[i] + grow[j]));
      }
    }
  }

  // Label components; pin one pixel of each so the system is definite. The
  // pin only fixes the free constant, which the mean removal discards.
  std::vector<int> comp(mask.size(), -1);
  std::vector<std::size_t> stack;
  int ncomp = 0;
  for (std::size_t s = 0; s < mask.size(); ++s) {
    if (!mask[s][0] || comp[s] >= 0) continue;
    trip.emplace_back(var[s], var[s], 1.0);
    comp[s] = ncomp;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(i % static_cast<std::size_t>(w)), y = static_cast<int>(i / static_cast<std::size_t>(w));
      const int nx[4] = {x - 1, x + 1, x, x};
      const int ny[4] = {y, y, y - 1, y + 1};
      for (int k = 0; k < 4; ++k) {
        if (nx[k] < 0 || ny[k] < 0 || nx[k] >= w || ny[k] >= h) continue;
        const std::size_t j = mask.index(nx[k], ny[k]);
        if (mask[j][0] && comp[j] < 0) {
          comp[j] = ncomp;
          stack.push_back(j);
        }
      }
    }
    ++ncomp;
  }

  Eigen::SparseMatrix<double> a(nvar, nvar);
  a.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
  if (solver.info() != Eigen::Success) fail(ErrorCategory::kDomain, "integrate_normals: factorization failed");
  const Eigen::VectorXd z = solver.solve(rhs);

  std::vector<double> sum(static_cast<std::size_t>(ncomp), 0.0);
  std::vector<std::size_t> cnt(static_cast<std::size_t>(ncomp), 0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i][0]) continue;
    sum[static_cast<std::size_t>(comp[i])] += z[var[i]];
    ++cnt[static_cast<std::size_t>(comp[i])];
  }
  ScalarImage out(w, h);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i][0]) continue;
    const auto c = static_cast<std::size_t>(comp[i]);
    out[i][0] = z[var[i]] - sum[c] / static_cast<double>(cnt[c]);
  }
  return out;
}

/// Depth map (distance along -z) from normals, anchored so that the masked
/// median equals `anchor_depth`. Pixel pitch is taken at the anchor depth.
inline ScalarImage depth_from_normals(const RgbImage& normals, const Mask& mask, const render::Camera& cam,
                                      double anchor_depth) {
  const ScalarImage z = integrate_normals(normals, mask, cam.pixel_size_at(anchor_depth));
  std::vector<double> vals;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i][0]) vals.push_back(-z[i][0]);
  }
  std::nth_element(vals.begin(), vals.begin() + static_cast<std::ptrdiff_t>(vals.size() / 2), vals.end());
  const double med = vals[vals.size() / 2];
  ScalarImage d(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i][0]) d[i][0] = anchor_depth + (-z[i][0] - med);
  }
  return d;
}

}  // namespace polarcap::inverse
