// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>

#include "polarcap/core/image.hpp"
#include "polarcap/stokes.hpp"

namespace polarcap {

/// Per-channel polarizer response I(phi) = offset + amplitude * cos(2 (phi - phase)).
struct SinusoidFit {
  double i_min = 0.0;
  double i_max = 0.0;
  double phase = 0.0;  // polarizer angle of maximum transmission, [0, pi)
};

inline SinusoidFit fit_sinusoid(double s0, double s1, double s2) {
  // Three polarizer angles pin the sinusoid exactly; no iterative fit needed.
  const double amplitude = std::hypot(s1, s2);
  SinusoidFit f;
  f.i_max = 0.5 * (s0 + amplitude);
  f.i_min = std::max(0.0, 0.5 * (s0 - amplitude));
  f.phase = amplitude > 0.0 ? aolp_from(s1, s2) : 0.0;
  return f;
}

struct SinusoidFitImage {
  RgbImage i_min;
  RgbImage i_max;
  RgbImage phase;
};

inline SinusoidFitImage fit_sinusoid(const StokesImage& s) {
  check_stokes(s);
  const int w = s.width();
  const int h = s.height();
  SinusoidFitImage out{RgbImage(w, h), RgbImage(w, h), RgbImage(w, h)};
  for (std::size_t i = 0; i < s.s0.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      const SinusoidFit f = fit_sinusoid(s.s0[i][k], s.s1[i][k], s.s2[i][k]);
      out.i_min[i][k] = f.i_min;
      out.i_max[i][k] = f.i_max;
      out.phase[i][k] = f.phase;
    }
  }
  return out;
}

/// Normalized diffuse color: per-pixel RGB of the fitted minimum, divided by
/// its largest channel.
struct DiffuseColorMap {
  RgbImage color;
  Mask valid;
};

/// `saturated` marks pixels clipped in any capture; they lose their color and
/// are reported invalid.
inline DiffuseColorMap diffuse_color(const StokesImage& s, double epsilon,
                                     const Mask* saturated = nullptr) {
  const SinusoidFitImage fit = fit_sinusoid(s);
  if (saturated != nullptr) require_same_size(s.s0, *saturated, "saturation mask");
  DiffuseColorMap out{RgbImage(s.width(), s.height()), Mask(s.width(), s.height())};
  for (std::size_t i = 0; i < s.s0.size(); ++i) {
    if (saturated != nullptr && (*saturated)[i][0]) continue;
    const auto& m = fit.i_min[i];
    const double peak = std::max({m[0], m[1], m[2]});
    if (!(peak > epsilon) || !(peak > 0.0)) continue;
    out.color[i] = {m[0] / peak, m[1] / peak, m[2] / peak};
    out.valid[i][0] = 1;
  }
  return out;
}

inline DiffuseColorMap diffuse_color(const StokesImage& s, const Mask* saturated = nullptr) {
  return diffuse_color(s, default_stokes_epsilon(s), saturated);
}

}  // namespace polarcap
