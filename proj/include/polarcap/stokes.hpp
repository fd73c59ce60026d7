// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

// Linear Stokes algebra over RGB images: captures behind an ideal linear
// polarizer at 0/45/90 degrees, their Stokes components, the normalized
// (s1, s2) direction cue and the derived degree/angle of linear polarization.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

#include "polarcap/core/error.hpp"
#include "polarcap/core/image.hpp"
#include "polarcap/core/vec.hpp"

namespace polarcap {

/// Radiance observed through a linear polarizer at 0, 45 and 90 degrees.
struct CaptureSet {
  RadianceImage i0;
  RadianceImage i45;
  RadianceImage i90;

  int width() const { return i0.width(); }
  int height() const { return i0.height(); }

  void validate() const {
    require_same_size(i0, i45, "capture i0/i45");
    require_same_size(i0, i90, "capture i0/i90");
    check_radiance(i0, "capture i0");
    check_radiance(i45, "capture i45");
    check_radiance(i90, "capture i90");
  }
};

struct StokesImage {
  RgbImage s0;
  RgbImage s1;
  RgbImage s2;

  int width() const { return s0.width(); }
  int height() const { return s0.height(); }

  StokesImage() = default;
  StokesImage(int w, int h) : s0(w, h), s1(w, h), s2(w, h) {}
};

/// Unit (u1, u2) = (s1, s2) / |(s1, s2)| on valid pixels, zero elsewhere.
struct NormalizedStokesMap {
  Image<double, 2> u;
  Mask valid;

  int width() const { return u.width(); }
  int height() const { return u.height(); }

  NormalizedStokesMap() = default;
  NormalizedStokesMap(int w, int h) : u(w, h), valid(w, h) {}
};

/// cos(2 phi), sin(2 phi) for a polarizer angle in degrees. Multiples of 45
/// degrees are returned exactly so that the 0/45/90/135 reconstructions are
/// exact identities.
struct PolarizerWeights {
  double cos2;
  double sin2;
};

inline PolarizerWeights polarizer_weights(double phi_deg) {
  const double two_phi = 2.0 * phi_deg;
  const double quarter_turns = two_phi / 90.0;
  if (quarter_turns == std::floor(quarter_turns)) {
    const long long k = static_cast<long long>(quarter_turns) % 4;
    switch ((k + 4) % 4) {
      case 0: return {1.0, 0.0};
      case 1: return {0.0, 1.0};
      case 2: return {-1.0, 0.0};
      default: return {0.0, -1.0};
    }
  }
  const double r = deg_to_rad(two_phi);
  return {std::cos(r), std::sin(r)};
}

/// Transmitted intensity of an ideal linear polarizer.
constexpr double polarizer_response(double s0, double s1, double s2, PolarizerWeights w) {
  return 0.5 * (s0 + s1 * w.cos2 + s2 * w.sin2);
}

inline StokesImage compute_stokes(const CaptureSet& c) {
  c.validate();
  StokesImage s(c.width(), c.height());
  for (std::size_t i = 0; i < c.i0.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      const double h = c.i0[i][k];
      const double d = c.i45[i][k];
      const double v = c.i90[i][k];
      s.s0[i][k] = h + v;
      s.s1[i][k] = h - v;
      s.s2[i][k] = 2.0 * d - (h + v);
    }
  }
  return s;
}

inline void check_stokes(const StokesImage& s) {
  require_same_size(s.s0, s.s1, "stokes s0/s1");
  require_same_size(s.s0, s.s2, "stokes s0/s2");
  for (std::size_t i = 0; i < s.s0.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      if (!std::isfinite(s.s0[i][k]) || !std::isfinite(s.s1[i][k]) ||
          !std::isfinite(s.s2[i][k])) {
        fail(ErrorCategory::kInput, "stokes image contains non-finite values");
      }
    }
  }
}

/// Image seen through a polarizer at phi_deg. Negatives above -1e-9 are
/// rounding and clamp to zero; anything lower means DOP > 1 somewhere.
inline RadianceImage filter_image(const StokesImage& s, double phi_deg) {
  check_stokes(s);
  const PolarizerWeights w = polarizer_weights(phi_deg);
  RadianceImage out(s.width(), s.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      double v = polarizer_response(s.s0[i][k], s.s1[i][k], s.s2[i][k], w);
      if (v < 0.0) {
        if (v < -1e-9) {
          const int w_ = s.width();
          fail(ErrorCategory::kUnphysical,
               "filter_image: negative transmitted radiance " + std::to_string(v) + " at (" +
                   std::to_string(static_cast<int>(i) % w_) + "," +
                   std::to_string(static_cast<int>(i) / w_) + ")");
        }
        v = 0.0;
      }
      out[i][k] = v;
    }
  }
  return out;
}

struct DerivedInputs {
  RadianceImage full;
  RadianceImage i135;
  std::size_t clamped_negative = 0;  // i135 samples that were < 0 before clamping
};

/// full = i0 + i90 and i135 = full - i45, the two extra network inputs.
inline DerivedInputs derive_inputs(const CaptureSet& c) {
  c.validate();
  DerivedInputs d{RadianceImage(c.width(), c.height()), RadianceImage(c.width(), c.height()), 0};
  for (std::size_t i = 0; i < c.i0.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      const double full = c.i0[i][k] + c.i90[i][k];
      double i135 = full - c.i45[i][k];
      if (i135 < 0.0) {
        ++d.clamped_negative;
        i135 = 0.0;
      }
      d.full[i][k] = full;
      d.i135[i][k] = i135;
    }
  }
  return d;
}

namespace detail {
inline double channel_mean(const std::array<double, 3>& p) { return (p[0] + p[1] + p[2]) / 3.0; }
}  // namespace detail

/// Scale-adaptive threshold: 1e-4 times the image-mean s0.
inline double default_stokes_epsilon(const StokesImage& s) {
  double sum = 0.0;
  for (const auto& p : s.s0.pixels()) sum += detail::channel_mean(p);
  const double mean = s.s0.size() > 0 ? sum / static_cast<double>(s.s0.size()) : 0.0;
  return 1e-4 * mean;
}

/// Per pixel, normalizes the channel-averaged (s1, s2). Pixels whose
/// polarized magnitude is at or below epsilon are marked invalid.
inline NormalizedStokesMap normalize_stokes(const StokesImage& s, double epsilon) {
  check_stokes(s);
  NormalizedStokesMap m(s.width(), s.height());
  for (std::size_t i = 0; i < s.s0.size(); ++i) {
    const double a = detail::channel_mean(s.s1[i]);
    const double b = detail::channel_mean(s.s2[i]);
    const double len = std::hypot(a, b);
    if (len > epsilon && len > 0.0) {
      m.u[i] = {a / len, b / len};
      m.valid[i][0] = 1;
    }
  }
  return m;
}

inline NormalizedStokesMap normalize_stokes(const StokesImage& s) {
  return normalize_stokes(s, default_stokes_epsilon(s));
}

/// Angle of linear polarization in [0, pi) from (s1, s2).
inline double aolp_from(double s1, double s2) {
  double a = 0.5 * std::atan2(s2, s1);
  if (a < 0.0) a += kPi;
  if (a >= kPi) a -= kPi;
  return a;
}

struct DopAolp {
  ScalarImage dop;
  ScalarImage aolp;
  Mask defined;  // false where s0 == 0; dop and aolp are zero there
};

inline DopAolp dop_aolp(const StokesImage& s) {
  check_stokes(s);
  DopAolp r{ScalarImage(s.width(), s.height()), ScalarImage(s.width(), s.height()),
            Mask(s.width(), s.height())};
  for (std::size_t i = 0; i < s.s0.size(); ++i) {
    const double s0 = detail::channel_mean(s.s0[i]);
    if (!(s0 > 0.0)) continue;
    const double s1 = detail::channel_mean(s.s1[i]);
    const double s2 = detail::channel_mean(s.s2[i]);
    r.dop[i][0] = std::hypot(s1, s2) / s0;
    r.aolp[i][0] = aolp_from(s1, s2);
    r.defined[i][0] = 1;
  }
  return r;
}

/// Perturbs valid (u1, u2) with N(0, sigma^2) per component and re-normalizes.
/// Draws happen in raster order from one mt19937_64 stream, so the result
/// depends only on (m, sigma, seed).
inline NormalizedStokesMap add_stokes_noise(const NormalizedStokesMap& m, double sigma,
                                            std::uint64_t seed) {
  if (!(sigma >= 0.0)) fail(ErrorCategory::kDomain, "add_stokes_noise: sigma must be >= 0");
  NormalizedStokesMap out = m;
  if (sigma == 0.0) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, sigma);
  for (std::size_t i = 0; i < out.u.size(); ++i) {
    if (!m.valid[i][0]) continue;
    const double a = m.u[i][0] + gauss(rng);
    const double b = m.u[i][1] + gauss(rng);
    const double len = std::hypot(a, b);
    if (len > 0.0) {
      out.u[i] = {a / len, b / len};
    }
  }
  return out;
}

/// R fixed at one half, G and B carry (u + 1) / 2; invalid pixels are black.
inline Rgb8Image visualize_stokes(const NormalizedStokesMap& m) {
  auto quantize = [](double v) {
    v = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::floor(v * 255.0 + 1e-6));
  };
  Rgb8Image out(m.width(), m.height());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!m.valid[i][0]) continue;
    out[i] = {quantize(0.5), quantize(0.5 * (m.u[i][0] + 1.0)), quantize(0.5 * (m.u[i][1] + 1.0))};
  }
  return out;
}

}  // namespace polarcap
