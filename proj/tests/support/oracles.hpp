// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

// Test-only reference computations. Nothing here calls into the code under
// test; each oracle re-derives its answer by brute force or direct sampling.

#pragma once

#include <cmath>
#include <random>

#include "polarcap/core/image.hpp"
#include "polarcap/stokes.hpp"

namespace polarcap::testing {

inline constexpr double kOraclePi = 3.14159265358979323846;

/// Polarizer response model sampled directly: I(phi) = (s0 + s1 cos 2phi + s2 sin 2phi) / 2.
inline double sinusoid(double s0, double s1, double s2, double phi_rad) {
  return 0.5 * (s0 + s1 * std::cos(2.0 * phi_rad) + s2 * std::sin(2.0 * phi_rad));
}

struct BruteExtrema {
  double min;
  double max;
  double argmax_rad;  // in [0, pi)
};

/// Dense scan of the sinusoid over [0, pi).
inline BruteExtrema brute_force_extrema(double s0, double s1, double s2, int samples = 3600) {
  BruteExtrema e{1e300, -1e300, 0.0};
  for (int i = 0; i < samples; ++i) {
    const double phi = kOraclePi * i / samples;
    const double v = sinusoid(s0, s1, s2, phi);
    e.min = std::min(e.min, v);
    if (v > e.max) {
      e.max = v;
      e.argmax_rad = phi;
    }
  }
  return e;
}

/// Random physically valid capture: per pixel/channel an intensity, a degree
/// of polarization in [0, 1] and an angle, sampled through the sinusoid.
inline CaptureSet random_capture(std::mt19937_64& rng, int w, int h) {
  std::uniform_real_distribution<double> inten(0.0, 3.0), dop(0.0, 1.0), ang(0.0, kOraclePi);
  CaptureSet c{RadianceImage(w, h), RadianceImage(w, h), RadianceImage(w, h)};
  for (std::size_t i = 0; i < c.i0.size(); ++i) {
    for (int k = 0; k < 3; ++k) {
      const double s0 = inten(rng), p = dop(rng), a = ang(rng);
      const double s1 = s0 * p * std::cos(2 * a), s2 = s0 * p * std::sin(2 * a);
      c.i0[i][k] = std::max(0.0, sinusoid(s0, s1, s2, 0.0));
      c.i45[i][k] = std::max(0.0, sinusoid(s0, s1, s2, kOraclePi / 4));
      c.i90[i][k] = std::max(0.0, sinusoid(s0, s1, s2, kOraclePi / 2));
    }
  }
  return c;
}

inline CaptureSet uniform_capture(double i0, double i45, double i90, int w = 1, int h = 1) {
  CaptureSet c{RadianceImage(w, h, i0), RadianceImage(w, h, i45), RadianceImage(w, h, i90)};
  return c;
}

inline StokesImage uniform_stokes(double s0, double s1, double s2, int w = 1, int h = 1) {
  StokesImage s(w, h);
  for (std::size_t i = 0; i < s.s0.size(); ++i) {
    s.s0[i] = {s0, s0, s0};
    s.s1[i] = {s1, s1, s1};
    s.s2[i] = {s2, s2, s2};
  }
  return s;
}

/// Relative error with an absolute floor.
inline double rel_err(double a, double b, double floor = 1e-12) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace polarcap::testing
