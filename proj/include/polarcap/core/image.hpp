// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "polarcap/core/error.hpp"

namespace polarcap {

/// Row-major image with a compile-time channel count. Row 0 is the top of the
/// picture; column 0 is the left edge.
template <typename T, int C>
class Image {
 public:
  using Pixel = std::array<T, C>;
  static constexpr int kChannels = C;

  Image() = default;
  Image(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width < 0 || height < 0) fail(ErrorCategory::kInput, "negative image dimensions");
    Pixel p;
    p.fill(fill);
    pixels_.assign(static_cast<std::size_t>(width) * height, p);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return pixels_.size(); }
  bool empty() const { return pixels_.empty(); }

  Pixel& operator()(int x, int y) { return pixels_[index(x, y)]; }
  const Pixel& operator()(int x, int y) const { return pixels_[index(x, y)]; }
  T& operator()(int x, int y, int c) { return pixels_[index(x, y)][c]; }
  const T& operator()(int x, int y, int c) const { return pixels_[index(x, y)][c]; }

  Pixel& operator[](std::size_t i) { return pixels_[i]; }
  const Pixel& operator[](std::size_t i) const { return pixels_[i]; }

  std::span<Pixel> pixels() { return pixels_; }
  std::span<const Pixel> pixels() const { return pixels_; }

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  template <typename U, int D>
  bool same_size(const Image<U, D>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Pixel> pixels_;
};

using RgbImage = Image<double, 3>;
using ScalarImage = Image<double, 1>;
using Mask = Image<std::uint8_t, 1>;
using Rgb8Image = Image<std::uint8_t, 3>;

/// Linear scene radiance, RGB, non-negative.
using RadianceImage = RgbImage;

template <typename A, typename B>
void require_same_size(const A& a, const B& b, const char* what) {
  if (!a.same_size(b)) {
    fail(ErrorCategory::kInput, std::string("dimension mismatch: ") + what + " (" +
                                    std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                                    " vs " + std::to_string(b.width()) + "x" +
                                    std::to_string(b.height()) + ")");
  }
}

inline void check_radiance(const RadianceImage& img, const char* what) {
  if (img.width() < 1 || img.height() < 1) {
    fail(ErrorCategory::kInput, std::string(what) + ": empty image");
  }
  for (const auto& p : img.pixels()) {
    for (double v : p) {
      if (!std::isfinite(v) || v < 0.0) {
        fail(ErrorCategory::kInput, std::string(what) + ": radiance must be finite and >= 0");
      }
    }
  }
}

inline std::size_t count(const Mask& m) {
  std::size_t n = 0;
  for (const auto& p : m.pixels()) n += p[0] != 0;
  return n;
}

}  // namespace polarcap
