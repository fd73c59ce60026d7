// Copyright 2026 The polarcap Authors
// SPDX-License-Identifier: Apache-2.0

// 8- and 16-bit PNG I/O (libpng) and the linear HDR encoding used for
// radiance and map files: code = round(clamp((v - offset) / scale, 0, 1) * 65535).

#pragma once

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "polarcap/core/error.hpp"
#include "polarcap/core/image.hpp"

namespace polarcap::io {

/// Raw decoded PNG: samples are row-major, interleaved, at the file's bit depth.
struct PngData {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint16_t> samples;

  std::uint16_t max_code() const { return bit_depth == 16 ? 65535 : 255; }
};

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};

// libpng would print to stderr before failing; errors are reported by the
// caller instead, so the handlers only unwind.
inline void png_silent_error(png_structp png, png_const_charp) { png_longjmp(png, 1); }
inline void png_silent_warning(png_structp, png_const_charp) {}

// Kept free of objects with destructors: libpng reports errors via longjmp.
inline bool png_write_raw(std::FILE* fp, int width, int height, int channels, int bit_depth,
                          png_bytep* rows) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_silent_error, png_silent_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    return false;
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  int color_type = PNG_COLOR_TYPE_GRAY;
  if (channels == 2) color_type = PNG_COLOR_TYPE_GRAY_ALPHA;
  if (channels == 3) color_type = PNG_COLOR_TYPE_RGB;
  if (channels == 4) color_type = PNG_COLOR_TYPE_RGBA;
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

inline bool png_read_raw(std::FILE* fp, PngData* out, std::vector<png_byte>* buffer) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_silent_error, png_silent_warning);
  if (!png) return false;
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    return false;
  }
  png_bytep* rows = nullptr;
  if (setjmp(png_jmpbuf(png))) {
    std::free(rows);
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  png_init_io(png, fp);
  png_read_info(png, info);
  const png_byte color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (depth == 16) png_set_swap(png);
  png_read_update_info(png, info);
  out->width = static_cast<int>(png_get_image_width(png, info));
  out->height = static_cast<int>(png_get_image_height(png, info));
  out->channels = png_get_channels(png, info);
  out->bit_depth = png_get_bit_depth(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  buffer->resize(rowbytes * out->height);
  rows = static_cast<png_bytep*>(std::malloc(sizeof(png_bytep) * out->height));
  for (int y = 0; y < out->height; ++y) rows[y] = buffer->data() + rowbytes * y;
  png_read_image(png, rows);
  png_read_end(png, nullptr);
  std::free(rows);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

}  // namespace detail

inline void write_png(const std::string& path, int width, int height, int channels, int bit_depth,
                      const std::vector<std::uint16_t>& samples) {
  if (bit_depth != 8 && bit_depth != 16) fail(ErrorCategory::kInput, "png bit depth must be 8 or 16");
  const std::size_t per_row = static_cast<std::size_t>(width) * channels;
  const std::size_t bytes = bit_depth / 8;
  std::vector<png_byte> data(per_row * height * bytes);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (bytes == 2) {
      data[2 * i] = static_cast<png_byte>(samples[i] >> 8);  // PNG is big-endian
      data[2 * i + 1] = static_cast<png_byte>(samples[i] & 0xff);
    } else {
      data[i] = static_cast<png_byte>(samples[i]);
    }
  }
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) rows[y] = data.data() + per_row * bytes * y;
  std::unique_ptr<std::FILE, detail::FileCloser> fp(std::fopen(path.c_str(), "wb"));
  if (!fp) fail(ErrorCategory::kIo, "cannot open '" + path + "' for writing");
  if (!detail::png_write_raw(fp.get(), width, height, channels, bit_depth, rows.data())) {
    fail(ErrorCategory::kIo, "failed to encode png '" + path + "'");
  }
  if (std::fflush(fp.get()) != 0) fail(ErrorCategory::kIo, "failed to write '" + path + "'");
}

inline PngData read_png(const std::string& path) {
  std::unique_ptr<std::FILE, detail::FileCloser> fp(std::fopen(path.c_str(), "rb"));
  if (!fp) fail(ErrorCategory::kIo, "cannot open '" + path + "'");
  PngData out;
  std::vector<png_byte> buffer;
  if (!detail::png_read_raw(fp.get(), &out, &buffer)) {
    fail(ErrorCategory::kParse, "failed to decode png '" + path + "'");
  }
  const std::size_t n = static_cast<std::size_t>(out.width) * out.height * out.channels;
  out.samples.resize(n);
  if (out.bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      out.samples[i] = static_cast<std::uint16_t>(buffer[2 * i] | (buffer[2 * i + 1] << 8));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) out.samples[i] = buffer[i];
  }
  return out;
}

template <int C>
void write_png8(const std::string& path, const Image<std::uint8_t, C>& img) {
  std::vector<std::uint16_t> s;
  s.reserve(img.size() * C);
  for (const auto& p : img.pixels()) s.insert(s.end(), p.begin(), p.end());
  write_png(path, img.width(), img.height(), C, 8, s);
}

/// Linear affine encoding of a float image into 16-bit codes.
struct Png16Encoding {
  double scale = 1.0;
  double offset = 0.0;
  bool clipped = false;  // true when values above offset + scale were saturated
};

inline constexpr double kPng16Max = 65535.0;

inline std::uint16_t encode16(double v, const Png16Encoding& e) {
  const double t = std::clamp((v - e.offset) / e.scale, 0.0, 1.0);
  return static_cast<std::uint16_t>(std::lround(t * kPng16Max));
}

inline double decode16(std::uint16_t code, const Png16Encoding& e) {
  return e.offset + e.scale * (code / kPng16Max);
}

/// Encoding with scale = max pixel value (1.0 for an all-zero image).
template <int C>
Png16Encoding auto_encoding(const Image<double, C>& img) {
  double peak = 0.0;
  for (const auto& p : img.pixels()) {
    for (double v : p) peak = std::max(peak, v);
  }
  return {peak > 0.0 ? peak : 1.0, 0.0, false};
}

template <int C>
void write_png16(const std::string& path, const Image<double, C>& img, const Png16Encoding& enc) {
  static_assert(C >= 1 && C <= 4);
  if (!(enc.scale > 0.0) || !std::isfinite(enc.scale)) {
    fail(ErrorCategory::kInput, "png16 scale must be positive and finite");
  }
  std::vector<std::uint16_t> s;
  s.reserve(img.size() * C);
  for (const auto& p : img.pixels()) {
    for (double v : p) {
      if (!std::isfinite(v)) fail(ErrorCategory::kInput, "png16_write: non-finite value");
      s.push_back(encode16(v, enc));
    }
  }
  write_png(path, img.width(), img.height(), C, 16, s);
}

/// Writes `img` with the auto scale (max pixel) and returns the scale used.
inline double png16_write(const RadianceImage& img, const std::string& path) {
  for (const auto& p : img.pixels()) {
    for (double v : p) {
      if (!std::isfinite(v) || v < 0.0) fail(ErrorCategory::kInput, "png16_write: radiance must be finite and >= 0");
    }
  }
  const Png16Encoding enc = auto_encoding(img);
  write_png16(path, img, enc);
  return enc.scale;
}

/// Decodes a PNG into C float channels. Gray files broadcast into RGB; 8-bit
/// files decode as code / 255 * scale + offset. `codes_at_max`, when given,
/// receives a mask of pixels with any channel at the file's ceiling.
template <int C>
Image<double, C> read_png_as(const std::string& path, const Png16Encoding& enc = {}, int expect_width = -1,
                             int expect_height = -1, Mask* codes_at_max = nullptr) {
  const PngData d = read_png(path);
  if ((expect_width >= 0 && d.width != expect_width) || (expect_height >= 0 && d.height != expect_height)) {
    fail(ErrorCategory::kInput, "png '" + path + "' has size " + std::to_string(d.width) + "x" +
                                    std::to_string(d.height) + ", expected " + std::to_string(expect_width) +
                                    "x" + std::to_string(expect_height));
  }
  const int src_color = d.channels >= 3 ? 3 : 1;
  if (C == 3 && src_color != 3 && d.channels != 1 && d.channels != 2) {
    fail(ErrorCategory::kParse, "png '" + path + "' has unsupported channel layout");
  }
  const double max_code = d.max_code();
  Image<double, C> img(d.width, d.height);
  if (codes_at_max) *codes_at_max = Mask(d.width, d.height);
  for (std::size_t i = 0; i < img.size(); ++i) {
    for (int c = 0; c < C; ++c) {
      const int src = src_color == 3 ? std::min(c, 2) : 0;
      const std::uint16_t code = d.samples[i * d.channels + src];
      img[i][c] = enc.offset + enc.scale * (code / max_code);
      if (codes_at_max && code == d.max_code()) (*codes_at_max)[i][0] = 1;
    }
  }
  return img;
}

inline RadianceImage png16_read(const std::string& path, double scale) {
  return read_png_as<3>(path, Png16Encoding{scale, 0.0, false});
}

inline Mask read_mask_png(const std::string& path) {
  const PngData d = read_png(path);
  Mask m(d.width, d.height);
  for (std::size_t i = 0; i < m.size(); ++i) m[i][0] = d.samples[i * d.channels] != 0;
  return m;
}

inline void write_mask_png(const std::string& path, const Mask& m) {
  Mask out(m.width(), m.height());
  for (std::size_t i = 0; i < m.size(); ++i) out[i][0] = m[i][0] ? 255 : 0;
  write_png8(path, out);
}

}  // namespace polarcap::io
