// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#include "figdiff/io/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <stdexcept>

namespace figdiff {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void fail(const std::string& msg, const std::string& path) {
  throw std::runtime_error(msg + ": " + path);
}

// Fixed palette so label images are viewable; distinct hues per label.
void label_palette(int n, std::vector<png_color>& pal) {
  pal.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    if (i == 0) {
      pal[0] = {40, 40, 40};
      continue;
    }
    const double h = 360.0 * (i - 1) / std::max(1, n - 1);
    const double s = 0.85, v = 0.9;
    const double c = v * s;
    const double x = c * (1.0 - std::fabs(std::fmod(h / 60.0, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (h < 60) {
      r = c, g = x;
    } else if (h < 120) {
      r = x, g = c;
    } else if (h < 180) {
      g = c, b = x;
    } else if (h < 240) {
      g = x, b = c;
    } else if (h < 300) {
      r = x, b = c;
    } else {
      r = c, b = x;
    }
    const double m = v - c;
    pal[static_cast<std::size_t>(i)] = {static_cast<png_byte>(255 * (r + m)),
                                        static_cast<png_byte>(255 * (g + m)),
                                        static_cast<png_byte>(255 * (b + m))};
  }
}

}  // namespace

void write_png_rgb(const std::string& path, const ImageF& img) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) fail("cannot open for write", path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) fail("libpng init failed", path);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail("libpng write error", path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.w), static_cast<png_uint_32>(img.h), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_byte> row(static_cast<std::size_t>(img.w) * 3);
  for (int y = 0; y < img.h; ++y) {
    for (int x = 0; x < img.w; ++x) {
      const float* p = img.px(y, x);
      for (int c = 0; c < 3; ++c)
        row[static_cast<std::size_t>(x) * 3 + c] =
            static_cast<png_byte>(std::lround(255.0f * clamp01(p[c])));
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

ImageF read_png_rgb(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) fail("cannot open for read", path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) fail("libpng init failed", path);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail("libpng read error", path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  if (png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY ||
      png_get_color_type(png, info) == PNG_COLOR_TYPE_GRAY_ALPHA)
    png_set_gray_to_rgb(png);
  png_read_update_info(png, info);
  const int h = static_cast<int>(png_get_image_height(png, info));
  const int w = static_cast<int>(png_get_image_width(png, info));
  if (png_get_channels(png, info) != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail("expected 3-channel image", path);
  }
  ImageF img(h, w);
  std::vector<png_byte> row(static_cast<std::size_t>(w) * 3);
  for (int y = 0; y < h; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        img.px(y, x)[c] = static_cast<float>(row[static_cast<std::size_t>(x) * 3 + c]) / 255.f;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_png_labels(const std::string& path, const std::vector<std::uint8_t>& labels, int h,
                      int w, int n_labels) {
  if (labels.size() != static_cast<std::size_t>(h) * w)
    throw std::invalid_argument("write_png_labels: size mismatch");
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) fail("cannot open for write", path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) fail("libpng init failed", path);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail("libpng write error", path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
               PNG_COLOR_TYPE_PALETTE, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  std::vector<png_color> pal;
  label_palette(std::max(n_labels, 2), pal);
  png_set_PLTE(png, info, pal.data(), static_cast<int>(pal.size()));
  png_write_info(png, info);
  for (int y = 0; y < h; ++y)
    png_write_row(png, const_cast<png_bytep>(labels.data() + static_cast<std::size_t>(y) * w));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

std::vector<std::uint8_t> read_png_labels(const std::string& path, int& h, int& w) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) fail("cannot open for read", path);
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (!png || !info) fail("libpng init failed", path);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail("libpng read error", path);
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_PALETTE) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail("expected paletted label image", path);
  }
  if (png_get_bit_depth(png, info) < 8) png_set_packing(png);
  png_read_update_info(png, info);
  h = static_cast<int>(png_get_image_height(png, info));
  w = static_cast<int>(png_get_image_width(png, info));
  std::vector<std::uint8_t> labels(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y)
    png_read_row(png, labels.data() + static_cast<std::size_t>(y) * w, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return labels;
}

}  // namespace figdiff
