// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "figdiff/core/image.hpp"

namespace figdiff {

/// 8-bit RGB PNG. Values are clamped to [0,1] and rounded on write.
void write_png_rgb(const std::string& path, const ImageF& img);
ImageF read_png_rgb(const std::string& path);

/// Paletted PNG holding raw label indices; the palette is only for viewing.
/// Reading returns the stored indices untouched.
void write_png_labels(const std::string& path, const std::vector<std::uint8_t>& labels, int h,
                      int w, int n_labels);
std::vector<std::uint8_t> read_png_labels(const std::string& path, int& h, int& w);

}  // namespace figdiff
