// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "figdiff/core/image.hpp"
#include "figdiff/core/tensor.hpp"

namespace figdiff {

/// One training/eval unit: an image, its part-label map and per-part captions.
struct SemanticScene {
  ImageF image;
  std::vector<std::uint8_t> map;  // h*w labels in [0, n)
  std::map<int, std::string> captions;
  std::uint64_t seed = 0;

  int h() const { return image.h; }
  int w() const { return image.w; }
};

struct PartImage {
  ImageF image;
  bool empty = false;
};

/// I_i = I * S_i: the input image with everything outside the part zeroed.
/// An absent part yields an all-zero image with the empty flag set.
inline PartImage extract_part(const SemanticScene& scene, int part_id, int n_parts) {
  if (part_id < 0 || part_id >= n_parts)
    throw std::invalid_argument("extract_part: part_id out of range");
  PartImage out;
  out.image = ImageF(scene.h(), scene.w());
  bool any = false;
  for (int y = 0; y < scene.h(); ++y)
    for (int x = 0; x < scene.w(); ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * scene.w() + x;
      if (scene.map[i] == part_id) {
        const float* s = scene.image.px(y, x);
        float* d = out.image.px(y, x);
        d[0] = s[0];
        d[1] = s[1];
        d[2] = s[2];
        any = true;
      }
    }
  out.empty = !any;
  return out;
}

/// n x H x W one-hot tensorization of a label map.
template <typename T>
Tensor<T> one_hot_seg(const std::vector<std::uint8_t>& map, int h, int w, int n) {
  if (map.size() != static_cast<std::size_t>(h) * w)
    throw std::invalid_argument("one_hot_seg: map size mismatch");
  Tensor<T> seg({n, h, w});
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const int v = map[static_cast<std::size_t>(y) * w + x];
      if (v < 0 || v >= n)
        throw std::invalid_argument("one_hot_seg: label " + std::to_string(v) +
                                    " out of range at pixel (" + std::to_string(y) + "," +
                                    std::to_string(x) + ")");
      seg.at3(v, y, x) = T(1);
    }
  return seg;
}

/// Nearest-neighbor label resampling: out(i,j) = src(floor(i*sh/th), floor(j*sw/tw)).
inline std::vector<std::uint8_t> resize_semantic_map(const std::vector<std::uint8_t>& map, int sh,
                                                     int sw, int th, int tw) {
  if (th <= 0 || tw <= 0) throw std::invalid_argument("resize_semantic_map: zero target dims");
  if (th > sh || tw > sw)
    throw std::invalid_argument("resize_semantic_map: target larger than source");
  if (map.size() != static_cast<std::size_t>(sh) * sw)
    throw std::invalid_argument("resize_semantic_map: map size mismatch");
  std::vector<std::uint8_t> out(static_cast<std::size_t>(th) * tw);
  for (int i = 0; i < th; ++i) {
    const int si = static_cast<int>(static_cast<long long>(i) * sh / th);
    for (int j = 0; j < tw; ++j) {
      const int sj = static_cast<int>(static_cast<long long>(j) * sw / tw);
      out[static_cast<std::size_t>(i) * tw + j] = map[static_cast<std::size_t>(si) * sw + sj];
    }
  }
  return out;
}

}  // namespace figdiff
