// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace figdiff {

/// HWC float image with values in [0,1].
struct ImageF {
  int h = 0, w = 0;
  std::vector<float> rgb;  // h*w*3

  ImageF() = default;
  ImageF(int h_, int w_) : h(h_), w(w_), rgb(static_cast<std::size_t>(h_) * w_ * 3, 0.f) {}

  float* px(int y, int x) { return rgb.data() + (static_cast<std::size_t>(y) * w + x) * 3; }
  const float* px(int y, int x) const {
    return rgb.data() + (static_cast<std::size_t>(y) * w + x) * 3;
  }

  void set(int y, int x, float r, float g, float b) {
    float* p = px(y, x);
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }

  bool same_size(const ImageF& o) const { return h == o.h && w == o.w; }
};

struct Rgb {
  float r, g, b;
};

/// Hue in degrees [0,360) and saturation in [0,1] (HSV convention).
inline void rgb_to_hue_sat(float r, float g, float b, float& hue, float& sat) {
  const float mx = std::max({r, g, b});
  const float mn = std::min({r, g, b});
  const float d = mx - mn;
  sat = mx > 0.f ? d / mx : 0.f;
  if (d <= 1e-8f) {
    hue = 0.f;
    return;
  }
  float h;
  if (mx == r)
    h = std::fmod((g - b) / d, 6.f);
  else if (mx == g)
    h = (b - r) / d + 2.f;
  else
    h = (r - g) / d + 4.f;
  h *= 60.f;
  if (h < 0.f) h += 360.f;
  hue = h;
}

/// Smallest absolute angular distance between two hues, in degrees.
inline float hue_distance(float a, float b) {
  float d = std::fabs(a - b);
  return std::min(d, 360.f - d);
}

inline float clamp01(float v) { return std::min(1.f, std::max(0.f, v)); }

/// Mean color of the pixels where mask(y,x) == part_id. Returns pixel count.
inline std::size_t masked_mean_color(const ImageF& img, const std::vector<std::uint8_t>& map,
                                     int part_id, Rgb& mean) {
  if (static_cast<std::size_t>(img.h) * img.w != map.size())
    throw std::invalid_argument("masked_mean_color: image/map size mismatch");
  double acc[3] = {0, 0, 0};
  std::size_t cnt = 0;
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x)
      if (map[static_cast<std::size_t>(y) * img.w + x] == part_id) {
        const float* p = img.px(y, x);
        acc[0] += p[0];
        acc[1] += p[1];
        acc[2] += p[2];
        ++cnt;
      }
  if (cnt) {
    mean = {static_cast<float>(acc[0] / cnt), static_cast<float>(acc[1] / cnt),
            static_cast<float>(acc[2] / cnt)};
  } else {
    mean = {0.f, 0.f, 0.f};
  }
  return cnt;
}

}  // namespace figdiff
