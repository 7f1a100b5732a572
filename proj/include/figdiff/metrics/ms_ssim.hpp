// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "figdiff/core/image.hpp"

namespace figdiff {

struct MsSsimResult {
  double value = 0.0;
  int levels_used = 0;
  bool downgraded = false;  // fewer levels than requested (small canvas)
};

/// Multi-scale SSIM on luma with the canonical 5-level weights and an 11-tap
/// Gaussian window (sigma 1.5). Small canvases automatically use fewer
/// levels (renormalized weights); an image smaller than one window is an
/// error.
MsSsimResult ms_ssim_ex(const ImageF& a, const ImageF& b, int levels = 5, int window = 11);

inline double ms_ssim(const ImageF& a, const ImageF& b, int levels = 5, int window = 11) {
  return ms_ssim_ex(a, b, levels, window).value;
}

}  // namespace figdiff
