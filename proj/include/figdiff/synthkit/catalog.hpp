// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "figdiff/core/image.hpp"
#include "figdiff/core/serial.hpp"

namespace figdiff {

/// Part layout vocabulary and canvas geometry for the procedural figure
/// generator. Label 0 is always background.
struct PartCatalog {
  int n = 0;
  std::vector<std::string> part_names;
  std::vector<std::string> color_names;
  std::vector<Rgb> color_rgb;
  std::vector<std::string> pattern_names;  // pattern 0 is always "solid"
  int H = 64, W = 32;

  static PartCatalog toy_default();
  /// Ten-part layout matching a full-body parsing vocabulary
  /// (background, top, outer, skirt, dress, pants, hair, face, shoes, skin).
  static PartCatalog parts10();

  void validate() const;
  int index_of(const std::string& part_name) const;
  int color_index(const std::string& word) const;
  int pattern_index(const std::string& word) const;

  /// Fingerprint over every field; persisted in dataset manifests so that
  /// training refuses data generated under a different catalog.
  std::uint64_t hash() const;
};

/// Darkened secondary shade used by stripe/check patterns. Same hue as the
/// primary so per-part hue statistics stay within one band.
inline Rgb pattern_secondary(const Rgb& c) {
  constexpr float kShade = 0.55f;
  return {c.r * kShade, c.g * kShade, c.b * kShade};
}

}  // namespace figdiff
