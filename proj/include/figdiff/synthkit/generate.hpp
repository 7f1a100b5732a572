// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include "figdiff/synthkit/catalog.hpp"
#include "figdiff/synthkit/scene.hpp"

namespace figdiff {

/// Render attributes of one part in one scene. The generator owns both the
/// pixels and the caption, so tests can cross-check them exactly.
struct PartAttr {
  bool present = false;
  int color = -1;    // index into catalog.color_rgb
  int pattern = 0;   // index into catalog.pattern_names
};

struct SceneDetail {
  SemanticScene scene;
  std::vector<PartAttr> attrs;  // one per part id
};

/// Deterministic procedural figure: pose parameters (limb angles, widths,
/// lengths) and per-part attributes all derive from (catalog, seed).
/// Throws if the canvas cannot fit a part, naming the part.
SceneDetail generate_scene_detail(const PartCatalog& catalog, std::uint64_t seed);

inline SemanticScene generate_scene(const PartCatalog& catalog, std::uint64_t seed) {
  return generate_scene_detail(catalog, seed).scene;
}

std::string make_caption(const PartCatalog& catalog, int part_id, const PartAttr& attr);

/// Pattern shade rule shared by the renderer and the text encoder:
/// which cell of the 2px pattern grid a pixel falls in.
inline bool pattern_uses_secondary(int pattern, int y, int x) {
  if (pattern == 1) return ((y >> 1) & 1) != 0;                 // striped
  if (pattern == 2) return (((y >> 1) + (x >> 1)) & 1) != 0;    // checked
  return false;                                                 // solid
}

}  // namespace figdiff
