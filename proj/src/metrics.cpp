// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#include "figdiff/metrics/alignment.hpp"

#include <cmath>
#include <stdexcept>

namespace figdiff {

namespace {

SemanticScene wrap(const ImageF& image, const std::vector<std::uint8_t>& map) {
  SemanticScene s;
  s.image = image;
  s.map = map;
  return s;
}

}  // namespace

AlignmentScore alignment_score(const ImageF& image, const std::vector<std::uint8_t>& map,
                               const std::map<int, std::string>& captions,
                               const PartEncoder& encoder, int n_parts) {
  const SemanticScene scene = wrap(image, map);
  AlignmentScore out;
  double sum = 0;
  int count = 0;
  for (int p = 1; p < n_parts; ++p) {
    const PartImage pi = extract_part(scene, p, n_parts);
    bool present = false;
    for (const auto v : map)
      if (v == p) {
        present = true;
        break;
      }
    if (!present) continue;
    const auto it = captions.find(p);
    if (it == captions.end())
      throw std::invalid_argument("alignment_score: missing caption for part " +
                                  std::to_string(p));
    bool null_flag = false;
    const auto ei = encoder.encode_image(pi.image, p, null_flag);
    if (null_flag) continue;  // part present in map but fully black in image
    const auto et = encoder.encode_text(it->second, p);
    const double cs = cosine(ei, et);
    out.per_part[p] = cs;
    sum += cs;
    ++count;
  }
  if (count == 0) throw std::invalid_argument("alignment_score: no non-background parts in map");
  out.mean = sum / count;
  return out;
}

std::vector<double> scene_features(const ImageF& image, const std::vector<std::uint8_t>& map,
                                   const PartEncoder& encoder, int n_parts) {
  const SemanticScene scene = wrap(image, map);
  const int c = encoder.dim();
  std::vector<double> f(static_cast<std::size_t>(n_parts) * c, 0.0);
  for (int p = 0; p < n_parts; ++p) {
    const PartImage pi = extract_part(scene, p, n_parts);
    if (pi.empty) continue;
    bool null_flag = false;
    const auto e = encoder.encode_image(pi.image, p, null_flag);
    if (null_flag) continue;
    for (int d = 0; d < c; ++d) f[static_cast<std::size_t>(p) * c + d] = e[static_cast<std::size_t>(d)];
  }
  return f;
}

double feature_distance(const ImageF& a, const ImageF& b, const std::vector<std::uint8_t>& map,
                        const PartEncoder& encoder, int n_parts) {
  const auto fa = scene_features(a, map, encoder, n_parts);
  const auto fb = scene_features(b, map, encoder, n_parts);
  const int c = encoder.dim();
  double sum = 0;
  int count = 0;
  for (int p = 1; p < n_parts; ++p) {
    double d2 = 0;
    bool any = false;
    for (int i = 0; i < c; ++i) {
      const double da = fa[static_cast<std::size_t>(p) * c + i];
      const double db = fb[static_cast<std::size_t>(p) * c + i];
      if (da != 0.0 || db != 0.0) any = true;
      d2 += (da - db) * (da - db);
    }
    if (any) {
      sum += std::sqrt(d2);
      ++count;
    }
  }
  return count ? sum / count : 0.0;
}

}  // namespace figdiff
