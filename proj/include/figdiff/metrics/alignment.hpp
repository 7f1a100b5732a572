// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "figdiff/encoder/encoder.hpp"
#include "figdiff/metrics/frechet.hpp"
#include "figdiff/synthkit/scene.hpp"

namespace figdiff {

struct AlignmentScore {
  std::map<int, double> per_part;  // cosine(image embedding, caption embedding)
  double mean = 0.0;               // over non-background parts
};

/// Caption-alignment: per present part, cosine between the part-image
/// embedding and the caption embedding. Errors on a missing caption or an
/// all-background map.
AlignmentScore alignment_score(const ImageF& image, const std::vector<std::uint8_t>& map,
                               const std::map<int, std::string>& captions,
                               const PartEncoder& encoder, int n_parts);

/// toy-FID feature vector: reference-encoder per-part embeddings concatenated
/// (absent parts contribute zeros). Length n_parts * encoder dim.
std::vector<double> scene_features(const ImageF& image, const std::vector<std::uint8_t>& map,
                                   const PartEncoder& encoder, int n_parts);

/// Mean per-part embedding L2 distance between two images under one map
/// (the pretrained-free stand-in for a perceptual distance, labeled
/// "feat-dist" in reports).
double feature_distance(const ImageF& a, const ImageF& b, const std::vector<std::uint8_t>& map,
                        const PartEncoder& encoder, int n_parts);

}  // namespace figdiff
