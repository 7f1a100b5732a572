// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "figdiff/core/image.hpp"
#include "figdiff/synthkit/catalog.hpp"

namespace figdiff {

struct EncoderConfig {
  int c = 64;
  std::string kind = "reference";

  void validate() const;
};

/// Joint vision-language part encoder: part images and part captions map into
/// one shared c-dimensional space. Implementations must L2-normalize their
/// outputs; absent parts yield the null embedding (all-zero, flag set).
class PartEncoder {
 public:
  virtual ~PartEncoder() = default;
  virtual int dim() const = 0;

  /// part_image must be zero outside the part (extract_part output).
  virtual std::vector<float> encode_image(const ImageF& part_image, int part_id,
                                          bool& null_flag) const = 0;
  virtual std::vector<float> encode_text(const std::string& caption, int part_id) const = 0;
};

/// cos(a,b) = a.b / (|a||b|). Throws on zero input.
double cosine(const std::vector<float>& a, const std::vector<float>& b);
double cosine(const double* a, const double* b, int n);

/// Deterministic, training-free reference encoder. Computes interpretable
/// part statistics (masked mean color, saturation-weighted 2-bin hue
/// histogram, stripe-orientation energies, mask area, part identity and a
/// modality offset), then applies a fixed seeded linear projection to c dims
/// and normalizes. The text side maps attribute words onto the same feature
/// coordinates, which is what makes text-free training sound here.
class ReferenceEncoder : public PartEncoder {
 public:
  ReferenceEncoder(const PartCatalog& catalog, const EncoderConfig& cfg);

  int dim() const override { return c_; }
  std::vector<float> encode_image(const ImageF& part_image, int part_id,
                                  bool& null_flag) const override;
  std::vector<float> encode_text(const std::string& caption, int part_id) const override;

  int feature_dim() const { return k_; }

 private:
  std::vector<float> project(const std::vector<double>& f) const;
  std::vector<double> text_features(int color, int pattern, int part_id) const;

  PartCatalog cat_;
  int c_ = 0;
  int k_ = 0;
  std::vector<double> proj_;          // c_ x k_, row-major
  std::vector<double> nominal_area_;  // per part, measured from probe scenes
};

using EncoderFactory =
    std::function<std::unique_ptr<PartEncoder>(const PartCatalog&, const EncoderConfig&)>;

/// Plugin registry; "reference" is always available.
void register_encoder(const std::string& name, EncoderFactory factory);
std::unique_ptr<PartEncoder> make_encoder(const PartCatalog& catalog, const EncoderConfig& cfg);

}  // namespace figdiff
