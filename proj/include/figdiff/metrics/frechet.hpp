// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

namespace figdiff {

/// Gaussian moments of a feature set (unbiased covariance, count >= 2).
struct FeatureStats {
  std::vector<double> mean;  // k
  std::vector<double> cov;   // k*k row-major, symmetric PSD up to tolerance
  std::size_t count = 0;

  int k() const { return static_cast<int>(mean.size()); }
  static FeatureStats from_vectors(const std::vector<std::vector<double>>& features);
};

/// |mu1-mu2|^2 + Tr(S1 + S2 - 2 (S1 S2)^{1/2}); the matrix square root goes
/// through symmetric eigendecompositions with negative eigenvalues clamped at
/// -1e-6 (beyond that the input is rejected as non-PSD).
double frechet_distance(const FeatureStats& s1, const FeatureStats& s2);

}  // namespace figdiff
