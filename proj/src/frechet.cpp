// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#include "figdiff/metrics/frechet.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace figdiff {

namespace {

constexpr double kEigTolerance = -1e-6;

using Mat = Eigen::MatrixXd;

Mat to_matrix(const FeatureStats& s) {
  const int k = s.k();
  if (s.cov.size() != static_cast<std::size_t>(k) * k)
    throw std::invalid_argument("frechet: covariance size mismatch");
  Mat m(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) m(i, j) = s.cov[static_cast<std::size_t>(i) * k + j];
  return 0.5 * (m + m.transpose());
}

/// Symmetric PSD square root with negative-eigenvalue clamping.
Mat psd_sqrt(const Mat& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Mat> eig(m);
  if (eig.info() != Eigen::Success) throw std::runtime_error("frechet: eigendecomposition failed");
  Eigen::VectorXd d = eig.eigenvalues();
  for (int i = 0; i < d.size(); ++i) {
    if (d(i) < kEigTolerance)
      throw std::invalid_argument(std::string("frechet: ") + what +
                                  " is not PSD within tolerance (eigenvalue " +
                                  std::to_string(d(i)) + ")");
    d(i) = std::sqrt(std::max(d(i), 0.0));
  }
  return eig.eigenvectors() * d.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

FeatureStats FeatureStats::from_vectors(const std::vector<std::vector<double>>& features) {
  if (features.size() < 2)
    throw std::invalid_argument("feature stats: need at least 2 samples, got " +
                                std::to_string(features.size()));
  const std::size_t k = features[0].size();
  FeatureStats s;
  s.count = features.size();
  s.mean.assign(k, 0.0);
  for (const auto& f : features) {
    if (f.size() != k) throw std::invalid_argument("feature stats: inconsistent dims");
    for (std::size_t i = 0; i < k; ++i) s.mean[i] += f[i];
  }
  for (auto& m : s.mean) m /= static_cast<double>(s.count);
  s.cov.assign(k * k, 0.0);
  for (const auto& f : features)
    for (std::size_t i = 0; i < k; ++i) {
      const double di = f[i] - s.mean[i];
      for (std::size_t j = 0; j < k; ++j) s.cov[i * k + j] += di * (f[j] - s.mean[j]);
    }
  for (auto& c : s.cov) c /= static_cast<double>(s.count - 1);
  return s;
}

double frechet_distance(const FeatureStats& s1, const FeatureStats& s2) {
  if (s1.k() != s2.k()) throw std::invalid_argument("frechet: feature dims differ");
  if (s1.count < 2 || s2.count < 2) throw std::invalid_argument("frechet: need count >= 2");
  const int k = s1.k();
  const Mat c1 = to_matrix(s1), c2 = to_matrix(s2);
  const Mat s1h = psd_sqrt(c1, "covariance 1");
  const Mat inner = s1h * c2 * s1h;
  const Mat sq = psd_sqrt(0.5 * (inner + inner.transpose()), "product covariance");

  double mu = 0;
  for (int i = 0; i < k; ++i) {
    const double d = s1.mean[static_cast<std::size_t>(i)] - s2.mean[static_cast<std::size_t>(i)];
    mu += d * d;
  }
  const double d = mu + c1.trace() + c2.trace() - 2.0 * sq.trace();
  return std::max(d, 0.0);
}

}  // namespace figdiff
