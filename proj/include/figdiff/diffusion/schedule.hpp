// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "figdiff/core/tensor.hpp"

namespace figdiff {

/// beta/alpha tables for T steps, 1-based step indexing with the convention
/// alpha_bar(0) = 1. posterior_var is the DDPM q(x_{t-1}|x_t,x_0) variance;
/// its t=1 entry (which the sampler never adds noise with) is clamped to the
/// t=2 value so every entry stays within (0, beta_t].
struct NoiseSchedule {
  int T = 0;
  std::vector<double> beta;           // beta[t-1]
  std::vector<double> alpha;          // 1 - beta
  std::vector<double> alpha_bar;      // cumulative product
  std::vector<double> posterior_var;  // length T

  double abar(int t) const {  // alpha_bar with abar(0) = 1
    if (t < 0 || t > T) throw std::out_of_range("schedule: t out of range");
    return t == 0 ? 1.0 : alpha_bar[static_cast<std::size_t>(t - 1)];
  }
  double beta_at(int t) const { return beta[static_cast<std::size_t>(t - 1)]; }
  double alpha_at(int t) const { return alpha[static_cast<std::size_t>(t - 1)]; }
  double posterior_var_at(int t) const { return posterior_var[static_cast<std::size_t>(t - 1)]; }
};

inline NoiseSchedule make_schedule(int T, double beta_start, double beta_end) {
  if (T < 1) throw std::invalid_argument("make_schedule: T must be >= 1");
  if (!(beta_start > 0.0) || !(beta_start <= beta_end) || !(beta_end < 1.0))
    throw std::invalid_argument("make_schedule: need 0 < beta_start <= beta_end < 1");
  NoiseSchedule s;
  s.T = T;
  s.beta.resize(static_cast<std::size_t>(T));
  for (int i = 0; i < T; ++i)
    s.beta[static_cast<std::size_t>(i)] =
        T == 1 ? beta_start : beta_start + (beta_end - beta_start) * i / (T - 1);
  s.alpha.resize(static_cast<std::size_t>(T));
  s.alpha_bar.resize(static_cast<std::size_t>(T));
  double prod = 1.0;
  for (int i = 0; i < T; ++i) {
    s.alpha[static_cast<std::size_t>(i)] = 1.0 - s.beta[static_cast<std::size_t>(i)];
    prod *= s.alpha[static_cast<std::size_t>(i)];
    s.alpha_bar[static_cast<std::size_t>(i)] = prod;
  }
  s.posterior_var.resize(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t)
    s.posterior_var[static_cast<std::size_t>(t - 1)] =
        s.beta_at(t) * (1.0 - s.abar(t - 1)) / (1.0 - s.abar(t));
  if (T >= 2) s.posterior_var[0] = s.posterior_var[1];
  else s.posterior_var[0] = s.beta[0];

  for (int t = 1; t <= T; ++t) {
    if (t > 1 && !(s.abar(t) < s.abar(t - 1)))
      throw std::logic_error("make_schedule: alpha_bar not strictly decreasing");
    if (!(s.posterior_var_at(t) > 0.0 && s.posterior_var_at(t) <= s.beta_at(t) + 1e-15))
      throw std::logic_error("make_schedule: posterior variance outside (0, beta_t]");
  }
  return s;
}

/// x_t = sqrt(abar_t) x_0 + sqrt(1 - abar_t) eps
template <typename T>
Tensor<T> q_sample(const Tensor<T>& x0, int t, const Tensor<T>& eps, const NoiseSchedule& sch) {
  if (t < 1 || t > sch.T) throw std::out_of_range("q_sample: t outside [1, T]");
  if (!x0.same_shape(eps)) throw std::invalid_argument("q_sample: eps shape mismatch");
  const T a = static_cast<T>(std::sqrt(sch.abar(t)));
  const T b = static_cast<T>(std::sqrt(1.0 - sch.abar(t)));
  Tensor<T> xt(x0.shape);
  for (std::size_t i = 0; i < x0.numel(); ++i) xt[i] = a * x0[i] + b * eps[i];
  return xt;
}

}  // namespace figdiff
