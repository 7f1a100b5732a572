// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#include "figdiff/metrics/ms_ssim.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace figdiff {

namespace {

constexpr double kC1 = 0.01 * 0.01;  // (K1 * L)^2 with L = 1
constexpr double kC2 = 0.03 * 0.03;
const double kWeights5[5] = {0.0448, 0.2856, 0.3001, 0.2363, 0.1333};

struct Plane {
  int h = 0, w = 0;
  std::vector<double> v;
};

Plane to_luma(const ImageF& img) {
  Plane p{img.h, img.w, std::vector<double>(static_cast<std::size_t>(img.h) * img.w)};
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x) {
      const float* px = img.px(y, x);
      p.v[static_cast<std::size_t>(y) * img.w + x] =
          0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2];
    }
  return p;
}

Plane downsample2(const Plane& p) {
  Plane o{p.h / 2, p.w / 2, {}};
  o.v.resize(static_cast<std::size_t>(o.h) * o.w);
  for (int y = 0; y < o.h; ++y)
    for (int x = 0; x < o.w; ++x)
      o.v[static_cast<std::size_t>(y) * o.w + x] =
          0.25 * (p.v[static_cast<std::size_t>(2 * y) * p.w + 2 * x] +
                  p.v[static_cast<std::size_t>(2 * y) * p.w + 2 * x + 1] +
                  p.v[static_cast<std::size_t>(2 * y + 1) * p.w + 2 * x] +
                  p.v[static_cast<std::size_t>(2 * y + 1) * p.w + 2 * x + 1]);
  return o;
}

std::vector<double> gaussian_window(int n, double sigma) {
  std::vector<double> w(static_cast<std::size_t>(n));
  const double c = (n - 1) / 2.0;
  double sum = 0;
  for (int i = 0; i < n; ++i) {
    w[static_cast<std::size_t>(i)] = std::exp(-(i - c) * (i - c) / (2 * sigma * sigma));
    sum += w[static_cast<std::size_t>(i)];
  }
  for (auto& x : w) x /= sum;
  return w;
}

/// Valid-mode separable Gaussian filter.
Plane blur(const Plane& p, const std::vector<double>& win) {
  const int k = static_cast<int>(win.size());
  Plane tmp{p.h, p.w - k + 1, std::vector<double>(static_cast<std::size_t>(p.h) * (p.w - k + 1))};
  for (int y = 0; y < p.h; ++y)
    for (int x = 0; x < tmp.w; ++x) {
      double acc = 0;
      for (int i = 0; i < k; ++i)
        acc += win[static_cast<std::size_t>(i)] * p.v[static_cast<std::size_t>(y) * p.w + x + i];
      tmp.v[static_cast<std::size_t>(y) * tmp.w + x] = acc;
    }
  Plane out{p.h - k + 1, tmp.w,
            std::vector<double>(static_cast<std::size_t>(p.h - k + 1) * tmp.w)};
  for (int y = 0; y < out.h; ++y)
    for (int x = 0; x < out.w; ++x) {
      double acc = 0;
      for (int i = 0; i < k; ++i)
        acc += win[static_cast<std::size_t>(i)] * tmp.v[static_cast<std::size_t>(y + i) * tmp.w + x];
      out.v[static_cast<std::size_t>(y) * out.w + x] = acc;
    }
  return out;
}

Plane mul(const Plane& a, const Plane& b) {
  Plane o = a;
  for (std::size_t i = 0; i < o.v.size(); ++i) o.v[i] *= b.v[i];
  return o;
}

/// Mean luminance and contrast-structure terms over the valid region.
void ssim_level(const Plane& x, const Plane& y, const std::vector<double>& win, double& mean_l,
                double& mean_cs, double& mean_lcs) {
  const Plane mx = blur(x, win), my = blur(y, win);
  const Plane mxx = blur(mul(x, x), win), myy = blur(mul(y, y), win), mxy = blur(mul(x, y), win);
  double sl = 0, scs = 0, slcs = 0;
  for (std::size_t i = 0; i < mx.v.size(); ++i) {
    const double mux = mx.v[i], muy = my.v[i];
    const double sxx = mxx.v[i] - mux * mux;
    const double syy = myy.v[i] - muy * muy;
    const double sxy = mxy.v[i] - mux * muy;
    const double l = (2 * mux * muy + kC1) / (mux * mux + muy * muy + kC1);
    const double cs = (2 * sxy + kC2) / (sxx + syy + kC2);
    sl += l;
    scs += cs;
    slcs += l * cs;
  }
  const double n = static_cast<double>(mx.v.size());
  mean_l = sl / n;
  mean_cs = scs / n;
  mean_lcs = slcs / n;
}

}  // namespace

MsSsimResult ms_ssim_ex(const ImageF& a, const ImageF& b, int levels, int window) {
  if (!a.same_size(b)) throw std::invalid_argument("ms_ssim: image sizes differ");
  if (levels < 1 || levels > 5) throw std::invalid_argument("ms_ssim: levels must be in [1,5]");
  if (window < 3 || window % 2 == 0)
    throw std::invalid_argument("ms_ssim: window must be odd and >= 3");
  const int min_side = std::min(a.h, a.w);
  if (min_side < window)
    throw std::invalid_argument("ms_ssim: image too small for one level (min side " +
                                std::to_string(min_side) + " < window " +
                                std::to_string(window) + ")");
  int max_levels = 1;
  while (max_levels < levels && (min_side >> max_levels) >= window) ++max_levels;

  MsSsimResult res;
  res.levels_used = std::min(levels, max_levels);
  res.downgraded = res.levels_used < levels;

  std::vector<double> weights(static_cast<std::size_t>(res.levels_used));
  double wsum = 0;
  for (int i = 0; i < res.levels_used; ++i) {
    weights[static_cast<std::size_t>(i)] = kWeights5[i];
    wsum += kWeights5[i];
  }
  for (auto& w : weights) w /= wsum;

  const std::vector<double> win = gaussian_window(window, 1.5);
  Plane x = to_luma(a), y = to_luma(b);
  double value = 1.0;
  for (int lvl = 0; lvl < res.levels_used; ++lvl) {
    double ml, mcs, mlcs;
    ssim_level(x, y, win, ml, mcs, mlcs);
    const bool last = lvl == res.levels_used - 1;
    // negative similarity values cannot enter the weighted geometric mean
    const double term = std::max(last ? mlcs : mcs, 0.0);
    value *= std::pow(term, weights[static_cast<std::size_t>(lvl)]);
    if (!last) {
      x = downsample2(x);
      y = downsample2(y);
    }
  }
  res.value = value;
  return res;
}

}  // namespace figdiff
