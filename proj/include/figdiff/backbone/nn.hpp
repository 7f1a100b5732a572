// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal trainable-layer toolkit with explicit backward passes. Each module
// caches what its backward needs; one forward may be in flight per instance.

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "figdiff/core/rng.hpp"
#include "figdiff/core/tensor.hpp"
#include "figdiff/kernels/kernels.hpp"

namespace figdiff {

template <typename T>
struct Param {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  void setup(std::string n, std::vector<int> shape) {
    name = std::move(n);
    value = Tensor<T>(shape);
    grad = Tensor<T>(std::move(shape));
  }
};

template <typename T>
using ParamRefs = std::vector<Param<T>*>;

template <typename T>
std::size_t total_params(const ParamRefs<T>& ps) {
  std::size_t n = 0;
  for (const auto* p : ps) n += p->value.numel();
  return n;
}

template <typename T>
void zero_grads(const ParamRefs<T>& ps) {
  for (auto* p : ps) p->grad.zero();
}

// ---------------------------------------------------------------------------

template <typename T>
struct Conv2d {
  int ci = 0, co = 0, k = 3, stride = 1, pad = 1;
  Param<T> w, b;
  Tensor<T> x_cache;

  void init(const std::string& name, int ci_, int co_, int k_, int stride_, int pad_, Rng& rng,
            bool zero_init = false) {
    ci = ci_;
    co = co_;
    k = k_;
    stride = stride_;
    pad = pad_;
    w.setup(name + ".w", {co, ci, k, k});
    b.setup(name + ".b", {co});
    if (!zero_init) {
      const double std = std::sqrt(2.0 / (static_cast<double>(ci) * k * k));
      rng.fill_normal(w.value.ptr(), w.value.numel(), std);
    }
  }

  void collect(ParamRefs<T>& out) {
    out.push_back(&w);
    out.push_back(&b);
  }

  Tensor<T> forward(const Tensor<T>& x) {
    const int B = x.dim(0), H = x.dim(2), W = x.dim(3);
    if (x.dim(1) != ci) throw std::invalid_argument(w.name + ": channel mismatch");
    x_cache = x;
    Tensor<T> y({B, co, kernels::conv_out_dim(H, k, stride, pad),
                 kernels::conv_out_dim(W, k, stride, pad)});
    kernels::conv2d_forward(x.ptr(), w.value.ptr(), b.value.ptr(), y.ptr(), B, ci, H, W, co, k,
                            stride, pad);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy, bool want_dx = true) {
    const int B = x_cache.dim(0), H = x_cache.dim(2), W = x_cache.dim(3);
    kernels::conv2d_backward_weights(dy.ptr(), x_cache.ptr(), w.grad.ptr(), b.grad.ptr(), B, ci,
                                     H, W, co, k, stride, pad);
    Tensor<T> dx;
    if (want_dx) {
      dx = Tensor<T>({B, ci, H, W});
      kernels::conv2d_backward_input(dy.ptr(), w.value.ptr(), dx.ptr(), B, ci, H, W, co, k,
                                     stride, pad);
    }
    return dx;
  }
};

template <typename T>
struct Linear {
  int in = 0, out = 0;
  Param<T> w, b;
  Tensor<T> x_cache;

  void init(const std::string& name, int in_, int out_, Rng& rng, bool zero_init = false) {
    in = in_;
    out = out_;
    w.setup(name + ".w", {out, in});
    b.setup(name + ".b", {out});
    if (!zero_init) {
      const double std = std::sqrt(2.0 / static_cast<double>(in));
      rng.fill_normal(w.value.ptr(), w.value.numel(), std);
    }
  }

  void collect(ParamRefs<T>& out_refs) {
    out_refs.push_back(&w);
    out_refs.push_back(&b);
  }

  Tensor<T> forward(const Tensor<T>& x) {
    const int B = x.dim(0);
    if (x.dim(1) != in) throw std::invalid_argument(w.name + ": width mismatch");
    x_cache = x;
    Tensor<T> y({B, out});
    kernels::linear_forward(x.ptr(), w.value.ptr(), b.value.ptr(), y.ptr(), B, in, out);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy, bool want_dx = true) {
    const int B = x_cache.dim(0);
    Tensor<T> dx;
    if (want_dx) dx = Tensor<T>({B, in});
    kernels::linear_backward(dy.ptr(), x_cache.ptr(), w.value.ptr(), want_dx ? dx.ptr() : nullptr,
                             w.grad.ptr(), b.grad.ptr(), B, in, out);
    return dx;
  }
};

/// Group normalization without learned affine (SPADE supplies the affine).
template <typename T>
struct GroupNorm {
  int channels = 0, groups = 8;
  T eps = T(1e-5);
  Tensor<T> x_cache, mean_cache, rstd_cache;

  void init(int channels_, int groups_) {
    channels = channels_;
    groups = groups_;
    if (channels % groups != 0)
      throw std::invalid_argument("group norm: channels " + std::to_string(channels) +
                                  " not divisible by groups " + std::to_string(groups));
  }

  Tensor<T> forward(const Tensor<T>& x) {
    const int B = x.dim(0), HW = x.dim(2) * x.dim(3);
    x_cache = x;
    mean_cache = Tensor<T>({B, groups});
    rstd_cache = Tensor<T>({B, groups});
    Tensor<T> y(x.shape);
    kernels::group_norm_forward(x.ptr(), y.ptr(), mean_cache.ptr(), rstd_cache.ptr(), B, channels,
                                HW, groups, eps);
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const int B = x_cache.dim(0), HW = x_cache.dim(2) * x_cache.dim(3);
    Tensor<T> dx(x_cache.shape);
    kernels::group_norm_backward(dy.ptr(), x_cache.ptr(), mean_cache.ptr(), rstd_cache.ptr(),
                                 dx.ptr(), B, channels, HW, groups);
    return dx;
  }
};

template <typename T>
struct Relu {
  Tensor<T> x_cache;

  Tensor<T> forward(const Tensor<T>& x) {
    x_cache = x;
    Tensor<T> y(x.shape);
    kernels::relu_forward(x.ptr(), y.ptr(), x.numel());
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> dx(x_cache.shape);
    kernels::relu_backward(dy.ptr(), x_cache.ptr(), dx.ptr(), dx.numel());
    return dx;
  }
};

}  // namespace figdiff
