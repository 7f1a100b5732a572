// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "figdiff/backbone/nn.hpp"
#include "figdiff/smr/memory_bank.hpp"

namespace figdiff {

enum class FuseMode { concat, sum };

inline FuseMode fuse_mode_from_string(const std::string& s) {
  if (s == "concat") return FuseMode::concat;
  if (s == "sum") return FuseMode::sum;
  throw std::invalid_argument("fuse mode must be \"concat\" or \"sum\", got \"" + s + "\"");
}

/// Fuses the refined part embeddings with the diffusion timestep into the
/// global condition t'. Default: sinusoidal time embedding concatenated with
/// the flattened n x c matrix, through a 2-layer MLP. The sum variant
/// projects both sides to the hidden width and adds them before the output
/// layer. The output layer must not start at zero: the downstream omega/b
/// FCs already do, and with t' = 0 as well both sides of that product would
/// keep zero gradients forever.
template <typename T>
struct ConditionFuser {
  int n = 0, c = 0, time_dim = 0, cond = 0, hidden = 0;
  FuseMode mode = FuseMode::concat;
  Linear<T> fc1;          // concat mode
  Linear<T> fc_t, fc_f;   // sum mode
  Linear<T> fc2;
  Relu<T> act;

  void init(int n_, int c_, int time_dim_, int cond_, Rng& rng, FuseMode mode_ = FuseMode::concat) {
    n = n_;
    c = c_;
    time_dim = time_dim_;
    cond = cond_;
    hidden = 2 * cond_;
    mode = mode_;
    if (mode == FuseMode::concat) {
      fc1.init("fuse.fc1", time_dim + n * c, hidden, rng);
    } else {
      fc_t.init("fuse.fc_t", time_dim, hidden, rng);
      fc_f.init("fuse.fc_f", n * c, hidden, rng);
    }
    fc2.init("fuse.fc2", hidden, cond, rng);
  }

  void collect(ParamRefs<T>& out) {
    if (mode == FuseMode::concat) {
      fc1.collect(out);
    } else {
      fc_t.collect(out);
      fc_f.collect(out);
    }
    fc2.collect(out);
  }

  /// Standard sinusoidal embedding of an integer timestep.
  void time_embedding(int t, T* out) const {
    const int half = time_dim / 2;
    for (int i = 0; i < half; ++i) {
      const double freq = std::exp(-std::log(10000.0) * i / half);
      out[i] = static_cast<T>(std::sin(t * freq));
      out[half + i] = static_cast<T>(std::cos(t * freq));
    }
    if (time_dim % 2 == 1) out[time_dim - 1] = T(0);
  }

  /// f_p2: (B, n, c) with null rows already zeroed; t: per-sample steps.
  Tensor<T> forward(const Tensor<T>& f_p2, const std::vector<int>& t) {
    const int B = f_p2.dim(0);
    if (f_p2.dim(1) != n || f_p2.dim(2) != c)
      throw std::invalid_argument("fuser: embedding shape mismatch, got " +
                                  shape_str(f_p2.shape));
    if (static_cast<int>(t.size()) != B) throw std::invalid_argument("fuser: t batch mismatch");
    if (mode == FuseMode::concat) {
      Tensor<T> in({B, time_dim + n * c});
      for (int b = 0; b < B; ++b) {
        T* row = in.ptr() + static_cast<std::size_t>(b) * in.dim(1);
        time_embedding(t[static_cast<std::size_t>(b)], row);
        const T* src = f_p2.ptr() + static_cast<std::size_t>(b) * n * c;
        std::copy(src, src + static_cast<std::size_t>(n) * c, row + time_dim);
      }
      return fc2.forward(act.forward(fc1.forward(in)));
    }
    Tensor<T> te({B, time_dim}), fe({B, n * c});
    for (int b = 0; b < B; ++b) {
      time_embedding(t[static_cast<std::size_t>(b)], te.ptr() + static_cast<std::size_t>(b) * time_dim);
      const T* src = f_p2.ptr() + static_cast<std::size_t>(b) * n * c;
      std::copy(src, src + static_cast<std::size_t>(n) * c,
                fe.ptr() + static_cast<std::size_t>(b) * n * c);
    }
    Tensor<T> h = fc_t.forward(te);
    const Tensor<T> h2 = fc_f.forward(fe);
    kernels::axpy(T(1), h2.ptr(), h.ptr(), h.numel());
    return fc2.forward(act.forward(h));
  }

  /// Parameter grads only; the embeddings upstream are constants here.
  void backward(const Tensor<T>& d_tprime) {
    const Tensor<T> dh = act.backward(fc2.backward(d_tprime));
    if (mode == FuseMode::concat) {
      fc1.backward(dh, /*want_dx=*/false);
    } else {
      fc_t.backward(dh, /*want_dx=*/false);
      fc_f.backward(dh, /*want_dx=*/false);
    }
  }
};

}  // namespace figdiff
