// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0
//
// SPADE normalization, the SPADE ResBlock with global-condition modulation,
// self-attentive alignment over part tokens (SAA) and the cross-modality
// attentive alignment block (CAA) where spatial features query part tokens.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "figdiff/backbone/nn.hpp"
#include "figdiff/smr/memory_bank.hpp"

namespace figdiff {

/// f_spade = gn(f_in) * (1 + gamma(seg)) + beta(seg), with gamma/beta from a
/// small conv net on the one-hot seg at this resolution.
template <typename T>
struct Spade {
  GroupNorm<T> gn;
  Conv2d<T> shared, gamma_head, beta_head;
  Relu<T> act;
  Tensor<T> xhat_cache, gamma_cache;

  void init(const std::string& name, int channels, int n_parts, int hidden, int groups,
            Rng& rng) {
    gn.init(channels, groups);
    shared.init(name + ".shared", n_parts, hidden, 3, 1, 1, rng);
    gamma_head.init(name + ".gamma", hidden, channels, 1, 1, 0, rng);
    beta_head.init(name + ".beta", hidden, channels, 1, 1, 0, rng);
  }

  void collect(ParamRefs<T>& out) {
    shared.collect(out);
    gamma_head.collect(out);
    beta_head.collect(out);
  }

  Tensor<T> forward(const Tensor<T>& x, const Tensor<T>& seg) {
    if (seg.dim(2) != x.dim(2) || seg.dim(3) != x.dim(3))
      throw std::invalid_argument("spade: seg resolution " + shape_str(seg.shape) +
                                  " does not match features " + shape_str(x.shape));
    xhat_cache = gn.forward(x);
    const Tensor<T> h = act.forward(shared.forward(seg));
    gamma_cache = gamma_head.forward(h);
    const Tensor<T> beta = beta_head.forward(h);
    Tensor<T> y(x.shape);
    const std::size_t n = y.numel();
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i)
      y[i] = xhat_cache[i] * (T(1) + gamma_cache[i]) + beta[i];
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const std::size_t n = dy.numel();
    Tensor<T> dgamma(dy.shape), dxhat(dy.shape);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      dgamma[i] = dy[i] * xhat_cache[i];
      dxhat[i] = dy[i] * (T(1) + gamma_cache[i]);
    }
    Tensor<T> dh = gamma_head.backward(dgamma);
    const Tensor<T> dh2 = beta_head.backward(dy);
    kernels::axpy(T(1), dh2.ptr(), dh.ptr(), dh.numel());
    shared.backward(act.backward(dh), /*want_dx=*/false);  // seg carries no gradient
    return gn.backward(dxhat);
  }
};

/// One SPADE ResBlock: f_t' = conv(relu(spade(f_in, seg))) * (1+omega) + b
/// plus a skip from f_in (1x1 conv when channel widths differ). omega and b
/// come from a zero-initialized FC on the global condition, so the block is
/// condition-free at init.
template <typename T>
struct Sres {
  int ci = 0, co = 0, cond = 0;
  Spade<T> spade;
  Relu<T> act;
  Conv2d<T> main;
  Linear<T> cond_fc;
  Conv2d<T> skip;
  bool has_skip_conv = false;
  Tensor<T> h_cache, ob_cache;

  void init(const std::string& name, int ci_, int co_, int cond_, int n_parts, int hidden,
            int groups, Rng& rng) {
    ci = ci_;
    co = co_;
    cond = cond_;
    spade.init(name + ".spade", ci, n_parts, hidden, groups, rng);
    main.init(name + ".main", ci, co, 3, 1, 1, rng);
    cond_fc.init(name + ".cond_fc", cond, 2 * co, rng, /*zero_init=*/true);
    has_skip_conv = ci != co;
    if (has_skip_conv) skip.init(name + ".skip", ci, co, 1, 1, 0, rng);
  }

  void collect(ParamRefs<T>& out) {
    spade.collect(out);
    main.collect(out);
    cond_fc.collect(out);
    if (has_skip_conv) skip.collect(out);
  }

  Tensor<T> forward(const Tensor<T>& x, const Tensor<T>& seg, const Tensor<T>& tprime) {
    if (tprime.dim(1) != cond)
      throw std::invalid_argument("sres: condition width mismatch, got " +
                                  shape_str(tprime.shape));
    h_cache = main.forward(act.forward(spade.forward(x, seg)));
    ob_cache = cond_fc.forward(tprime);  // (B, 2*co): omega then b
    const int B = x.dim(0), H = h_cache.dim(2), W = h_cache.dim(3);
    Tensor<T> y = has_skip_conv ? skip.forward(x) : x;
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < B; ++b)
      for (int c = 0; c < co; ++c) {
        const T omega = ob_cache.at2(b, c);
        const T bias = ob_cache.at2(b, co + c);
        const T* hp = h_cache.ptr() + (static_cast<std::size_t>(b) * co + c) * H * W;
        T* yp = y.ptr() + (static_cast<std::size_t>(b) * co + c) * H * W;
        for (int i = 0; i < H * W; ++i) yp[i] += hp[i] * (T(1) + omega) + bias;
      }
    return y;
  }

  /// Returns d f_in; accumulates d tprime into dtp.
  Tensor<T> backward(const Tensor<T>& dy, Tensor<T>& dtp) {
    const int B = dy.dim(0), H = dy.dim(2), W = dy.dim(3);
    Tensor<T> dh(h_cache.shape);
    Tensor<T> dob({B, 2 * co});
#pragma omp parallel for collapse(2) schedule(static)
    for (int b = 0; b < B; ++b)
      for (int c = 0; c < co; ++c) {
        const T omega = ob_cache.at2(b, c);
        const T* dyp = dy.ptr() + (static_cast<std::size_t>(b) * co + c) * H * W;
        const T* hp = h_cache.ptr() + (static_cast<std::size_t>(b) * co + c) * H * W;
        T* dhp = dh.ptr() + (static_cast<std::size_t>(b) * co + c) * H * W;
        T sum_dyh = T(0), sum_dy = T(0);
        for (int i = 0; i < H * W; ++i) {
          dhp[i] = dyp[i] * (T(1) + omega);
          sum_dyh += dyp[i] * hp[i];
          sum_dy += dyp[i];
        }
        dob.at2(b, c) = sum_dyh;
        dob.at2(b, co + c) = sum_dy;
      }
    const Tensor<T> dtp_local = cond_fc.backward(dob);
    kernels::axpy(T(1), dtp_local.ptr(), dtp.ptr(), dtp.numel());
    Tensor<T> dx = spade.backward(act.backward(main.backward(dh)));
    if (has_skip_conv) {
      const Tensor<T> dskip = skip.backward(dy);
      kernels::axpy(T(1), dskip.ptr(), dx.ptr(), dx.numel());
    } else {
      kernels::axpy(T(1), dy.ptr(), dx.ptr(), dx.numel());
    }
    return dx;
  }
};

/// Self-attention over the n part tokens with a residual connection. The
/// value projection starts at zero, so the block is the identity at init.
/// Null rows neither attend nor serve as keys and stay null.
template <typename T>
struct Saa {
  int c = 0;
  Param<T> wq, wk, wv;
  Tensor<T> x_cache, q_cache, k_cache, v_cache, a_cache;
  std::vector<std::uint8_t> mask_cache;

  void init(const std::string& name, int c_, Rng& rng) {
    c = c_;
    wq.setup(name + ".wq", {c, c});
    wk.setup(name + ".wk", {c, c});
    wv.setup(name + ".wv", {c, c});
    const double std = 1.0 / std::sqrt(static_cast<double>(c));
    rng.fill_normal(wq.value.ptr(), wq.value.numel(), std);
    rng.fill_normal(wk.value.ptr(), wk.value.numel(), std);
    // wv stays zero
  }

  void collect(ParamRefs<T>& out) {
    out.push_back(&wq);
    out.push_back(&wk);
    out.push_back(&wv);
  }

  /// x: (B, n, c); mask: (B*n), 1 = active row.
  Tensor<T> forward(const Tensor<T>& x, const std::vector<std::uint8_t>& mask) {
    const int B = x.dim(0), n = x.dim(1);
    if (static_cast<int>(mask.size()) != B * n)
      throw std::invalid_argument("saa: mask size mismatch");
    x_cache = x;
    mask_cache = mask;
    q_cache = Tensor<T>({B, n, c});
    k_cache = Tensor<T>({B, n, c});
    v_cache = Tensor<T>({B, n, c});
    a_cache = Tensor<T>({B, n, n});
    Tensor<T> y({B, n, c});
    const T scale = T(1) / std::sqrt(static_cast<T>(c));
    for (int b = 0; b < B; ++b) {
      const std::uint8_t* mb = mask.data() + static_cast<std::size_t>(b) * n;
      bool any = false;
      for (int i = 0; i < n; ++i) any = any || mb[i];
      if (!any) throw std::invalid_argument("saa: all part rows are null");
      const T* xb = x.ptr() + static_cast<std::size_t>(b) * n * c;
      T* qb = q_cache.ptr() + static_cast<std::size_t>(b) * n * c;
      T* kb = k_cache.ptr() + static_cast<std::size_t>(b) * n * c;
      T* vb = v_cache.ptr() + static_cast<std::size_t>(b) * n * c;
      kernels::gemm_nt(xb, wq.value.ptr(), qb, n, c, c, false);
      kernels::gemm_nt(xb, wk.value.ptr(), kb, n, c, c, false);
      kernels::gemm_nt(xb, wv.value.ptr(), vb, n, c, c, false);
      Tensor<T> logits({n, n});
      kernels::gemm_nt(qb, kb, logits.ptr(), n, c, n, false);
      for (auto& v : logits.data) v *= scale;
      T* ab = a_cache.ptr() + static_cast<std::size_t>(b) * n * n;
      kernels::softmax_rows(logits.ptr(), ab, n, n, mb);
      T* yb = y.ptr() + static_cast<std::size_t>(b) * n * c;
      kernels::gemm_nn(ab, vb, yb, n, n, c, false);
      for (int i = 0; i < n; ++i) {
        T* yrow = yb + static_cast<std::size_t>(i) * c;
        const T* xrow = xb + static_cast<std::size_t>(i) * c;
        if (!mb[i]) {
          for (int d = 0; d < c; ++d) yrow[d] = T(0);
        } else {
          for (int d = 0; d < c; ++d) yrow[d] += xrow[d];
        }
      }
    }
    return y;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    const int B = x_cache.dim(0), n = x_cache.dim(1);
    const T scale = T(1) / std::sqrt(static_cast<T>(c));
    Tensor<T> dx({B, n, c});
    for (int b = 0; b < B; ++b) {
      const std::uint8_t* mb = mask_cache.data() + static_cast<std::size_t>(b) * n;
      const T* xb = x_cache.ptr() + static_cast<std::size_t>(b) * n * c;
      const T* qb = q_cache.ptr() + static_cast<std::size_t>(b) * n * c;
      const T* kb = k_cache.ptr() + static_cast<std::size_t>(b) * n * c;
      const T* vb = v_cache.ptr() + static_cast<std::size_t>(b) * n * c;
      const T* ab = a_cache.ptr() + static_cast<std::size_t>(b) * n * n;
      T* dxb = dx.ptr() + static_cast<std::size_t>(b) * n * c;

      // Residual path plus masking of null output rows.
      Tensor<T> dyb({n, c});
      for (int i = 0; i < n; ++i)
        for (int d = 0; d < c; ++d)
          dyb.at2(i, d) = mb[i] ? dy.ptr()[(static_cast<std::size_t>(b) * n + i) * c + d] : T(0);
      for (int i = 0; i < n; ++i)
        for (int d = 0; d < c; ++d) dxb[static_cast<std::size_t>(i) * c + d] = dyb.at2(i, d);

      Tensor<T> dv({n, c}), da({n, n}), dlog({n, n}), dq({n, c}), dk({n, c});
      // A: (n,n), dy: (n,c) -> dV = A^T dy  (n,c)
      kernels::gemm_tn(ab, dyb.ptr(), dv.ptr(), n, n, c, false);
      kernels::gemm_nt(dyb.ptr(), vb, da.ptr(), n, c, n, false);
      kernels::softmax_rows_backward(ab, da.ptr(), dlog.ptr(), n, n, mb);
      for (auto& v : dlog.data) v *= scale;
      kernels::gemm_nn(dlog.ptr(), kb, dq.ptr(), n, n, c, false);
      kernels::gemm_tn(dlog.ptr(), qb, dk.ptr(), n, n, c, false);

      // Parameter grads: dW += x^T d(proj) with W row-major (out,in) used as
      // proj = x * W^T, so dW = d(proj)^T x.
      kernels::gemm_tn(dq.ptr(), xb, wq.grad.ptr(), c, n, c, true);
      kernels::gemm_tn(dk.ptr(), xb, wk.grad.ptr(), c, n, c, true);
      kernels::gemm_tn(dv.ptr(), xb, wv.grad.ptr(), c, n, c, true);

      // Input grads through the three projections.
      kernels::gemm_nn(dq.ptr(), wq.value.ptr(), dxb, n, c, c, true);
      kernels::gemm_nn(dk.ptr(), wk.value.ptr(), dxb, n, c, c, true);
      kernels::gemm_nn(dv.ptr(), wv.value.ptr(), dxb, n, c, c, true);
    }
    return dx;
  }
};

/// Cross-modality attentive alignment: spatial positions of the feature map
/// are queries, part tokens are keys/values, and a zero-initialized output
/// projection adds the aligned features back onto the map.
template <typename T>
struct Caa {
  int cf = 0, c = 0, d = 0;
  Param<T> wq, wk, wv, wo;
  Tensor<T> f_cache, fps_cache, q_cache, k_cache, v_cache, a_cache, attn_cache;
  std::vector<std::uint8_t> mask_cache;

  void init(const std::string& name, int cf_, int c_, int d_, Rng& rng) {
    cf = cf_;
    c = c_;
    d = d_;
    wq.setup(name + ".wq", {d, cf});
    wk.setup(name + ".wk", {d, c});
    wv.setup(name + ".wv", {d, c});
    wo.setup(name + ".wo", {cf, d});
    rng.fill_normal(wq.value.ptr(), wq.value.numel(), 1.0 / std::sqrt(static_cast<double>(cf)));
    // unit-std keys: tokens are unit-norm-ish, so logits get O(1) contrast
    // instead of a near-uniform softmax over parts
    rng.fill_normal(wk.value.ptr(), wk.value.numel(), 1.0);
    rng.fill_normal(wv.value.ptr(), wv.value.numel(), 1.0 / std::sqrt(static_cast<double>(c)));
    // wo stays zero: residual identity at init
  }

  void collect(ParamRefs<T>& out) {
    out.push_back(&wq);
    out.push_back(&wk);
    out.push_back(&wv);
    out.push_back(&wo);
  }

  /// f: (B, cf, H, W); fps: (B, n, c); mask: (B*n).
  Tensor<T> forward(const Tensor<T>& f, const Tensor<T>& fps,
                    const std::vector<std::uint8_t>& mask) {
    const int B = f.dim(0), H = f.dim(2), W = f.dim(3), n = fps.dim(1);
    const int hw = H * W;
    f_cache = f;
    fps_cache = fps;
    mask_cache = mask;
    q_cache = Tensor<T>({B, hw, d});
    k_cache = Tensor<T>({B, n, d});
    v_cache = Tensor<T>({B, n, d});
    a_cache = Tensor<T>({B, hw, n});
    attn_cache = Tensor<T>({B, hw, d});
    Tensor<T> y = f;
    const T scale = T(1) / std::sqrt(static_cast<T>(d));
    std::vector<T> tokens(static_cast<std::size_t>(hw) * cf);
    std::vector<T> out_tok(static_cast<std::size_t>(hw) * cf);
    for (int b = 0; b < B; ++b) {
      to_tokens(f, b, tokens.data());
      const std::uint8_t* mb = mask.data() + static_cast<std::size_t>(b) * n;
      T* qb = q_cache.ptr() + static_cast<std::size_t>(b) * hw * d;
      T* kb = k_cache.ptr() + static_cast<std::size_t>(b) * n * d;
      T* vb = v_cache.ptr() + static_cast<std::size_t>(b) * n * d;
      const T* pb = fps.ptr() + static_cast<std::size_t>(b) * n * c;
      kernels::gemm_nt(tokens.data(), wq.value.ptr(), qb, hw, cf, d, false);
      kernels::gemm_nt(pb, wk.value.ptr(), kb, n, c, d, false);
      kernels::gemm_nt(pb, wv.value.ptr(), vb, n, c, d, false);
      Tensor<T> logits({hw, n});
      kernels::gemm_nt(qb, kb, logits.ptr(), hw, d, n, false);
      for (auto& v : logits.data) v *= scale;
      T* ab = a_cache.ptr() + static_cast<std::size_t>(b) * hw * n;
      kernels::softmax_rows(logits.ptr(), ab, hw, n, mb);
      T* atb = attn_cache.ptr() + static_cast<std::size_t>(b) * hw * d;
      kernels::gemm_nn(ab, vb, atb, hw, n, d, false);
      kernels::gemm_nt(atb, wo.value.ptr(), out_tok.data(), hw, d, cf, false);
      add_tokens(y, b, out_tok.data());
    }
    return y;
  }

  /// Returns df; accumulates dFps into dfps.
  Tensor<T> backward(const Tensor<T>& dy, Tensor<T>& dfps) {
    const int B = f_cache.dim(0), H = f_cache.dim(2), W = f_cache.dim(3), n = fps_cache.dim(1);
    const int hw = H * W;
    const T scale = T(1) / std::sqrt(static_cast<T>(d));
    Tensor<T> df = dy;  // residual path
    std::vector<T> dy_tok(static_cast<std::size_t>(hw) * cf);
    std::vector<T> tokens(static_cast<std::size_t>(hw) * cf);
    std::vector<T> dtok(static_cast<std::size_t>(hw) * cf);
    for (int b = 0; b < B; ++b) {
      to_tokens(dy, b, dy_tok.data());
      to_tokens(f_cache, b, tokens.data());
      const std::uint8_t* mb = mask_cache.data() + static_cast<std::size_t>(b) * n;
      const T* qb = q_cache.ptr() + static_cast<std::size_t>(b) * hw * d;
      const T* kb = k_cache.ptr() + static_cast<std::size_t>(b) * n * d;
      const T* vb = v_cache.ptr() + static_cast<std::size_t>(b) * n * d;
      const T* ab = a_cache.ptr() + static_cast<std::size_t>(b) * hw * n;
      const T* atb = attn_cache.ptr() + static_cast<std::size_t>(b) * hw * d;
      const T* pb = fps_cache.ptr() + static_cast<std::size_t>(b) * n * c;

      // dWo += attn^T dy_tok ; d_attn = dy_tok Wo
      kernels::gemm_tn(dy_tok.data(), atb, wo.grad.ptr(), cf, hw, d, true);
      Tensor<T> dattn({hw, d});
      kernels::gemm_nn(dy_tok.data(), wo.value.ptr(), dattn.ptr(), hw, cf, d, false);

      Tensor<T> da({hw, n}), dlog({hw, n}), dq({hw, d}), dk({n, d}), dv({n, d});
      kernels::gemm_nt(dattn.ptr(), vb, da.ptr(), hw, d, n, false);
      kernels::gemm_tn(ab, dattn.ptr(), dv.ptr(), n, hw, d, false);
      kernels::softmax_rows_backward(ab, da.ptr(), dlog.ptr(), hw, n, mb);
      for (auto& v : dlog.data) v *= scale;
      kernels::gemm_nn(dlog.ptr(), kb, dq.ptr(), hw, n, d, false);
      kernels::gemm_tn(dlog.ptr(), qb, dk.ptr(), n, hw, d, false);

      kernels::gemm_tn(dq.ptr(), tokens.data(), wq.grad.ptr(), d, hw, cf, true);
      kernels::gemm_tn(dk.ptr(), pb, wk.grad.ptr(), d, n, c, true);
      kernels::gemm_tn(dv.ptr(), pb, wv.grad.ptr(), d, n, c, true);

      kernels::gemm_nn(dq.ptr(), wq.value.ptr(), dtok.data(), hw, d, cf, false);
      add_tokens(df, b, dtok.data());
      T* dpb = dfps.ptr() + static_cast<std::size_t>(b) * n * c;
      kernels::gemm_nn(dk.ptr(), wk.value.ptr(), dpb, n, d, c, true);
      kernels::gemm_nn(dv.ptr(), wv.value.ptr(), dpb, n, d, c, true);
    }
    return df;
  }

 private:
  // (cf,H,W) <-> (H*W, cf) token layout for one batch item
  void to_tokens(const Tensor<T>& f, int b, T* tok) const {
    const int H = f.dim(2), W = f.dim(3), hw = H * W;
    const T* fb = f.ptr() + static_cast<std::size_t>(b) * cf * hw;
    for (int ch = 0; ch < cf; ++ch)
      for (int i = 0; i < hw; ++i) tok[static_cast<std::size_t>(i) * cf + ch] = fb[static_cast<std::size_t>(ch) * hw + i];
  }
  void add_tokens(Tensor<T>& f, int b, const T* tok) const {
    const int H = f.dim(2), W = f.dim(3), hw = H * W;
    T* fb = f.ptr() + static_cast<std::size_t>(b) * cf * hw;
    for (int ch = 0; ch < cf; ++ch)
      for (int i = 0; i < hw; ++i) fb[static_cast<std::size_t>(ch) * hw + i] += tok[static_cast<std::size_t>(i) * cf + ch];
  }
};

}  // namespace figdiff
