// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0
//
// Conditional denoising U-Net. Encoder/decoder of SPADE ResBlocks with
// stride-2 downsampling and nearest-neighbor upsampling; cross-modality
// attention blocks sit in the decoder at the configured widths, coarse to
// fine. Predicts the noise added to x_t.

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "figdiff/backbone/blocks.hpp"
#include "figdiff/backbone/config.hpp"

namespace figdiff {

template <typename T>
class UNet {
 public:
  explicit UNet(const ModelConfig& cfg, Rng& rng) : cfg_(cfg) {
    cfg.validate();
    const int L = cfg.levels();
    stem_.init("stem", cfg.in_channels, cfg.channels_at(0), 3, 1, 1, rng);
    enc_.resize(static_cast<std::size_t>(L));
    for (int l = 0; l < L; ++l) {
      const int ch = cfg.channels_at(l);
      enc_[static_cast<std::size_t>(l)].resize(static_cast<std::size_t>(cfg.num_blocks));
      for (int bidx = 0; bidx < cfg.num_blocks; ++bidx)
        enc_[static_cast<std::size_t>(l)][static_cast<std::size_t>(bidx)].init(
            "enc" + std::to_string(l) + ".b" + std::to_string(bidx), ch, ch, cfg.cond_width,
            cfg.n_parts, cfg.spade_hidden, cfg.groups, rng);
    }
    down_.resize(static_cast<std::size_t>(L - 1));
    for (int l = 0; l + 1 < L; ++l)
      down_[static_cast<std::size_t>(l)].init("down" + std::to_string(l), cfg.channels_at(l),
                                              cfg.channels_at(l + 1), 3, 2, 1, rng);
    mid0_.init("mid.b0", cfg.channels_at(L - 1), cfg.channels_at(L - 1), cfg.cond_width,
               cfg.n_parts, cfg.spade_hidden, cfg.groups, rng);
    mid1_.init("mid.b1", cfg.channels_at(L - 1), cfg.channels_at(L - 1), cfg.cond_width,
               cfg.n_parts, cfg.spade_hidden, cfg.groups, rng);
    dec_.resize(static_cast<std::size_t>(L));
    caa_.resize(static_cast<std::size_t>(L));
    up_.resize(static_cast<std::size_t>(L));
    for (int l = L - 1; l >= 0; --l) {
      const int ch = cfg.channels_at(l);
      dec_[static_cast<std::size_t>(l)].init("dec" + std::to_string(l), 2 * ch, ch,
                                             cfg.cond_width, cfg.n_parts, cfg.spade_hidden,
                                             cfg.groups, rng);
      if (!cfg.no_mca && cfg.attn_widths.count(cfg.width_at(l))) {
        caa_[static_cast<std::size_t>(l)] = std::make_unique<Caa<T>>();
        caa_[static_cast<std::size_t>(l)]->init("dec" + std::to_string(l) + ".caa", ch,
                                                cfg.c_embed, cfg.d_attn, rng);
      }
      if (l > 0)
        up_[static_cast<std::size_t>(l)].init("up" + std::to_string(l), ch,
                                              cfg.channels_at(l - 1), 3, 1, 1, rng);
    }
    head_norm_.init(cfg.channels_at(0), cfg.groups);
    head_conv_.init("head", cfg.channels_at(0), cfg.in_channels, 3, 1, 1, rng,
                    /*zero_init=*/true);
  }

  const ModelConfig& config() const { return cfg_; }

  void collect_params(ParamRefs<T>& out) {
    stem_.collect(out);
    for (auto& level : enc_)
      for (auto& blk : level) blk.collect(out);
    for (auto& d : down_) d.collect(out);
    mid0_.collect(out);
    mid1_.collect(out);
    const int L = cfg_.levels();
    for (int l = L - 1; l >= 0; --l) {
      dec_[static_cast<std::size_t>(l)].collect(out);
      if (caa_[static_cast<std::size_t>(l)]) caa_[static_cast<std::size_t>(l)]->collect(out);
      if (l > 0) up_[static_cast<std::size_t>(l)].collect(out);
    }
    head_conv_.collect(out);
  }

  /// x_t: (B,3,H,W); tprime: (B,cond); segs: per-level one-hot (B,n,h,w);
  /// fps: (B,n,c) with mask (B*n). Returns eps_hat with the shape of x_t.
  Tensor<T> forward(const Tensor<T>& x_t, const Tensor<T>& tprime,
                    const std::vector<Tensor<T>>& segs, const Tensor<T>& fps,
                    const std::vector<std::uint8_t>& fps_mask) {
    const int L = cfg_.levels();
    if (static_cast<int>(segs.size()) != L)
      throw std::invalid_argument("unet: seg pyramid must have one level per resolution");
    if (!x_t.all_finite()) throw std::invalid_argument("unet: non-finite values in input");

    Tensor<T> h = stem_.forward(x_t);
    skips_.assign(static_cast<std::size_t>(L), Tensor<T>());
    for (int l = 0; l < L; ++l) {
      for (auto& blk : enc_[static_cast<std::size_t>(l)])
        h = blk.forward(h, segs[static_cast<std::size_t>(l)], tprime);
      skips_[static_cast<std::size_t>(l)] = h;
      if (l + 1 < L) h = down_[static_cast<std::size_t>(l)].forward(h);
    }
    h = mid0_.forward(h, segs[static_cast<std::size_t>(L - 1)], tprime);
    h = mid1_.forward(h, segs[static_cast<std::size_t>(L - 1)], tprime);
    for (int l = L - 1; l >= 0; --l) {
      h = concat_channels(h, skips_[static_cast<std::size_t>(l)]);
      h = dec_[static_cast<std::size_t>(l)].forward(h, segs[static_cast<std::size_t>(l)],
                                                    tprime);
      if (caa_[static_cast<std::size_t>(l)])
        h = caa_[static_cast<std::size_t>(l)]->forward(h, fps, fps_mask);
      if (l > 0) {
        Tensor<T> up({h.dim(0), h.dim(1), 2 * h.dim(2), 2 * h.dim(3)});
        kernels::upsample_nearest2x_forward(h.ptr(), up.ptr(), h.dim(0), h.dim(1), h.dim(2),
                                            h.dim(3));
        h = up_[static_cast<std::size_t>(l)].forward(up);
      }
    }
    h = head_act_.forward(head_norm_.forward(h));
    return head_conv_.forward(h);
  }

  /// Accumulates parameter grads; returns (d_tprime, d_fps).
  std::pair<Tensor<T>, Tensor<T>> backward(const Tensor<T>& d_eps) {
    const int L = cfg_.levels();
    const int B = d_eps.dim(0);
    Tensor<T> dtp({B, cfg_.cond_width});
    Tensor<T> dfps({B, cfg_.n_parts, cfg_.c_embed});
    std::vector<Tensor<T>> dskip(static_cast<std::size_t>(L));

    // head, then the decoder in reverse execution order (fine to coarse).
    Tensor<T> dh = head_norm_.backward(head_act_.backward(head_conv_.backward(d_eps)));
    for (int l = 0; l < L; ++l) {
      if (l > 0) {
        const Tensor<T> dup = up_[static_cast<std::size_t>(l)].backward(dh);
        Tensor<T> dcoarse({dup.dim(0), dup.dim(1), dup.dim(2) / 2, dup.dim(3) / 2});
        kernels::upsample_nearest2x_backward(dup.ptr(), dcoarse.ptr(), dup.dim(0), dup.dim(1),
                                             dcoarse.dim(2), dcoarse.dim(3));
        dh = dcoarse;
      }
      if (caa_[static_cast<std::size_t>(l)])
        dh = caa_[static_cast<std::size_t>(l)]->backward(dh, dfps);
      const Tensor<T> dcat = dec_[static_cast<std::size_t>(l)].backward(dh, dtp);
      split_channels(dcat, dh, dskip[static_cast<std::size_t>(l)],
                     skips_[static_cast<std::size_t>(l)].dim(1));
    }

    // middle, then the encoder with skip gradients merged back in.
    dh = mid0_.backward(mid1_.backward(dh, dtp), dtp);
    for (int l = L - 1; l >= 0; --l) {
      kernels::axpy(T(1), dskip[static_cast<std::size_t>(l)].ptr(), dh.ptr(), dh.numel());
      for (int bidx = cfg_.num_blocks - 1; bidx >= 0; --bidx)
        dh = enc_[static_cast<std::size_t>(l)][static_cast<std::size_t>(bidx)].backward(dh, dtp);
      if (l > 0) dh = down_[static_cast<std::size_t>(l - 1)].backward(dh);
    }
    stem_.backward(dh, /*want_dx=*/false);
    return {std::move(dtp), std::move(dfps)};
  }

 private:
  static Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
    const int B = a.dim(0), Ca = a.dim(1), Cb = b.dim(1), H = a.dim(2), W = a.dim(3);
    Tensor<T> out({B, Ca + Cb, H, W});
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    for (int bi = 0; bi < B; ++bi) {
      std::copy(a.ptr() + static_cast<std::size_t>(bi) * Ca * plane,
                a.ptr() + static_cast<std::size_t>(bi + 1) * Ca * plane,
                out.ptr() + static_cast<std::size_t>(bi) * (Ca + Cb) * plane);
      std::copy(b.ptr() + static_cast<std::size_t>(bi) * Cb * plane,
                b.ptr() + static_cast<std::size_t>(bi + 1) * Cb * plane,
                out.ptr() + (static_cast<std::size_t>(bi) * (Ca + Cb) + Ca) * plane);
    }
    return out;
  }

  static void split_channels(const Tensor<T>& dcat, Tensor<T>& da, Tensor<T>& db, int Cb) {
    const int B = dcat.dim(0), C = dcat.dim(1), H = dcat.dim(2), W = dcat.dim(3);
    const int Ca = C - Cb;
    Tensor<T> a({B, Ca, H, W}), b({B, Cb, H, W});
    const std::size_t plane = static_cast<std::size_t>(H) * W;
    for (int bi = 0; bi < B; ++bi) {
      std::copy(dcat.ptr() + static_cast<std::size_t>(bi) * C * plane,
                dcat.ptr() + (static_cast<std::size_t>(bi) * C + Ca) * plane,
                a.ptr() + static_cast<std::size_t>(bi) * Ca * plane);
      std::copy(dcat.ptr() + (static_cast<std::size_t>(bi) * C + Ca) * plane,
                dcat.ptr() + static_cast<std::size_t>(bi + 1) * C * plane,
                b.ptr() + static_cast<std::size_t>(bi) * Cb * plane);
    }
    da = std::move(a);
    db = std::move(b);
  }

  ModelConfig cfg_;
  Conv2d<T> stem_;
  std::vector<std::vector<Sres<T>>> enc_;
  std::vector<Conv2d<T>> down_;
  Sres<T> mid0_, mid1_;
  std::vector<Sres<T>> dec_;
  std::vector<std::unique_ptr<Caa<T>>> caa_;
  std::vector<Conv2d<T>> up_;
  GroupNorm<T> head_norm_;
  Relu<T> head_act_;
  Conv2d<T> head_conv_;

  std::vector<Tensor<T>> skips_;
};

}  // namespace figdiff
