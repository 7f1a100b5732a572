// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0
//
// Conditional ancestral sampling. Text-driven: per-part captions are encoded,
// refined through the frozen bank and drive the same conditioning pipeline
// the model was trained on with image embeddings.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "figdiff/diffusion/model.hpp"
#include "figdiff/diffusion/schedule.hpp"
#include "figdiff/diffusion/trainer.hpp"
#include "figdiff/encoder/encoder.hpp"
#include "figdiff/smr/memory_bank.hpp"
#include "figdiff/synthkit/scene.hpp"

namespace figdiff {

/// Posterior step given a noise prediction: recovers the x0 estimate,
/// forms the DDPM posterior mean and adds sqrt(posterior_var) * z for t > 1.
/// z must have the shape of x_t (ignored at t == 1).
template <typename T>
Tensor<T> p_sample_from_eps(const Tensor<T>& x_t, int t, const Tensor<T>& eps_hat,
                            const NoiseSchedule& sch, const Tensor<T>* z,
                            bool clip_denoised = true) {
  if (t < 1 || t > sch.T) throw std::out_of_range("p_sample: t outside [1, T]");
  if (!x_t.same_shape(eps_hat)) throw std::invalid_argument("p_sample: eps_hat shape mismatch");
  const double abar_t = sch.abar(t);
  const double abar_prev = sch.abar(t - 1);
  const double beta_t = sch.beta_at(t);
  const double alpha_t = sch.alpha_at(t);
  const T c0 = static_cast<T>(std::sqrt(abar_prev) * beta_t / (1.0 - abar_t));
  const T ct = static_cast<T>(std::sqrt(alpha_t) * (1.0 - abar_prev) / (1.0 - abar_t));
  const T inv_sqrt_abar = static_cast<T>(1.0 / std::sqrt(abar_t));
  const T eps_coef = static_cast<T>(std::sqrt(1.0 - abar_t));
  const T sigma = static_cast<T>(std::sqrt(sch.posterior_var_at(t)));

  Tensor<T> out(x_t.shape);
  const std::size_t N = x_t.numel();
#pragma omp parallel for schedule(static)
  for (long long i = 0; i < static_cast<long long>(N); ++i) {
    T x0 = inv_sqrt_abar * (x_t[i] - eps_coef * eps_hat[i]);
    if (clip_denoised) x0 = std::min(T(1), std::max(T(-1), x0));
    T v = c0 * x0 + ct * x_t[i];
    if (t > 1 && z) v += sigma * (*z)[i];
    out[i] = v;
  }
  return out;
}

/// Full reverse step: model prediction + posterior sampling.
template <typename T>
Tensor<T> p_sample_step(DiffusionModel<T>& model, const Tensor<T>& x_t, int t,
                        const Tensor<T>& tprime, const std::vector<Tensor<T>>& segs,
                        const Tensor<T>& f_ps, const std::vector<std::uint8_t>& mask,
                        const NoiseSchedule& sch, Rng& rng, bool clip_denoised = true) {
  const Tensor<T> eps_hat = model.unet().forward(x_t, tprime, segs, f_ps, mask);
  Tensor<T>* zp = nullptr;
  Tensor<T> z;
  if (t > 1) {
    z = Tensor<T>(x_t.shape);
    rng.fill_normal(z.ptr(), z.numel());
    zp = &z;
  }
  return p_sample_from_eps(x_t, t, eps_hat, sch, zp, clip_denoised);
}

// ---------------------------------------------------------------------------

/// One generation request: a pose map plus per-part condition embeddings
/// (text-derived F_p3 or image-derived F_p1 for appearance transfer).
template <typename T>
struct SampleRequest {
  std::vector<std::uint8_t> map;
  PartEmbeddings<T> cond;
  std::uint64_t seed = 0;
};

/// Text conditions from per-part captions. Parts without a caption (always
/// including background) get null rows.
template <typename T>
PartEmbeddings<T> text_condition(const std::map<int, std::string>& captions,
                                 const PartEncoder& encoder, int n_parts) {
  PartEmbeddings<T> out(n_parts, encoder.dim(), EmbSource::text);
  for (int p = 0; p < n_parts; ++p) out.null_row[static_cast<std::size_t>(p)] = 1;
  for (const auto& [part, caption] : captions) {
    if (part <= 0 || part >= n_parts)
      throw std::invalid_argument("text_condition: caption for invalid part " +
                                  std::to_string(part));
    const std::vector<float> e = encoder.encode_text(caption, part);
    for (int d = 0; d < encoder.dim(); ++d)
      out.values.at2(part, d) = static_cast<T>(e[static_cast<std::size_t>(d)]);
    out.null_row[static_cast<std::size_t>(part)] = 0;
  }
  return out;
}

/// Image conditions from a source scene (appearance-transfer mode).
template <typename T>
PartEmbeddings<T> image_condition(const SemanticScene& scene, const PartEncoder& encoder,
                                  int n_parts) {
  PartEmbeddings<T> out(n_parts, encoder.dim(), EmbSource::image);
  for (int p = 0; p < n_parts; ++p) {
    bool null_flag = true;
    std::vector<float> e;
    if (p != 0) {
      const PartImage pi = extract_part(scene, p, n_parts);
      e = encoder.encode_image(pi.image, p, null_flag);
    }
    if (p == 0 || null_flag) {
      out.null_row[static_cast<std::size_t>(p)] = 1;
      continue;
    }
    for (int d = 0; d < encoder.dim(); ++d)
      out.values.at2(p, d) = static_cast<T>(e[static_cast<std::size_t>(d)]);
  }
  return out;
}

namespace sample_detail {

/// Per-request noise streams make each output depend only on its own seed,
/// not on how requests were batched together.
template <typename T>
void fill_request_noise(Tensor<T>& dst, int b, std::size_t per, Rng& rng) {
  rng.fill_normal(dst.ptr() + static_cast<std::size_t>(b) * per, per);
}

}  // namespace sample_detail

/// Ancestral sampling loop over a batch of requests. The bank must be frozen
/// (pass nullptr to bypass retrieval, e.g. for a no_smr model). Returns
/// images clipped to [0,1].
template <typename T>
std::vector<ImageF> sample(DiffusionModel<T>& model, const MemoryBank<T>* bank,
                           const NoiseSchedule& sch,
                           const std::vector<SampleRequest<T>>& requests,
                           bool clip_denoised = true) {
  const ModelConfig& cfg = model.config();
  const int B = static_cast<int>(requests.size());
  if (B == 0) return {};
  if (bank && !bank->frozen())
    throw std::invalid_argument("sample: memory bank must be frozen");

  const int n = cfg.n_parts, c = cfg.c_embed;
  Tensor<T> cond({B, n, c});       // queries for SAA (F_p3 / F_p1)
  Tensor<T> refined({B, n, c});    // memory-read conditions for the fuser
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(B) * n, 0);
  std::vector<Tensor<T>> segs;
  for (int l = 0; l < cfg.levels(); ++l)
    segs.emplace_back(std::vector<int>{B, n, cfg.height_at(l), cfg.width_at(l)});

  for (int b = 0; b < B; ++b) {
    const SampleRequest<T>& req = requests[static_cast<std::size_t>(b)];
    if (req.cond.n() != n || req.cond.c() != c)
      throw std::invalid_argument("sample: condition embedding shape mismatch");
    std::copy(req.cond.values.data.begin(), req.cond.values.data.end(),
              cond.ptr() + static_cast<std::size_t>(b) * n * c);
    const PartEmbeddings<T> f_p2 = bank ? bank->read(req.cond) : req.cond;
    std::copy(f_p2.values.data.begin(), f_p2.values.data.end(),
              refined.ptr() + static_cast<std::size_t>(b) * n * c);
    for (int p = 0; p < n; ++p)
      mask[static_cast<std::size_t>(b) * n + p] = req.cond.is_null(p) ? 0 : 1;
    for (int l = 0; l < cfg.levels(); ++l) {
      const auto resized =
          resize_semantic_map(req.map, cfg.H, cfg.W, cfg.height_at(l), cfg.width_at(l));
      const int h = cfg.height_at(l), w = cfg.width_at(l);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          segs[static_cast<std::size_t>(l)].at4(
              b, resized[static_cast<std::size_t>(y) * w + x], y, x) = T(1);
    }
  }

  const Tensor<T> f_ps = model.saa().forward(cond, mask);

  std::vector<Rng> rngs;
  rngs.reserve(static_cast<std::size_t>(B));
  for (const auto& req : requests) rngs.emplace_back(mix_seed(req.seed, 0x5a3d1eULL));

  Tensor<T> x({B, 3, cfg.H, cfg.W});
  const std::size_t per = x.numel() / static_cast<std::size_t>(B);
  for (int b = 0; b < B; ++b)
    sample_detail::fill_request_noise(x, b, per, rngs[static_cast<std::size_t>(b)]);

  Tensor<T> z(x.shape);
  for (int t = sch.T; t >= 1; --t) {
    const Tensor<T> tprime =
        model.fuser().forward(refined, std::vector<int>(static_cast<std::size_t>(B), t));
    const Tensor<T> eps_hat = model.unet().forward(x, tprime, segs, f_ps, mask);
    if (t > 1)
      for (int b = 0; b < B; ++b)
        sample_detail::fill_request_noise(z, b, per, rngs[static_cast<std::size_t>(b)]);
    x = p_sample_from_eps(x, t, eps_hat, sch, t > 1 ? &z : nullptr, clip_denoised);
  }

  std::vector<ImageF> out;
  out.reserve(static_cast<std::size_t>(B));
  for (int b = 0; b < B; ++b) {
    ImageF img(cfg.H, cfg.W);
    for (int ch = 0; ch < 3; ++ch)
      for (int y = 0; y < cfg.H; ++y)
        for (int xw = 0; xw < cfg.W; ++xw)
          img.px(y, xw)[ch] = clamp01(
              0.5f * (static_cast<float>(x.at4(b, ch, y, xw)) + 1.0f));
    out.push_back(std::move(img));
  }
  return out;
}

}  // namespace figdiff
