// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0
//
// Partial editing. Semantic edits regenerate under an edited map while
// carrying the source appearance embeddings over; text edits run one
// denoising branch with the edited part's embedding row substituted and
// stitch against the noised source every step, so pixels outside the part
// mask end up bit-identical to the source.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "figdiff/diffusion/sampler.hpp"

namespace figdiff {

struct EditRequest {
  SemanticScene source;
  // semantic edit: a replacement map; text edit: (part_id, prompt)
  std::optional<std::vector<std::uint8_t>> new_map;
  int part_id = -1;
  std::string prompt;
  // captions for parts that appear in new_map but not in the source
  std::map<int, std::string> new_part_captions;
  std::uint64_t seed = 0;
};

/// Condition rows for a semantic edit: source appearance embeddings for every
/// part; parts new to new_map need a caption (error otherwise). Exposed
/// separately so tests can check row-for-row equality against reconstruction.
template <typename T>
PartEmbeddings<T> semantic_edit_condition(const EditRequest& req, const PartEncoder& encoder,
                                          int n_parts) {
  if (!req.new_map) throw std::invalid_argument("edit_semantic: request carries no new map");
  if (req.new_map->size() != req.source.map.size())
    throw std::invalid_argument("edit_semantic: map size mismatch");
  PartEmbeddings<T> cond = image_condition<T>(req.source, encoder, n_parts);
  for (int p = 1; p < n_parts; ++p) {
    bool in_new = false;
    for (const auto v : *req.new_map)
      if (v == p) {
        in_new = true;
        break;
      }
    if (!in_new || !cond.is_null(p)) continue;
    const auto it = req.new_part_captions.find(p);
    if (it == req.new_part_captions.end())
      throw std::invalid_argument(
          "edit_semantic: part " + std::to_string(p) +
          " is new in the edited map and absent from the source; provide a caption for it");
    const std::vector<float> e = encoder.encode_text(it->second, p);
    for (int d = 0; d < cond.c(); ++d)
      cond.values.at2(p, d) = static_cast<T>(e[static_cast<std::size_t>(d)]);
    cond.null_row[static_cast<std::size_t>(p)] = 0;
  }
  return cond;
}

template <typename T>
ImageF edit_semantic(const EditRequest& req, DiffusionModel<T>& model, const MemoryBank<T>* bank,
                     const NoiseSchedule& sch, const PartEncoder& encoder) {
  const ModelConfig& cfg = model.config();
  for (const auto v : *req.new_map)
    if (v >= cfg.n_parts)
      throw std::invalid_argument("edit_semantic: new map uses label outside the catalog");
  SampleRequest<T> sreq;
  sreq.map = *req.new_map;
  sreq.cond = semantic_edit_condition<T>(req, encoder, cfg.n_parts);
  sreq.seed = req.seed;
  return sample(model, bank, sch, {sreq}).front();
}

/// Text-driven local edit with per-step stitching. The fixed noise stream
/// for the outside region derives from the edit seed, so edits reproduce.
template <typename T>
ImageF edit_text_local(const EditRequest& req, DiffusionModel<T>& model,
                       const MemoryBank<T>* bank, const NoiseSchedule& sch,
                       const PartEncoder& encoder) {
  const ModelConfig& cfg = model.config();
  const int n = cfg.n_parts, c = cfg.c_embed;
  if (req.part_id <= 0 || req.part_id >= n)
    throw std::invalid_argument("edit_text_local: part_id out of range");
  std::vector<std::uint8_t> mask(req.source.map.size(), 0);
  std::size_t mask_count = 0;
  for (std::size_t i = 0; i < req.source.map.size(); ++i)
    if (req.source.map[i] == req.part_id) {
      mask[i] = 1;
      ++mask_count;
    }
  if (mask_count == 0)
    throw std::invalid_argument("edit_text_local: part " + std::to_string(req.part_id) +
                                " has an empty mask in the source");

  // Conditions: source appearance rows with the edited row replaced by the
  // prompt embedding.
  PartEmbeddings<T> cond = image_condition<T>(req.source, encoder, n);
  const std::vector<float> pe = encoder.encode_text(req.prompt, req.part_id);
  for (int d = 0; d < c; ++d)
    cond.values.at2(req.part_id, d) = static_cast<T>(pe[static_cast<std::size_t>(d)]);
  cond.null_row[static_cast<std::size_t>(req.part_id)] = 0;

  const PartEmbeddings<T> refined = bank ? bank->read(cond) : cond;
  std::vector<std::uint8_t> row_mask(static_cast<std::size_t>(n), 0);
  for (int p = 0; p < n; ++p) row_mask[static_cast<std::size_t>(p)] = cond.is_null(p) ? 0 : 1;

  Tensor<T> cond_b({1, n, c}), refined_b({1, n, c});
  std::copy(cond.values.data.begin(), cond.values.data.end(), cond_b.ptr());
  std::copy(refined.values.data.begin(), refined.values.data.end(), refined_b.ptr());
  const Tensor<T> f_ps = model.saa().forward(cond_b, row_mask);

  std::vector<Tensor<T>> segs;
  for (int l = 0; l < cfg.levels(); ++l) {
    segs.emplace_back(std::vector<int>{1, n, cfg.height_at(l), cfg.width_at(l)});
    const auto resized =
        resize_semantic_map(req.source.map, cfg.H, cfg.W, cfg.height_at(l), cfg.width_at(l));
    const int h = cfg.height_at(l), w = cfg.width_at(l);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        segs[static_cast<std::size_t>(l)].at4(0, resized[static_cast<std::size_t>(y) * w + x], y,
                                              x) = T(1);
  }

  Tensor<T> x0_src({1, 3, cfg.H, cfg.W});
  for (int y = 0; y < cfg.H; ++y)
    for (int x = 0; x < cfg.W; ++x) {
      const float* p = req.source.image.px(y, x);
      for (int ch = 0; ch < 3; ++ch)
        x0_src.at4(0, ch, y, x) = static_cast<T>(2.0f * p[ch] - 1.0f);
    }

  Rng rng(mix_seed(req.seed, 0xed17ULL));
  Rng stitch_rng(mix_seed(req.seed, 0x57172cULL));
  Tensor<T> x({1, 3, cfg.H, cfg.W});
  rng.fill_normal(x.ptr(), x.numel());
  Tensor<T> z(x.shape), stitch_eps(x.shape);

  for (int t = sch.T; t >= 1; --t) {
    const Tensor<T> tprime = model.fuser().forward(refined_b, {t});
    const Tensor<T> eps_hat = model.unet().forward(x, tprime, segs, f_ps, row_mask);
    if (t > 1) rng.fill_normal(z.ptr(), z.numel());
    x = p_sample_from_eps(x, t, eps_hat, sch, t > 1 ? &z : nullptr, true);

    // stitch: inside the mask keep the edited branch, outside re-noise the
    // source to level t-1 (at t-1 = 0 the source itself).
    stitch_rng.fill_normal(stitch_eps.ptr(), stitch_eps.numel());
    const Tensor<T> outside =
        t - 1 >= 1 ? q_sample(x0_src, t - 1, stitch_eps, sch) : x0_src;
    for (int ch = 0; ch < 3; ++ch)
      for (int y = 0; y < cfg.H; ++y)
        for (int xw = 0; xw < cfg.W; ++xw)
          if (!mask[static_cast<std::size_t>(y) * cfg.W + xw])
            x.at4(0, ch, y, xw) = outside.at4(0, ch, y, xw);
  }

  // Back to [0,1]. Outside-mask pixels reproduce the source exactly: the
  // forward map 2v-1 is inverted by 0.5(x+1) in float without rounding.
  ImageF out(cfg.H, cfg.W);
  for (int y = 0; y < cfg.H; ++y)
    for (int xw = 0; xw < cfg.W; ++xw)
      for (int ch = 0; ch < 3; ++ch) {
        if (mask[static_cast<std::size_t>(y) * cfg.W + xw]) {
          out.px(y, xw)[ch] =
              clamp01(0.5f * (static_cast<float>(x.at4(0, ch, y, xw)) + 1.0f));
        } else {
          out.px(y, xw)[ch] = req.source.image.px(y, xw)[ch];
        }
      }
  return out;
}

}  // namespace figdiff
