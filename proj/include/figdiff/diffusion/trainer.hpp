// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0
//
// Text-free training: conditions come from image embeddings refined through
// the memory bank; the bank itself evolves by EMA on the side. Per-step
// randomness is derived from (seed, step), which makes runs resumable and
// bitwise reproducible.

#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "figdiff/diffusion/model.hpp"
#include "figdiff/diffusion/schedule.hpp"
#include "figdiff/encoder/encoder.hpp"
#include "figdiff/smr/memory_bank.hpp"
#include "figdiff/synthkit/scene.hpp"

namespace figdiff {

template <typename T>
struct Adam {
  double lr = 1e-4, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  std::int64_t t = 0;
  std::vector<Tensor<T>> m, v;

  void init(const ParamRefs<T>& ps) {
    m.clear();
    v.clear();
    for (const auto* p : ps) {
      m.emplace_back(p->value.shape);
      v.emplace_back(p->value.shape);
    }
  }

  void step(const ParamRefs<T>& ps) {
    ++t;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(t));
    for (std::size_t i = 0; i < ps.size(); ++i) {
      T* w = ps[i]->value.ptr();
      const T* g = ps[i]->grad.ptr();
      T* mi = m[i].ptr();
      T* vi = v[i].ptr();
      const std::size_t n = ps[i]->value.numel();
#pragma omp parallel for schedule(static)
      for (long long j = 0; j < static_cast<long long>(n); ++j) {
        mi[j] = static_cast<T>(b1) * mi[j] + static_cast<T>(1.0 - b1) * g[j];
        vi[j] = static_cast<T>(b2) * vi[j] + static_cast<T>(1.0 - b2) * g[j] * g[j];
        const double mhat = mi[j] / bc1;
        const double vhat = vi[j] / bc2;
        w[j] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + eps));
      }
    }
  }
};

template <typename T>
struct WeightEma {
  double decay = 0.999;
  std::vector<Tensor<T>> shadow;

  void init(const ParamRefs<T>& ps) {
    shadow.clear();
    for (const auto* p : ps) shadow.push_back(p->value);
  }

  void update(const ParamRefs<T>& ps) {
    for (std::size_t i = 0; i < ps.size(); ++i) {
      T* s = shadow[i].ptr();
      const T* w = ps[i]->value.ptr();
      const std::size_t n = shadow[i].numel();
#pragma omp parallel for schedule(static)
      for (long long j = 0; j < static_cast<long long>(n); ++j)
        s[j] = static_cast<T>(decay) * s[j] + static_cast<T>(1.0 - decay) * w[j];
    }
  }

  void copy_into(const ParamRefs<T>& ps) const {
    for (std::size_t i = 0; i < ps.size(); ++i) ps[i]->value.data = shadow[i].data;
  }
};

// ---------------------------------------------------------------------------

/// Per-scene tensors that never change across steps: the [-1,1] image, the
/// label map resized to every U-Net level and the coarse part embeddings
/// F_p1. The background row is nulled: conditions describe figure parts only,
/// which keeps training (image embeddings) and sampling (text embeddings,
/// where background has no caption) symmetric.
template <typename T>
struct PreppedScene {
  Tensor<T> x0;                                  // (3,H,W)
  std::vector<std::vector<std::uint8_t>> maps;   // per level
  PartEmbeddings<T> f_p1;
};

template <typename T>
PreppedScene<T> prep_scene(const SemanticScene& scene, const PartEncoder& encoder,
                           const ModelConfig& cfg) {
  if (scene.h() != cfg.H || scene.w() != cfg.W)
    throw std::invalid_argument("prep_scene: scene canvas does not match model config");
  PreppedScene<T> out;
  out.x0 = Tensor<T>({3, cfg.H, cfg.W});
  for (int y = 0; y < cfg.H; ++y)
    for (int x = 0; x < cfg.W; ++x) {
      const float* p = scene.image.px(y, x);
      for (int ch = 0; ch < 3; ++ch)
        out.x0.at3(ch, y, x) = static_cast<T>(2.0f * p[ch] - 1.0f);
    }
  for (int l = 0; l < cfg.levels(); ++l)
    out.maps.push_back(resize_semantic_map(scene.map, cfg.H, cfg.W, cfg.height_at(l),
                                           cfg.width_at(l)));
  out.f_p1 = PartEmbeddings<T>(cfg.n_parts, cfg.c_embed, EmbSource::image);
  for (int p = 0; p < cfg.n_parts; ++p) {
    bool null_flag = true;
    std::vector<float> e;
    if (p != 0) {
      const PartImage pi = extract_part(scene, p, cfg.n_parts);
      e = encoder.encode_image(pi.image, p, null_flag);
    }
    if (p == 0 || null_flag) {
      out.f_p1.null_row[static_cast<std::size_t>(p)] = 1;
      continue;
    }
    for (int d = 0; d < cfg.c_embed; ++d)
      out.f_p1.values.at2(p, d) = static_cast<T>(e[static_cast<std::size_t>(d)]);
  }
  return out;
}

/// Batched views of a set of prepped scenes.
template <typename T>
struct BatchTensors {
  Tensor<T> x0;                       // (B,3,H,W)
  std::vector<Tensor<T>> segs;        // per level (B,n,h,w)
  Tensor<T> f_p1;                     // (B,n,c)
  std::vector<std::uint8_t> mask;     // B*n, 1 = active row
};

template <typename T>
BatchTensors<T> make_batch(const std::vector<const PreppedScene<T>*>& scenes,
                           const ModelConfig& cfg) {
  const int B = static_cast<int>(scenes.size());
  BatchTensors<T> out;
  out.x0 = Tensor<T>({B, 3, cfg.H, cfg.W});
  out.f_p1 = Tensor<T>({B, cfg.n_parts, cfg.c_embed});
  out.mask.assign(static_cast<std::size_t>(B) * cfg.n_parts, 0);
  for (int l = 0; l < cfg.levels(); ++l)
    out.segs.emplace_back(
        std::vector<int>{B, cfg.n_parts, cfg.height_at(l), cfg.width_at(l)});
  for (int b = 0; b < B; ++b) {
    const PreppedScene<T>& s = *scenes[static_cast<std::size_t>(b)];
    std::copy(s.x0.data.begin(), s.x0.data.end(),
              out.x0.ptr() + static_cast<std::size_t>(b) * s.x0.numel());
    std::copy(s.f_p1.values.data.begin(), s.f_p1.values.data.end(),
              out.f_p1.ptr() + static_cast<std::size_t>(b) * s.f_p1.values.numel());
    for (int p = 0; p < cfg.n_parts; ++p)
      out.mask[static_cast<std::size_t>(b) * cfg.n_parts + p] = s.f_p1.is_null(p) ? 0 : 1;
    for (int l = 0; l < cfg.levels(); ++l) {
      const auto& map = s.maps[static_cast<std::size_t>(l)];
      Tensor<T>& seg = out.segs[static_cast<std::size_t>(l)];
      const int h = cfg.height_at(l), w = cfg.width_at(l);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          seg.at4(b, map[static_cast<std::size_t>(y) * w + x], y, x) = T(1);
    }
  }
  return out;
}

struct StepOptions {
  bool use_smr = true;       // ablation switch: bypass read, condition on F_p1
  bool update_bank = true;   // read-then-update in sample order
  bool compute_grads = true;
  std::uint64_t noise_seed = 0;
};

/// One optimization-free training step: builds conditions, noises the batch,
/// runs the backbone and (optionally) accumulates gradients. Returns the
/// simple DDPM objective mean|eps - eps_hat|^2. The bank, when used, is read
/// then updated per sample in batch order.
template <typename T>
double training_step(DiffusionModel<T>& model, MemoryBank<T>* bank, const NoiseSchedule& sch,
                     const BatchTensors<T>& batch, const StepOptions& opts) {
  const ModelConfig& cfg = model.config();
  const int B = batch.x0.dim(0);
  const int n = cfg.n_parts, c = cfg.c_embed;

  Tensor<T> f_p2 = batch.f_p1;
  if (opts.use_smr) {
    if (!bank) throw std::invalid_argument("training_step: SMR enabled but no bank given");
    for (int b = 0; b < B; ++b) {
      PartEmbeddings<T> rows(n, c, EmbSource::image);
      std::copy(batch.f_p1.ptr() + static_cast<std::size_t>(b) * n * c,
                batch.f_p1.ptr() + static_cast<std::size_t>(b + 1) * n * c,
                rows.values.ptr());
      for (int p = 0; p < n; ++p)
        rows.null_row[static_cast<std::size_t>(p)] =
            batch.mask[static_cast<std::size_t>(b) * n + p] ? 0 : 1;
      const PartEmbeddings<T> refined = bank->read(rows);
      std::copy(refined.values.data.begin(), refined.values.data.end(),
                f_p2.ptr() + static_cast<std::size_t>(b) * n * c);
      if (opts.update_bank) bank->update(rows);
    }
  }

  Rng rng(opts.noise_seed);
  std::vector<int> t(static_cast<std::size_t>(B));
  for (auto& v : t) v = static_cast<int>(rng.uniform_int(1, sch.T));
  Tensor<T> eps(batch.x0.shape);
  rng.fill_normal(eps.ptr(), eps.numel());
  Tensor<T> x_t(batch.x0.shape);
  const std::size_t per = batch.x0.numel() / static_cast<std::size_t>(B);
  for (int b = 0; b < B; ++b) {
    const T a = static_cast<T>(std::sqrt(sch.abar(t[static_cast<std::size_t>(b)])));
    const T s = static_cast<T>(std::sqrt(1.0 - sch.abar(t[static_cast<std::size_t>(b)])));
    const T* x0p = batch.x0.ptr() + static_cast<std::size_t>(b) * per;
    const T* ep = eps.ptr() + static_cast<std::size_t>(b) * per;
    T* xtp = x_t.ptr() + static_cast<std::size_t>(b) * per;
    for (std::size_t i = 0; i < per; ++i) xtp[i] = a * x0p[i] + s * ep[i];
  }

  const Tensor<T> tprime = model.fuser().forward(f_p2, t);
  const Tensor<T> f_ps = model.saa().forward(batch.f_p1, batch.mask);
  const Tensor<T> eps_hat = model.unet().forward(x_t, tprime, batch.segs, f_ps, batch.mask);

  double loss = 0.0;
  for (int b = 0; b < B; ++b) {
    double sample_loss = 0.0;
    const T* ep = eps.ptr() + static_cast<std::size_t>(b) * per;
    const T* hp = eps_hat.ptr() + static_cast<std::size_t>(b) * per;
    for (std::size_t i = 0; i < per; ++i) {
      const double d = static_cast<double>(hp[i]) - static_cast<double>(ep[i]);
      sample_loss += d * d;
    }
    if (!std::isfinite(sample_loss))
      throw std::runtime_error("training_step: non-finite loss at batch sample " +
                               std::to_string(b));
    loss += sample_loss;
  }
  loss /= static_cast<double>(eps.numel());

  if (opts.compute_grads) {
    Tensor<T> d_eps(eps.shape);
    const T scale = static_cast<T>(2.0 / static_cast<double>(eps.numel()));
    for (std::size_t i = 0; i < eps.numel(); ++i)
      d_eps[i] = scale * (eps_hat[i] - eps[i]);
    auto [dtp, dfps] = model.unet().backward(d_eps);
    model.saa().backward(dfps);
    model.fuser().backward(dtp);
  }
  return loss;
}

/// Spec-shaped convenience overload working directly on scenes.
template <typename T>
double training_step(const std::vector<SemanticScene>& scenes, MemoryBank<T>& bank,
                     DiffusionModel<T>& model, const NoiseSchedule& sch,
                     const PartEncoder& encoder, std::uint64_t noise_seed,
                     bool compute_grads = true) {
  std::vector<PreppedScene<T>> prepped;
  prepped.reserve(scenes.size());
  for (const auto& s : scenes) prepped.push_back(prep_scene<T>(s, encoder, model.config()));
  std::vector<const PreppedScene<T>*> refs;
  for (const auto& p : prepped) refs.push_back(&p);
  StepOptions opts;
  opts.noise_seed = noise_seed;
  opts.compute_grads = compute_grads;
  return training_step(model, &bank, sch, make_batch(refs, model.config()), opts);
}

// ---------------------------------------------------------------------------

struct TrainLoopConfig {
  int steps = 0;
  int batch = 16;
  double lr = 1e-4;
  double ema_decay = 0.999;
  std::uint64_t seed = 0;
  bool use_smr = true;
  int start_step = 0;  // resume point; per-step rng derives from (seed, step)
};

/// Driver used by both the CLI and the acceptance experiments. on_step gets
/// (1-based step, loss).
template <typename T>
void run_training(DiffusionModel<T>& model, MemoryBank<T>* bank, const NoiseSchedule& sch,
                  const std::vector<PreppedScene<T>>& data, Adam<T>& opt, WeightEma<T>& ema,
                  const TrainLoopConfig& cfg,
                  const std::function<void(int, double)>& on_step = {}) {
  if (data.empty()) throw std::invalid_argument("run_training: empty dataset");
  for (int step = cfg.start_step + 1; step <= cfg.steps; ++step) {
    Rng pick(mix_seed(cfg.seed, 0xba7c4 ^ static_cast<std::uint64_t>(step)));
    std::vector<const PreppedScene<T>*> refs;
    refs.reserve(static_cast<std::size_t>(cfg.batch));
    for (int i = 0; i < cfg.batch; ++i)
      refs.push_back(&data[static_cast<std::size_t>(
          pick.uniform_int(0, static_cast<std::int64_t>(data.size()) - 1))]);
    StepOptions opts;
    opts.use_smr = cfg.use_smr;
    opts.update_bank = cfg.use_smr;
    opts.noise_seed = mix_seed(cfg.seed, 0x7015e ^ static_cast<std::uint64_t>(step));
    model.zero_grads();
    const double loss =
        training_step(model, cfg.use_smr ? bank : nullptr, sch, make_batch(refs, model.config()), opts);
    opt.step(model.params());
    ema.update(model.params());
    if (on_step) on_step(step, loss);
  }
}

}  // namespace figdiff
