// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "figdiff/backbone/unet.hpp"
#include "figdiff/diffusion/fuse.hpp"

namespace figdiff {

/// The full set of trainable weights: denoising U-Net, the self-attentive
/// alignment block over part tokens and the global-condition fuser.
/// Non-copyable; parameter references stay valid for the model's lifetime.
template <typename T>
class DiffusionModel {
 public:
  DiffusionModel(const ModelConfig& cfg, std::uint64_t seed, FuseMode fuse = FuseMode::concat)
      : cfg_(cfg) {
    Rng rng(mix_seed(seed, 0x0de11ULL));
    unet_ = std::make_unique<UNet<T>>(cfg, rng);
    saa_.init("saa", cfg.c_embed, rng);
    fuser_.init(cfg.n_parts, cfg.c_embed, cfg.time_dim, cfg.cond_width, rng, fuse);
    unet_->collect_params(params_);
    saa_.collect(params_);
    fuser_.collect(params_);
  }

  DiffusionModel(const DiffusionModel&) = delete;
  DiffusionModel& operator=(const DiffusionModel&) = delete;

  const ModelConfig& config() const { return cfg_; }
  UNet<T>& unet() { return *unet_; }
  Saa<T>& saa() { return saa_; }
  ConditionFuser<T>& fuser() { return fuser_; }
  ParamRefs<T>& params() { return params_; }

  Param<T>* find_param(const std::string& name) {
    for (auto* p : params_)
      if (p->name == name) return p;
    return nullptr;
  }

  void zero_grads() { figdiff::zero_grads(params_); }

  /// Copies another instance's parameter values (shapes must match).
  void copy_values_from(const DiffusionModel& other) {
    for (std::size_t i = 0; i < params_.size(); ++i)
      params_[static_cast<std::size_t>(i)]->value.data =
          other.params_[static_cast<std::size_t>(i)]->value.data;
  }

 private:
  ModelConfig cfg_;
  std::unique_ptr<UNet<T>> unet_;
  Saa<T> saa_;
  ConditionFuser<T> fuser_;
  ParamRefs<T> params_;
};

// ---------------------------------------------------------------------------
// Checkpoint container: versioned header (config hash, step, EMA flag) plus
// named float32 parameter blobs. Loading refuses config-hash mismatches.
// ---------------------------------------------------------------------------

struct CheckpointHeader {
  std::uint64_t config_hash = 0;
  std::uint64_t step = 0;
  bool has_ema = false;
  bool has_opt_state = false;
};

namespace ckpt_detail {
constexpr std::uint32_t kMagic = 0x4b434446;  // "FDCK"
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_blobs(BinWriter& w, const std::string& section, const std::vector<std::string>& names,
                 const std::vector<const Tensor<T>*>& tensors) {
  w.put_string(section);
  w.put(static_cast<std::uint32_t>(tensors.size()));
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    w.put_string(names[i]);
    const Tensor<T>& t = *tensors[i];
    w.put(static_cast<std::uint32_t>(t.shape.size()));
    for (const int d : t.shape) w.put(static_cast<std::int32_t>(d));
    for (const T v : t.data) w.put(static_cast<float>(v));
  }
}

template <typename T>
void read_blobs(BinReader& r, const std::string& want_section,
                const std::vector<std::string>& names, const std::vector<Tensor<T>*>& tensors) {
  const std::string section = r.get_string();
  if (section != want_section)
    throw std::runtime_error("checkpoint: expected section " + want_section + ", found " +
                             section);
  const auto count = r.template get<std::uint32_t>();
  if (count != tensors.size())
    throw std::runtime_error("checkpoint: section " + section + " has " + std::to_string(count) +
                             " tensors, model expects " + std::to_string(tensors.size()));
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const std::string name = r.get_string();
    if (name != names[i])
      throw std::runtime_error("checkpoint: tensor \"" + name + "\" where \"" + names[i] +
                               "\" was expected");
    const auto nd = r.template get<std::uint32_t>();
    std::vector<int> shape(nd);
    for (auto& d : shape) d = r.template get<std::int32_t>();
    if (shape != tensors[i]->shape)
      throw std::runtime_error("checkpoint: shape mismatch for " + name);
    for (auto& v : tensors[i]->data) v = static_cast<T>(r.template get<float>());
  }
}
}  // namespace ckpt_detail

template <typename T>
void save_checkpoint(const std::string& path, DiffusionModel<T>& model,
                     const CheckpointHeader& hdr,
                     const std::vector<Tensor<T>>* ema = nullptr,
                     const std::vector<Tensor<T>>* adam_m = nullptr,
                     const std::vector<Tensor<T>>* adam_v = nullptr) {
  BinWriter w(path);
  w.put(ckpt_detail::kMagic);
  w.put(ckpt_detail::kVersion);
  w.put(hdr.config_hash);
  w.put(hdr.step);
  std::uint32_t flags = 0;
  if (ema) flags |= 1u;
  if (adam_m && adam_v) flags |= 2u;
  w.put(flags);

  std::vector<std::string> names;
  std::vector<const Tensor<T>*> values;
  for (auto* p : model.params()) {
    names.push_back(p->name);
    values.push_back(&p->value);
  }
  ckpt_detail::write_blobs(w, "weights", names, values);
  if (ema) {
    std::vector<const Tensor<T>*> evs;
    for (const auto& t : *ema) evs.push_back(&t);
    ckpt_detail::write_blobs(w, "ema", names, evs);
  }
  if (adam_m && adam_v) {
    std::vector<const Tensor<T>*> ms, vs;
    for (const auto& t : *adam_m) ms.push_back(&t);
    for (const auto& t : *adam_v) vs.push_back(&t);
    ckpt_detail::write_blobs(w, "adam_m", names, ms);
    ckpt_detail::write_blobs(w, "adam_v", names, vs);
  }
  w.close();
}

template <typename T>
CheckpointHeader load_checkpoint(const std::string& path, DiffusionModel<T>& model,
                                 std::vector<Tensor<T>>* ema = nullptr,
                                 std::vector<Tensor<T>>* adam_m = nullptr,
                                 std::vector<Tensor<T>>* adam_v = nullptr,
                                 bool load_ema_into_weights = false) {
  BinReader r(path);
  if (r.get<std::uint32_t>() != ckpt_detail::kMagic)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  if (r.get<std::uint32_t>() != ckpt_detail::kVersion)
    throw std::runtime_error("checkpoint: unsupported version in " + path);
  CheckpointHeader hdr;
  hdr.config_hash = r.get<std::uint64_t>();
  hdr.step = r.get<std::uint64_t>();
  const auto flags = r.get<std::uint32_t>();
  hdr.has_ema = flags & 1u;
  hdr.has_opt_state = flags & 2u;
  if (hdr.config_hash != model.config().hash())
    throw std::runtime_error("checkpoint: config hash mismatch (file " +
                             std::to_string(hdr.config_hash) + ", model " +
                             std::to_string(model.config().hash()) +
                             "); refusing to load " + path);

  std::vector<std::string> names;
  std::vector<Tensor<T>*> values;
  for (auto* p : model.params()) {
    names.push_back(p->name);
    values.push_back(&p->value);
  }
  ckpt_detail::read_blobs(r, "weights", names, values);

  auto read_section = [&](const char* section, std::vector<Tensor<T>>& dst) {
    dst.resize(values.size());
    std::vector<Tensor<T>*> refs;
    for (std::size_t i = 0; i < values.size(); ++i) {
      dst[i] = Tensor<T>(values[i]->shape);
      refs.push_back(&dst[i]);
    }
    ckpt_detail::read_blobs(r, section, names, refs);
  };

  if (hdr.has_ema) {
    std::vector<Tensor<T>> local;
    read_section("ema", local);
    if (load_ema_into_weights)
      for (std::size_t i = 0; i < values.size(); ++i) values[i]->data = local[i].data;
    if (ema) *ema = std::move(local);
  }
  if (hdr.has_opt_state) {
    std::vector<Tensor<T>> lm, lv;
    read_section("adam_m", lm);
    read_section("adam_v", lv);
    if (adam_m) *adam_m = std::move(lm);
    if (adam_v) *adam_v = std::move(lv);
  }
  return hdr;
}

}  // namespace figdiff
