// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#include "figdiff/cli/run_config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

#include "figdiff/diffusion/fuse.hpp"
#include "figdiff/synthkit/dataset.hpp"

using nlohmann::json;

namespace figdiff {

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key))
      throw std::invalid_argument("config: unknown key \"" + key + "\" in " + where);
  }
}

template <typename T>
void maybe(const json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace

RunConfig RunConfig::defaults() {
  RunConfig c;
  c.catalog = PartCatalog::toy_default();
  c.model.n_parts = c.catalog.n;
  c.model.c_embed = c.encoder.c;
  c.model.H = c.catalog.H;
  c.model.W = c.catalog.W;
  return c;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c = defaults();
  reject_unknown_keys(j, {"catalog", "encoder", "bank", "model", "schedule", "train", "ablation",
                          "fuse_mode"},
                      "top level");

  if (j.contains("catalog")) {
    const json& jc = j.at("catalog");
    reject_unknown_keys(jc, {"preset", "H", "W", "full"}, "catalog");
    if (jc.contains("full")) {
      c.catalog = catalog_from_json(jc.at("full"));
    } else {
      const std::string preset = jc.value("preset", "toy6");
      if (preset == "toy6")
        c.catalog = PartCatalog::toy_default();
      else if (preset == "parts10")
        c.catalog = PartCatalog::parts10();
      else
        throw std::invalid_argument("config: unknown catalog preset \"" + preset + "\"");
      maybe(jc, "H", c.catalog.H);
      maybe(jc, "W", c.catalog.W);
    }
  }
  if (j.contains("encoder")) {
    const json& je = j.at("encoder");
    reject_unknown_keys(je, {"kind", "c"}, "encoder");
    maybe(je, "kind", c.encoder.kind);
    maybe(je, "c", c.encoder.c);
  }
  if (j.contains("bank")) {
    const json& jb = j.at("bank");
    reject_unknown_keys(jb, {"m", "beta"}, "bank");
    maybe(jb, "m", c.bank_m);
    maybe(jb, "beta", c.bank_beta);
  }
  if (j.contains("model")) {
    const json& jm = j.at("model");
    reject_unknown_keys(jm,
                        {"base_channels", "channel_mults", "num_blocks", "attn_widths", "d_attn",
                         "cond_width", "time_dim", "groups", "spade_hidden"},
                        "model");
    maybe(jm, "base_channels", c.model.base_channels);
    maybe(jm, "channel_mults", c.model.channel_mults);
    maybe(jm, "num_blocks", c.model.num_blocks);
    if (jm.contains("attn_widths")) {
      c.model.attn_widths.clear();
      for (const auto& a : jm.at("attn_widths")) c.model.attn_widths.insert(a.get<int>());
    }
    maybe(jm, "d_attn", c.model.d_attn);
    maybe(jm, "cond_width", c.model.cond_width);
    maybe(jm, "time_dim", c.model.time_dim);
    maybe(jm, "groups", c.model.groups);
    maybe(jm, "spade_hidden", c.model.spade_hidden);
  }
  if (j.contains("schedule")) {
    const json& js = j.at("schedule");
    reject_unknown_keys(js, {"T", "beta_start", "beta_end"}, "schedule");
    maybe(js, "T", c.T);
    maybe(js, "beta_start", c.beta_start);
    maybe(js, "beta_end", c.beta_end);
  }
  if (j.contains("train")) {
    const json& jt = j.at("train");
    reject_unknown_keys(jt, {"steps", "batch", "lr", "ema_decay", "ckpt_every", "log_every",
                             "seed"},
                        "train");
    maybe(jt, "steps", c.steps);
    maybe(jt, "batch", c.batch);
    maybe(jt, "lr", c.lr);
    maybe(jt, "ema_decay", c.ema_decay);
    maybe(jt, "ckpt_every", c.ckpt_every);
    maybe(jt, "log_every", c.log_every);
    maybe(jt, "seed", c.seed);
  }
  if (j.contains("ablation")) {
    const json& ja = j.at("ablation");
    reject_unknown_keys(ja, {"no_smr", "no_mca"}, "ablation");
    maybe(ja, "no_smr", c.model.no_smr);
    maybe(ja, "no_mca", c.model.no_mca);
  }
  maybe(j, "fuse_mode", c.fuse_mode);

  c.model.n_parts = c.catalog.n;
  c.model.c_embed = c.encoder.c;
  c.model.H = c.catalog.H;
  c.model.W = c.catalog.W;
  c.validate();
  return c;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config: JSON parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

json RunConfig::to_json() const {
  return json{
      {"catalog", {{"full", catalog_to_json(catalog)}}},
      {"encoder", {{"kind", encoder.kind}, {"c", encoder.c}}},
      {"bank", {{"m", bank_m}, {"beta", bank_beta}}},
      {"model",
       {{"base_channels", model.base_channels},
        {"channel_mults", model.channel_mults},
        {"num_blocks", model.num_blocks},
        {"attn_widths", std::vector<int>(model.attn_widths.begin(), model.attn_widths.end())},
        {"d_attn", model.d_attn},
        {"cond_width", model.cond_width},
        {"time_dim", model.time_dim},
        {"groups", model.groups},
        {"spade_hidden", model.spade_hidden}}},
      {"schedule", {{"T", T}, {"beta_start", beta_start}, {"beta_end", beta_end}}},
      {"train",
       {{"steps", steps},
        {"batch", batch},
        {"lr", lr},
        {"ema_decay", ema_decay},
        {"ckpt_every", ckpt_every},
        {"log_every", log_every},
        {"seed", seed}}},
      {"ablation", {{"no_smr", model.no_smr}, {"no_mca", model.no_mca}}},
      {"fuse_mode", fuse_mode}};
}

void RunConfig::validate() const {
  catalog.validate();
  encoder.validate();
  if (model.n_parts != catalog.n)
    throw std::invalid_argument("config: model n_parts must equal catalog n");
  if (model.c_embed != encoder.c)
    throw std::invalid_argument("config: embedding dim c must be shared by encoder and model");
  if (model.H != catalog.H || model.W != catalog.W)
    throw std::invalid_argument("config: model canvas must match catalog canvas");
  model.validate();
  if (bank_m < 1) throw std::invalid_argument("config: bank m must be >= 1");
  if (bank_beta < 0.0 || bank_beta > 1.0)
    throw std::invalid_argument("config: bank beta outside [0,1]");
  if (T < 1) throw std::invalid_argument("config: schedule T must be >= 1");
  if (!(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0))
    throw std::invalid_argument("config: need 0 < beta_start <= beta_end < 1");
  if (steps < 0 || batch < 1) throw std::invalid_argument("config: bad train steps/batch");
  if (lr <= 0.0) throw std::invalid_argument("config: lr must be positive");
  if (ema_decay < 0.0 || ema_decay >= 1.0)
    throw std::invalid_argument("config: ema_decay outside [0,1)");
  fuse_mode_from_string(fuse_mode);
}

}  // namespace figdiff
