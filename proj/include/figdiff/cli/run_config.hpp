// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "figdiff/backbone/config.hpp"
#include "figdiff/encoder/encoder.hpp"
#include "figdiff/synthkit/catalog.hpp"

namespace figdiff {

/// Fully resolved run configuration. Cross-field consistency (shared c and
/// n, canvas sizes, attention placement) is validated up front; every run
/// directory gets a snapshot of the resolved form.
struct RunConfig {
  PartCatalog catalog;
  EncoderConfig encoder;

  int bank_m = 64;
  double bank_beta = 0.995;

  ModelConfig model;

  int T = 200;
  double beta_start = 5e-4;
  double beta_end = 0.1;

  int steps = 20000;
  int batch = 16;
  double lr = 1e-4;
  double ema_decay = 0.999;
  int ckpt_every = 2000;
  int log_every = 10;
  std::uint64_t seed = 0;

  std::string fuse_mode = "concat";

  static RunConfig defaults();
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig from_file(const std::string& path);
  nlohmann::json to_json() const;
  void validate() const;
};

}  // namespace figdiff
