// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "figdiff/core/serial.hpp"

namespace figdiff {

/// Structural hyperparameters of the denoising backbone. The attention
/// resolutions are the feature-map widths (short canvas side) that host a
/// cross-modality alignment block in the decoder.
struct ModelConfig {
  int in_channels = 3;
  int base_channels = 16;
  std::vector<int> channel_mults = {1, 2, 3};
  int num_blocks = 1;  // SRES blocks per encoder level
  std::set<int> attn_widths = {8, 16};
  int n_parts = 6;
  int c_embed = 64;
  int d_attn = 64;
  int cond_width = 128;
  int time_dim = 64;
  int groups = 8;
  int spade_hidden = 8;
  int H = 64, W = 32;
  bool no_mca = false;
  bool no_smr = false;

  int levels() const { return static_cast<int>(channel_mults.size()); }
  int channels_at(int level) const { return base_channels * channel_mults[static_cast<std::size_t>(level)]; }
  int width_at(int level) const { return W >> level; }
  int height_at(int level) const { return H >> level; }

  void validate() const {
    if (base_channels < groups) throw std::invalid_argument("model: base_channels < groups");
    if (channel_mults.empty()) throw std::invalid_argument("model: no channel mults");
    if (d_attn <= 0) throw std::invalid_argument("model: d_attn must be positive");
    if (n_parts < 2 || c_embed < 1 || cond_width < 1 || time_dim < 1)
      throw std::invalid_argument("model: bad embedding dims");
    const int down = 1 << (levels() - 1);
    if (H % down != 0 || W % down != 0)
      throw std::invalid_argument("model: canvas " + std::to_string(W) + "x" +
                                  std::to_string(H) + " not divisible by 2^" +
                                  std::to_string(levels() - 1));
    std::set<int> widths;
    for (int l = 0; l < levels(); ++l) {
      widths.insert(width_at(l));
      const int ch = channels_at(l);
      if (ch % groups != 0 || (2 * ch) % groups != 0)
        throw std::invalid_argument("model: channels at level " + std::to_string(l) +
                                    " not divisible by groups");
    }
    for (const int a : attn_widths)
      if (!widths.count(a))
        throw std::invalid_argument("model: attention width " + std::to_string(a) +
                                    " is not a feature-map width of this U-Net");
  }

  std::string describe() const {
    std::ostringstream os;
    os << "in=" << in_channels << " base=" << base_channels << " mults=";
    for (const int m : channel_mults) os << m << ',';
    os << " blocks=" << num_blocks << " attn=";
    for (const int a : attn_widths) os << a << ',';
    os << " n=" << n_parts << " c=" << c_embed << " d=" << d_attn << " cond=" << cond_width
       << " tdim=" << time_dim << " groups=" << groups << " spade_h=" << spade_hidden << " canvas="
       << W << 'x' << H << " no_mca=" << no_mca << " no_smr=" << no_smr;
    return os.str();
  }

  std::uint64_t hash() const { return fnv1a64(describe()); }
};

}  // namespace figdiff
