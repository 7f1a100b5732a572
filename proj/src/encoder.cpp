// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#include "figdiff/encoder/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "figdiff/core/rng.hpp"
#include "figdiff/synthkit/generate.hpp"

namespace figdiff {

namespace {

// Feature scaling. Color coordinates dominate; area and identity are mild
// tie-breakers. The modality offset (+ for images, - for text) models the
// image/text gap of a real joint encoder and is what the memory retrieval
// path gets to smooth out.
constexpr double kWColor = 1.0;
constexpr double kWHue = 0.8;
constexpr double kWEnergy = 3.0;
constexpr double kWArea = 0.3;
constexpr double kWPartId = 0.6;
constexpr double kWModality = 0.25;
constexpr std::uint64_t kProjSeed = 0x9a7e11c0ffeeULL;
constexpr int kProbeScenes = 16;

double mean_channel(const Rgb& c) { return (c.r + c.g + c.b) / 3.0; }

}  // namespace

void EncoderConfig::validate() const {
  if (c < 8) throw std::invalid_argument("encoder config: c must be >= 8");
  if (kind.empty()) throw std::invalid_argument("encoder config: empty kind");
}

double cosine(const double* a, const double* b, int n) {
  double ab = 0, aa = 0, bb = 0;
  for (int i = 0; i < n; ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0.0 || bb == 0.0) throw std::invalid_argument("cosine: zero vector");
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

double cosine(const std::vector<float>& a, const std::vector<float>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += static_cast<double>(a[i]) * b[i];
    aa += static_cast<double>(a[i]) * a[i];
    bb += static_cast<double>(b[i]) * b[i];
  }
  if (aa == 0.0 || bb == 0.0) throw std::invalid_argument("cosine: zero vector");
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

ReferenceEncoder::ReferenceEncoder(const PartCatalog& catalog, const EncoderConfig& cfg)
    : cat_(catalog), c_(cfg.c) {
  cfg.validate();
  cat_.validate();
  k_ = 8 + cat_.n + 1;

  // Fixed random-but-seeded projection. With c >= k the columns are
  // orthonormalized, so cosines in feature space are preserved exactly.
  Rng rng(mix_seed(kProjSeed, static_cast<std::uint64_t>(c_) * 1000 + k_));
  proj_.assign(static_cast<std::size_t>(c_) * k_, 0.0);
  for (auto& v : proj_) v = rng.normal();
  if (c_ >= k_) {
    for (int j = 0; j < k_; ++j) {
      for (int p = 0; p < j; ++p) {
        double dot = 0;
        for (int i = 0; i < c_; ++i) dot += proj_[i * k_ + j] * proj_[i * k_ + p];
        for (int i = 0; i < c_; ++i) proj_[i * k_ + j] -= dot * proj_[i * k_ + p];
      }
      double nrm = 0;
      for (int i = 0; i < c_; ++i) nrm += proj_[i * k_ + j] * proj_[i * k_ + j];
      nrm = std::sqrt(nrm);
      if (nrm < 1e-12) throw std::runtime_error("reference encoder: degenerate projection");
      for (int i = 0; i < c_; ++i) proj_[i * k_ + j] /= nrm;
    }
  } else {
    for (auto& v : proj_) v /= std::sqrt(static_cast<double>(k_));
  }

  // Nominal per-part areas for the text side, measured from probe scenes.
  nominal_area_.assign(static_cast<std::size_t>(cat_.n), 0.0);
  std::vector<std::size_t> seen(static_cast<std::size_t>(cat_.n), 0);
  for (int s = 0; s < kProbeScenes; ++s) {
    const SceneDetail d = generate_scene_detail(cat_, 0xa5ea0000ULL + s);
    std::vector<std::size_t> count(static_cast<std::size_t>(cat_.n), 0);
    for (const auto v : d.scene.map) ++count[v];
    for (int p = 0; p < cat_.n; ++p)
      if (count[static_cast<std::size_t>(p)]) {
        nominal_area_[static_cast<std::size_t>(p)] +=
            static_cast<double>(count[static_cast<std::size_t>(p)]) / d.scene.map.size();
        ++seen[static_cast<std::size_t>(p)];
      }
  }
  for (int p = 0; p < cat_.n; ++p)
    if (seen[static_cast<std::size_t>(p)])
      nominal_area_[static_cast<std::size_t>(p)] /= static_cast<double>(seen[static_cast<std::size_t>(p)]);
}

std::vector<float> ReferenceEncoder::project(const std::vector<double>& f) const {
  std::vector<double> e(static_cast<std::size_t>(c_), 0.0);
  for (int i = 0; i < c_; ++i) {
    double acc = 0;
    for (int j = 0; j < k_; ++j) acc += proj_[static_cast<std::size_t>(i) * k_ + j] * f[j];
    e[static_cast<std::size_t>(i)] = acc;
  }
  double nrm = 0;
  for (const double v : e) nrm += v * v;
  nrm = std::sqrt(nrm);
  if (nrm < 1e-12) throw std::runtime_error("reference encoder: zero feature vector");
  std::vector<float> out(static_cast<std::size_t>(c_));
  for (int i = 0; i < c_; ++i) out[static_cast<std::size_t>(i)] = static_cast<float>(e[i] / nrm);
  return out;
}

std::vector<float> ReferenceEncoder::encode_image(const ImageF& img, int part_id,
                                                  bool& null_flag) const {
  if (part_id < 0 || part_id >= cat_.n)
    throw std::invalid_argument("encode_image: part_id out of range");
  const int h = img.h, w = img.w;

  // The mask is implied by the extract_part contract: zero outside the part.
  auto in_mask = [&](int y, int x) {
    const float* p = img.px(y, x);
    return p[0] > 1e-6f || p[1] > 1e-6f || p[2] > 1e-6f;
  };

  double mean[3] = {0, 0, 0};
  double hue_bin[2] = {0, 0};
  std::size_t count = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!in_mask(y, x)) continue;
      const float* p = img.px(y, x);
      mean[0] += p[0];
      mean[1] += p[1];
      mean[2] += p[2];
      float hue, sat;
      rgb_to_hue_sat(p[0], p[1], p[2], hue, sat);
      hue_bin[hue < 180.f ? 0 : 1] += sat;
      ++count;
    }
  if (count == 0) {
    null_flag = true;
    return std::vector<float>(static_cast<std::size_t>(c_), 0.f);
  }
  null_flag = false;
  for (double& m : mean) m /= static_cast<double>(count);
  for (double& hb : hue_bin) hb /= static_cast<double>(count);

  double ev = 0, eh = 0;
  std::size_t nv = 0, nh = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!in_mask(y, x)) continue;
      const float* p = img.px(y, x);
      if (y + 1 < h && in_mask(y + 1, x)) {
        const float* q = img.px(y + 1, x);
        ev += (std::fabs(p[0] - q[0]) + std::fabs(p[1] - q[1]) + std::fabs(p[2] - q[2])) / 3.0;
        ++nv;
      }
      if (x + 1 < w && in_mask(y, x + 1)) {
        const float* q = img.px(y, x + 1);
        eh += (std::fabs(p[0] - q[0]) + std::fabs(p[1] - q[1]) + std::fabs(p[2] - q[2])) / 3.0;
        ++nh;
      }
    }
  if (nv) ev /= static_cast<double>(nv);
  if (nh) eh /= static_cast<double>(nh);

  std::vector<double> f(static_cast<std::size_t>(k_), 0.0);
  f[0] = kWColor * mean[0];
  f[1] = kWColor * mean[1];
  f[2] = kWColor * mean[2];
  f[3] = kWHue * hue_bin[0];
  f[4] = kWHue * hue_bin[1];
  f[5] = kWEnergy * ev;
  f[6] = kWEnergy * eh;
  f[7] = kWArea * (static_cast<double>(count) / (static_cast<double>(h) * w));
  f[static_cast<std::size_t>(8 + part_id)] = kWPartId;
  f[static_cast<std::size_t>(8 + cat_.n)] = kWModality;
  return project(f);
}

std::vector<double> ReferenceEncoder::text_features(int color, int pattern, int part_id) const {
  const Rgb c = cat_.color_rgb[static_cast<std::size_t>(color)];
  const bool patterned = pattern != 0;
  // Expected render statistics for this (color, pattern): patterned parts mix
  // the primary and the darkened secondary half/half.
  const double mix = patterned ? 0.5 * (1.0 + 0.55) : 1.0;
  float hue, sat;
  rgb_to_hue_sat(c.r, c.g, c.b, hue, sat);
  // Half the in-mask neighbor pairs cross a 2px pattern cell boundary.
  const double energy = 0.5 * 0.45 * mean_channel(c);

  std::vector<double> f(static_cast<std::size_t>(k_), 0.0);
  f[0] = kWColor * mix * c.r;
  f[1] = kWColor * mix * c.g;
  f[2] = kWColor * mix * c.b;
  f[3] = kWHue * (hue < 180.f ? sat : 0.0);
  f[4] = kWHue * (hue >= 180.f ? sat : 0.0);
  f[5] = kWEnergy * (pattern >= 1 ? energy : 0.0);
  f[6] = kWEnergy * (pattern == 2 ? energy : 0.0);
  f[7] = kWArea * nominal_area_[static_cast<std::size_t>(part_id)];
  f[static_cast<std::size_t>(8 + part_id)] = kWPartId;
  f[static_cast<std::size_t>(8 + cat_.n)] = -kWModality;
  return f;
}

std::vector<float> ReferenceEncoder::encode_text(const std::string& caption, int part_id) const {
  if (part_id < 0 || part_id >= cat_.n)
    throw std::invalid_argument("encode_text: part_id out of range");
  static const std::set<std::string> kTemplateWords = {"a", "figure", "wearing", "with"};

  std::istringstream is(caption);
  std::string tok;
  int color = -1, pattern = -1;
  while (is >> tok) {
    std::transform(tok.begin(), tok.end(), tok.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (kTemplateWords.count(tok)) continue;
    if (cat_.index_of(tok) >= 0) continue;
    const int ci = cat_.color_index(tok);
    if (ci >= 0) {
      color = ci;
      continue;
    }
    const int pi = cat_.pattern_index(tok);
    if (pi >= 0) {
      pattern = pi;
      continue;
    }
    std::ostringstream os;
    os << "encode_text: unknown word \"" << tok << "\"; colors:";
    for (const auto& cname : cat_.color_names) os << ' ' << cname;
    os << "; patterns:";
    for (const auto& p : cat_.pattern_names) os << ' ' << p;
    throw std::invalid_argument(os.str());
  }
  if (color < 0)
    throw std::invalid_argument("encode_text: caption names no color word: " + caption);
  if (pattern < 0) pattern = 0;
  return project(text_features(color, pattern, part_id));
}

namespace {
std::map<std::string, EncoderFactory>& registry() {
  static std::map<std::string, EncoderFactory> r;
  return r;
}
}  // namespace

void register_encoder(const std::string& name, EncoderFactory factory) {
  registry()[name] = std::move(factory);
}

std::unique_ptr<PartEncoder> make_encoder(const PartCatalog& catalog, const EncoderConfig& cfg) {
  cfg.validate();
  if (cfg.kind == "reference") return std::make_unique<ReferenceEncoder>(catalog, cfg);
  const auto it = registry().find(cfg.kind);
  if (it == registry().end())
    throw std::invalid_argument("unknown encoder kind: " + cfg.kind);
  auto enc = it->second(catalog, cfg);
  if (enc->dim() != cfg.c)
    throw std::invalid_argument("encoder \"" + cfg.kind + "\" declares c=" +
                                std::to_string(enc->dim()) + ", config says " +
                                std::to_string(cfg.c));
  return enc;
}

}  // namespace figdiff
