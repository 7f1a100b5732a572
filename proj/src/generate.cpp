// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#include "figdiff/synthkit/generate.hpp"

#include <cmath>
#include <stdexcept>

#include "figdiff/core/rng.hpp"

namespace figdiff {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Canvas {
  int H, W;
  std::vector<std::uint8_t>* map;

  void set(int y, int x, std::uint8_t label) {
    if (y >= 0 && y < H && x >= 0 && x < W)
      (*map)[static_cast<std::size_t>(y) * W + x] = label;
  }

  void fill_rect(int y0, int x0, int y1, int x1, std::uint8_t label) {
    for (int y = std::max(0, y0); y <= std::min(H - 1, y1); ++y)
      for (int x = std::max(0, x0); x <= std::min(W - 1, x1); ++x)
        (*map)[static_cast<std::size_t>(y) * W + x] = label;
  }

  void fill_ellipse(int cy, int cx, int ry, int rx, std::uint8_t label) {
    for (int y = cy - ry; y <= cy + ry; ++y)
      for (int x = cx - rx; x <= cx + rx; ++x) {
        const double dy = (y - cy) / (ry + 0.5);
        const double dx = (x - cx) / (rx + 0.5);
        if (dy * dy + dx * dx <= 1.0) set(y, x, label);
      }
  }

  void thick_line(double y0, double x0, double y1, double x1, int thick, std::uint8_t label) {
    const double len = std::hypot(y1 - y0, x1 - x0);
    const int steps = std::max(2, static_cast<int>(len * 2) + 1);
    const int r0 = thick / 2, r1 = thick - 1 - r0;
    for (int s = 0; s <= steps; ++s) {
      const double t = static_cast<double>(s) / steps;
      const int y = static_cast<int>(std::lround(y0 + t * (y1 - y0)));
      const int x = static_cast<int>(std::lround(x0 + t * (x1 - x0)));
      for (int dy = -r0; dy <= r1; ++dy)
        for (int dx = -r0; dx <= r1; ++dx) set(y + dy, x + dx, label);
    }
  }
};

[[noreturn]] void no_fit(const std::string& part, int H, int W) {
  throw std::runtime_error("generate_scene: part \"" + part + "\" does not fit on canvas " +
                           std::to_string(W) + "x" + std::to_string(H));
}

bool is_clothing(const std::string& role) {
  return role == "top" || role == "outer" || role == "skirt" || role == "dress" ||
         role == "pants";
}

}  // namespace

std::string make_caption(const PartCatalog& cat, int part_id, const PartAttr& attr) {
  const std::string& role = cat.part_names[static_cast<std::size_t>(part_id)];
  const std::string c = cat.color_names[static_cast<std::size_t>(attr.color)];
  const std::string p = cat.pattern_names[static_cast<std::size_t>(attr.pattern)];
  if (role == "top" || role == "outer" || role == "skirt" || role == "dress")
    return "a figure wearing a " + c + " " + p + " " + role;
  if (role == "pants") return "a figure wearing " + c + " " + p + " pants";
  if (role == "shoes") return "a figure wearing " + c + " shoes";
  if (role == "hair") return "a figure with " + c + " hair";
  if (role == "face") return "a figure with a " + c + " face";
  if (role == "skin") return "a figure with " + c + " skin";
  return "a figure with a " + c + " " + role;
}

SceneDetail generate_scene_detail(const PartCatalog& cat, std::uint64_t seed) {
  cat.validate();
  const int H = cat.H, W = cat.W;
  Rng rng(mix_seed(seed, 0xf16f16ULL));

  // Draw every random quantity up front in a fixed order so the stream does
  // not depend on which optional parts the catalog carries.
  const float bg_shade = static_cast<float>(rng.uniform(0.15, 0.30));
  const int cx = W / 2 + static_cast<int>(rng.uniform_int(-W / 16, W / 16));
  const int head_rx = std::max(2, static_cast<int>(std::lround(W * 0.11 + rng.uniform(0, W * 0.04))));
  const int head_ry = std::max(2, static_cast<int>(std::lround(H * 0.07 + rng.uniform(0, H * 0.025))));
  const int hair_extra = 1 + static_cast<int>(rng.uniform_int(0, 1));
  const int head_cy = head_ry + hair_extra + 1 +
                      static_cast<int>(rng.uniform_int(0, std::max(1, H / 32)));
  int torso_hw = static_cast<int>(std::lround(W * 0.16 + rng.uniform(0, W * 0.08)));
  const int torso_len = static_cast<int>(std::lround(H * 0.22 + rng.uniform(0, H * 0.06)));
  const int arm_len = static_cast<int>(std::lround(H * 0.16 + rng.uniform(0, H * 0.04)));
  double arm_angle = rng.uniform(8.0, 40.0) * kPi / 180.0;
  const int arm_thick = std::max(2, static_cast<int>(std::lround(W * 0.06)));
  int leg_len = static_cast<int>(std::lround(H * 0.22 + rng.uniform(0, H * 0.06)));
  const double leg_spread = rng.uniform(0.0, 9.0) * kPi / 180.0;
  const int leg_thick = std::max(2, static_cast<int>(std::lround(W * 0.09)));
  const int shoe_h = std::max(2, static_cast<int>(std::lround(H * 0.04)));
  const int shoe_w = std::max(3, static_cast<int>(std::lround(W * 0.12)));
  const double lower_choice = rng.uniform();
  const bool want_jacket = rng.uniform() < 0.4;
  const bool bare_arms_roll = rng.uniform() < 0.3;

  SceneDetail out;
  out.attrs.assign(static_cast<std::size_t>(cat.n), PartAttr{});
  for (int p = 1; p < cat.n; ++p) {
    PartAttr& a = out.attrs[static_cast<std::size_t>(p)];
    a.color = static_cast<int>(rng.uniform_int(0, static_cast<int>(cat.color_names.size()) - 1));
    a.pattern = is_clothing(cat.part_names[static_cast<std::size_t>(p)])
                    ? static_cast<int>(rng.uniform_int(0, static_cast<int>(cat.pattern_names.size()) - 1))
                    : 0;
  }

  const int id_top = cat.index_of("top");
  const int id_pants = cat.index_of("pants");
  const int id_hair = cat.index_of("hair");
  const int id_face = cat.index_of("face");
  const int id_shoes = cat.index_of("shoes");
  const int id_outer = cat.index_of("outer");
  const int id_skirt = cat.index_of("skirt");
  const int id_dress = cat.index_of("dress");
  const int id_skin = cat.index_of("skin");
  if (id_top < 0 || id_pants < 0 || id_hair < 0 || id_face < 0 || id_shoes < 0)
    throw std::invalid_argument(
        "generate_scene: catalog must name top, pants, hair, face and shoes parts");

  // Optional-garment resolution. Skirts and dresses require a skin part for
  // the exposed lower legs.
  enum class Lower { Pants, Skirt, Dress };
  Lower lower = Lower::Pants;
  if (id_skirt >= 0 && id_dress >= 0 && id_skin >= 0) {
    if (lower_choice < 0.25)
      lower = Lower::Skirt;
    else if (lower_choice < 0.5)
      lower = Lower::Dress;
  }
  const bool jacket = id_outer >= 0 && want_jacket;
  const bool bare_arms = id_skin >= 0 && (jacket || bare_arms_roll);

  SemanticScene& sc = out.scene;
  sc.seed = seed;
  sc.map.assign(static_cast<std::size_t>(H) * W, 0);
  Canvas cv{H, W, &sc.map};

  // --- head ---
  const int hair_rx = head_rx + hair_extra;
  const int hair_ry = head_ry + hair_extra;
  if (head_cy - hair_ry < 1 || cx - hair_rx < 1 || cx + hair_rx > W - 2)
    no_fit("hair", H, W);
  cv.fill_ellipse(head_cy, cx, hair_ry, hair_rx, static_cast<std::uint8_t>(id_hair));
  cv.fill_ellipse(head_cy + 1, cx, head_ry, head_rx, static_cast<std::uint8_t>(id_face));

  // --- torso ---
  const int shoulder_y = head_cy + hair_ry + 2;
  torso_hw = std::min(torso_hw, cx - 2);
  torso_hw = std::min(torso_hw, W - 3 - cx);
  if (torso_hw < 3) no_fit("top", H, W);
  const int waist_y = shoulder_y + torso_len;
  if (waist_y >= H - 6) no_fit("top", H, W);
  const int torso_part = lower == Lower::Dress ? id_dress : id_top;
  cv.fill_rect(shoulder_y, cx - torso_hw, waist_y, cx + torso_hw,
               static_cast<std::uint8_t>(torso_part));
  if (jacket && lower != Lower::Dress) {
    const int panel = std::max(2, torso_hw / 2);
    cv.fill_rect(shoulder_y, cx - torso_hw, waist_y, cx - torso_hw + panel - 1,
                 static_cast<std::uint8_t>(id_outer));
    cv.fill_rect(shoulder_y, cx + torso_hw - panel + 1, waist_y, cx + torso_hw,
                 static_cast<std::uint8_t>(id_outer));
  }

  // --- arms (sleeves share the top label unless bare) ---
  const int arm_part = bare_arms ? id_skin : (lower == Lower::Dress ? id_dress : id_top);
  for (int side = -1; side <= 1; side += 2) {
    double ang = arm_angle;
    int ex;
    while (true) {
      ex = cx + side * (torso_hw + static_cast<int>(std::lround(std::sin(ang) * arm_len)));
      if (ex - arm_thick >= 0 && ex + arm_thick <= W - 1) break;
      ang *= 0.7;
      if (ang < 0.01) {
        ex = cx + side * torso_hw;
        if (ex - arm_thick < 0 || ex + arm_thick > W - 1) no_fit("top", H, W);
        break;
      }
    }
    const double ey = shoulder_y + 1 + std::cos(ang) * arm_len;
    if (ey >= H - 1) no_fit("top", H, W);
    cv.thick_line(shoulder_y + 1, cx + side * torso_hw, ey, ex, arm_thick,
                  static_cast<std::uint8_t>(arm_part));
  }

  // --- lower body ---
  if (waist_y + leg_len + shoe_h > H - 1) leg_len = H - 1 - shoe_h - waist_y;
  if (leg_len < 4) no_fit("shoes", H, W);
  const int hip_off = std::max(1, torso_hw / 2);
  int leg_top_y = waist_y + 1;
  int leg_part = id_pants;
  if (lower == Lower::Skirt) {
    const int skirt_len = std::max(3, leg_len / 2);
    cv.fill_rect(waist_y + 1, cx - torso_hw - 1, waist_y + skirt_len, cx + torso_hw + 1,
                 static_cast<std::uint8_t>(id_skirt));
    leg_top_y = waist_y + skirt_len + 1;
    leg_part = id_skin;
  } else if (lower == Lower::Dress) {
    const int skirt_len = std::max(4, 2 * leg_len / 3);
    cv.fill_rect(waist_y + 1, cx - torso_hw - 2, waist_y + skirt_len, cx + torso_hw + 2,
                 static_cast<std::uint8_t>(id_dress));
    leg_top_y = waist_y + skirt_len + 1;
    leg_part = id_skin;
  }
  const int leg_bottom_y = waist_y + leg_len;
  int foot_x[2];
  int side_i = 0;
  for (int side = -1; side <= 1; side += 2, ++side_i) {
    const double x0 = cx + side * hip_off;
    const double x1 = x0 + side * std::tan(leg_spread) * (leg_bottom_y - leg_top_y);
    cv.thick_line(leg_top_y, x0, leg_bottom_y, x1, leg_thick,
                  static_cast<std::uint8_t>(leg_part));
    foot_x[side_i] = static_cast<int>(std::lround(x1));
  }

  // --- shoes ---
  for (int i = 0; i < 2; ++i) {
    const int x0 = foot_x[i] - shoe_w / 2;
    const int x1 = x0 + shoe_w - 1;
    if (x0 < 0 || x1 > W - 1 || leg_bottom_y + shoe_h > H - 1) no_fit("shoes", H, W);
    cv.fill_rect(leg_bottom_y + 1, x0, leg_bottom_y + shoe_h, x1,
                 static_cast<std::uint8_t>(id_shoes));
  }

  // --- mark presence, paint pixels, emit captions ---
  out.attrs[0].present = true;
  for (const std::uint8_t v : sc.map) out.attrs[v].present = true;

  sc.image = ImageF(H, W);
  for (int y = 0; y < H; ++y)
    for (int x = 0; x < W; ++x) {
      const std::uint8_t label = sc.map[static_cast<std::size_t>(y) * W + x];
      if (label == 0) {
        sc.image.set(y, x, bg_shade, bg_shade, bg_shade);
        continue;
      }
      const PartAttr& a = out.attrs[label];
      Rgb c = cat.color_rgb[static_cast<std::size_t>(a.color)];
      if (pattern_uses_secondary(a.pattern, y, x)) c = pattern_secondary(c);
      sc.image.set(y, x, c.r, c.g, c.b);
    }

  for (int p = 1; p < cat.n; ++p)
    if (out.attrs[static_cast<std::size_t>(p)].present)
      sc.captions[p] = make_caption(cat, p, out.attrs[static_cast<std::size_t>(p)]);

  return out;
}

}  // namespace figdiff
