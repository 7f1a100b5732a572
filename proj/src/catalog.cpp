// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#include "figdiff/synthkit/catalog.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace figdiff {

namespace {

std::vector<std::string> default_colors() {
  return {"red", "yellow", "green", "cyan", "blue", "magenta"};
}

std::vector<Rgb> default_color_rgb() {
  return {{0.90f, 0.10f, 0.10f}, {0.90f, 0.90f, 0.10f}, {0.10f, 0.85f, 0.10f},
          {0.10f, 0.85f, 0.85f}, {0.10f, 0.10f, 0.90f}, {0.85f, 0.10f, 0.85f}};
}

}  // namespace

PartCatalog PartCatalog::toy_default() {
  PartCatalog c;
  c.part_names = {"background", "top", "pants", "hair", "face", "shoes"};
  c.n = static_cast<int>(c.part_names.size());
  c.color_names = default_colors();
  c.color_rgb = default_color_rgb();
  c.pattern_names = {"solid", "striped", "checked"};
  c.H = 64;
  c.W = 32;
  return c;
}

PartCatalog PartCatalog::parts10() {
  PartCatalog c = toy_default();
  c.part_names = {"background", "top",  "outer", "skirt", "dress",
                  "pants",      "hair", "face",  "shoes", "skin"};
  c.n = static_cast<int>(c.part_names.size());
  return c;
}

void PartCatalog::validate() const {
  if (n < 2) throw std::invalid_argument("catalog: need n >= 2 parts");
  if (static_cast<int>(part_names.size()) != n)
    throw std::invalid_argument("catalog: part_names size != n");
  if (part_names[0] != "background")
    throw std::invalid_argument("catalog: part 0 must be \"background\"");
  if (color_names.empty() || color_names.size() != color_rgb.size())
    throw std::invalid_argument("catalog: color vocabulary empty or inconsistent");
  if (pattern_names.empty() || pattern_names[0] != "solid")
    throw std::invalid_argument("catalog: pattern vocabulary must start with \"solid\"");
  if (H < 8 || W < 8) throw std::invalid_argument("catalog: canvas below 8x8");
}

int PartCatalog::index_of(const std::string& part_name) const {
  const auto it = std::find(part_names.begin(), part_names.end(), part_name);
  return it == part_names.end() ? -1 : static_cast<int>(it - part_names.begin());
}

int PartCatalog::color_index(const std::string& word) const {
  const auto it = std::find(color_names.begin(), color_names.end(), word);
  return it == color_names.end() ? -1 : static_cast<int>(it - color_names.begin());
}

int PartCatalog::pattern_index(const std::string& word) const {
  const auto it = std::find(pattern_names.begin(), pattern_names.end(), word);
  return it == pattern_names.end() ? -1 : static_cast<int>(it - pattern_names.begin());
}

std::uint64_t PartCatalog::hash() const {
  std::ostringstream os;
  os << n << '|' << H << 'x' << W << '|';
  for (const auto& p : part_names) os << p << ',';
  os << '|';
  for (std::size_t i = 0; i < color_names.size(); ++i)
    os << color_names[i] << ':' << color_rgb[i].r << ':' << color_rgb[i].g << ':'
       << color_rgb[i].b << ',';
  os << '|';
  for (const auto& p : pattern_names) os << p << ',';
  return fnv1a64(os.str());
}

}  // namespace figdiff
