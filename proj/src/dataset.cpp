// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#include "figdiff/synthkit/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "figdiff/io/png_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace figdiff {

namespace {

std::string id_str(int id) {
  std::ostringstream os;
  os << std::setw(6) << std::setfill('0') << id;
  return os.str();
}

json load_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  json j;
  in >> j;
  return j;
}

void write_json_file(const fs::path& p, const json& j) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << j.dump(2) << '\n';
}

}  // namespace

json catalog_to_json(const PartCatalog& cat) {
  json colors = json::array();
  for (std::size_t i = 0; i < cat.color_names.size(); ++i)
    colors.push_back({{"name", cat.color_names[i]},
                      {"rgb", {cat.color_rgb[i].r, cat.color_rgb[i].g, cat.color_rgb[i].b}}});
  return json{{"n", cat.n},
              {"part_names", cat.part_names},
              {"colors", colors},
              {"patterns", cat.pattern_names},
              {"H", cat.H},
              {"W", cat.W}};
}

PartCatalog catalog_from_json(const json& j) {
  PartCatalog cat;
  cat.n = j.at("n").get<int>();
  cat.part_names = j.at("part_names").get<std::vector<std::string>>();
  for (const auto& c : j.at("colors")) {
    cat.color_names.push_back(c.at("name").get<std::string>());
    const auto rgb = c.at("rgb").get<std::vector<float>>();
    if (rgb.size() != 3) throw std::invalid_argument("catalog json: rgb needs 3 values");
    cat.color_rgb.push_back({rgb[0], rgb[1], rgb[2]});
  }
  cat.pattern_names = j.at("patterns").get<std::vector<std::string>>();
  cat.H = j.at("H").get<int>();
  cat.W = j.at("W").get<int>();
  cat.validate();
  return cat;
}

void save_dataset(const std::string& root, const std::string& split, const PartCatalog& catalog,
                  int count, std::uint64_t seed_base, bool force) {
  catalog.validate();
  if (count < 0) throw std::invalid_argument("save_dataset: negative count");
  const fs::path dir = fs::path(root) / split;
  if (fs::exists(dir / "manifest.json") && !force)
    throw std::runtime_error("dataset split already exists (use --force to overwrite): " +
                             dir.string());
  fs::create_directories(dir);

  std::vector<SceneDetail> scenes(static_cast<std::size_t>(count));
  // scene generation is embarrassingly parallel across seeds
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < count; ++i)
    scenes[static_cast<std::size_t>(i)] = generate_scene_detail(catalog, seed_base + i);

  json ids = json::array();
  for (int i = 0; i < count; ++i) {
    const SceneDetail& d = scenes[static_cast<std::size_t>(i)];
    const std::string id = id_str(i);
    write_png_rgb((dir / ("img_" + id + ".png")).string(), d.scene.image);
    write_png_labels((dir / ("map_" + id + ".png")).string(), d.scene.map, catalog.H, catalog.W,
                     catalog.n);
    json attrs = json::array();
    for (int p = 0; p < catalog.n; ++p) {
      const PartAttr& a = d.attrs[static_cast<std::size_t>(p)];
      attrs.push_back(
          {{"part", p}, {"present", a.present}, {"color", a.color}, {"pattern", a.pattern}});
    }
    json captions = json::object();
    for (const auto& [part, text] : d.scene.captions) captions[std::to_string(part)] = text;
    write_json_file(dir / ("scene_" + id + ".json"), json{{"id", i},
                                                          {"seed", d.scene.seed},
                                                          {"captions", captions},
                                                          {"attrs", attrs}});
    ids.push_back(i);
  }
  write_json_file(dir / "manifest.json",
                  json{{"split", split},
                       {"count", count},
                       {"seed_base", seed_base},
                       {"catalog_hash", catalog.hash()},
                       {"catalog", catalog_to_json(catalog)},
                       {"ids", ids}});
}

DatasetSplit load_dataset(const std::string& root, const std::string& split) {
  const fs::path dir = fs::path(root) / split;
  if (!fs::exists(dir / "manifest.json"))
    throw std::runtime_error("dataset split not found: " + dir.string());
  const json manifest = load_json_file(dir / "manifest.json");
  DatasetSplit out;
  out.split = split;
  out.catalog = catalog_from_json(manifest.at("catalog"));
  if (manifest.at("catalog_hash").get<std::uint64_t>() != out.catalog.hash())
    throw std::runtime_error("dataset manifest catalog hash is inconsistent: " + dir.string());

  for (const auto& idj : manifest.at("ids")) {
    const int i = idj.get<int>();
    const std::string id = id_str(i);
    SceneDetail d;
    d.scene.image = read_png_rgb((dir / ("img_" + id + ".png")).string());
    int h = 0, w = 0;
    d.scene.map = read_png_labels((dir / ("map_" + id + ".png")).string(), h, w);
    if (h != out.catalog.H || w != out.catalog.W)
      throw std::runtime_error("dataset scene " + id + " has wrong canvas size");
    const json meta = load_json_file(dir / ("scene_" + id + ".json"));
    d.scene.seed = meta.at("seed").get<std::uint64_t>();
    for (const auto& [key, text] : meta.at("captions").items())
      d.scene.captions[std::stoi(key)] = text.get<std::string>();
    d.attrs.assign(static_cast<std::size_t>(out.catalog.n), PartAttr{});
    for (const auto& a : meta.at("attrs")) {
      const int p = a.at("part").get<int>();
      PartAttr& attr = d.attrs.at(static_cast<std::size_t>(p));
      attr.present = a.at("present").get<bool>();
      attr.color = a.at("color").get<int>();
      attr.pattern = a.at("pattern").get<int>();
    }
    out.scenes.push_back(std::move(d));
  }
  return out;
}

void check_dataset_catalog(const std::string& root, const std::string& split,
                           const PartCatalog& catalog) {
  const fs::path dir = fs::path(root) / split;
  const json manifest = load_json_file(dir / "manifest.json");
  const auto file_hash = manifest.at("catalog_hash").get<std::uint64_t>();
  if (file_hash != catalog.hash())
    throw std::runtime_error("dataset catalog mismatch for split \"" + split + "\": data " +
                             std::to_string(file_hash) + " vs config " +
                             std::to_string(catalog.hash()));
}

}  // namespace figdiff
