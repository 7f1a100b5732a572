// Copyright (c) 2026 the figdiff authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "figdiff/synthkit/catalog.hpp"
#include "figdiff/synthkit/generate.hpp"

namespace figdiff {

nlohmann::json catalog_to_json(const PartCatalog& cat);
PartCatalog catalog_from_json(const nlohmann::json& j);

struct DatasetSplit {
  PartCatalog catalog;
  std::string split;
  std::vector<SceneDetail> scenes;
};

/// One directory per split: RGB PNGs, paletted label PNGs, one JSON sidecar
/// per scene (captions, seed, render attributes) and a manifest carrying the
/// catalog and its hash so downstream stages can refuse mismatched data.
void save_dataset(const std::string& root, const std::string& split, const PartCatalog& catalog,
                  int count, std::uint64_t seed_base, bool force);

DatasetSplit load_dataset(const std::string& root, const std::string& split);

/// Validates a split's manifest against a catalog hash without loading scenes.
void check_dataset_catalog(const std::string& root, const std::string& split,
                           const PartCatalog& catalog);

}  // namespace figdiff
