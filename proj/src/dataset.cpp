// Copyright 2026 The tiledet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tiledet/dataset.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace tiledet {

std::string to_string(Substrate s) {
  return s == Substrate::hard ? "hard" : "soft";
}

Substrate substrate_from_string(const std::string& s) {
  if (s == "hard") return Substrate::hard;
  if (s == "soft") return Substrate::soft;
  throw DataError("unknown substrate: " + s);
}

bool CategoryTable::contains(int category_id) const {
  return std::any_of(entries.begin(), entries.end(),
                     [&](const Category& c) { return c.id == category_id; });
}

const Category& CategoryTable::at(int category_id) const {
  for (const auto& c : entries) {
    if (c.id == category_id) return c;
  }
  throw DataError("unknown category id " + std::to_string(category_id));
}

std::vector<int> CategoryTable::subset_ids() const {
  std::vector<int> ids;
  for (const auto& c : entries) {
    if (c.in_subset) ids.push_back(c.id);
  }
  return ids;
}

void CategoryTable::validate() const {
  std::set<int> ids;
  std::set<std::string> names;
  for (const auto& c : entries) {
    if (!ids.insert(c.id).second) {
      throw DataError("duplicate category id " + std::to_string(c.id));
    }
    if (!names.insert(c.name).second) {
      throw DataError("duplicate category name " + c.name);
    }
  }
}

CategoryTable wsbd_categories() {
  // Ordered alphabetically, ids contiguous from 1. The subset flag marks the
  // 10 most abundant classes.
  static const struct {
    const char* name;
    bool subset;
  } kClasses[] = {
      {"actiniarian", false},
      {"alcyonium", false},
      {"anthomastus", false},
      {"ascidian_cnemidocarpa_verrucosa", false},
      {"ascidian_distaplia", false},
      {"ascidian_pyura_bouvetensis", false},
      {"asteroidia", false},
      {"astrochlamys", true},
      {"benthic_fish", false},
      {"bryozoan", false},
      {"crinoid", false},
      {"crustaceans", true},
      {"cucumber", true},
      {"cup_coral", true},
      {"demosponges", true},
      {"echinoid", false},
      {"glass_sponge", true},
      {"gorgonian", true},
      {"hydroid_solitary", false},
      {"ophiosabine", true},
      {"ophiuroid_5_arms", true},
      {"pencil_urchin", false},
      {"pycnogonid", false},
      {"stylasterids", true},
      {"worm_tubes", false},
  };
  CategoryTable table;
  int id = 1;
  for (const auto& c : kClasses) {
    table.entries.push_back(Category{id++, c.name, c.subset});
  }
  return table;
}

const ImageRecord& DatasetIndex::image(int image_id) const {
  for (const auto& img : images) {
    if (img.id == image_id) return img;
  }
  throw DataError("unknown image id " + std::to_string(image_id));
}

void DatasetIndex::validate() const {
  categories.validate();
  std::unordered_map<int, const ImageRecord*> by_id;
  for (const auto& img : images) {
    if (!(img.width > 0) || !(img.height > 0)) {
      throw DataError("image " + std::to_string(img.id) +
                      " has non-positive dimensions");
    }
    if (!by_id.emplace(img.id, &img).second) {
      throw DataError("duplicate image id " + std::to_string(img.id));
    }
  }
  std::unordered_set<int64_t> ann_ids;
  for (const auto& ann : annotations) {
    if (!ann_ids.insert(ann.id).second) {
      throw DataError("duplicate annotation id " + std::to_string(ann.id));
    }
    auto it = by_id.find(ann.image_id);
    if (it == by_id.end()) {
      throw DataError("annotation " + std::to_string(ann.id) +
                      " references unknown image " +
                      std::to_string(ann.image_id));
    }
    const ImageRecord& img = *it->second;
    // Tiny tolerance: fractional COCO boxes frequently touch the edge.
    const double eps = 1e-6;
    if (ann.bbox.x2() > img.width + eps || ann.bbox.y2() > img.height + eps) {
      throw DataError("annotation " + std::to_string(ann.id) +
                      " extends outside image " + std::to_string(img.id));
    }
    if (!categories.contains(ann.category_id)) {
      throw DataError("annotation " + std::to_string(ann.id) +
                      " references unknown category " +
                      std::to_string(ann.category_id));
    }
  }
}

std::map<int, std::vector<const Annotation*>> DatasetIndex::annotations_by_image()
    const {
  std::map<int, std::vector<const Annotation*>> out;
  for (const auto& img : images) out[img.id];
  for (const auto& ann : annotations) out[ann.image_id].push_back(&ann);
  return out;
}

DatasetReport dataset_report(const DatasetIndex& ds) {
  DatasetReport report;
  report.total_images = static_cast<int64_t>(ds.images.size());
  std::unordered_map<int, ClassStats*> lookup;
  for (const auto& cat : ds.categories.entries) {
    ClassStats stats;
    stats.category_id = cat.id;
    stats.name = cat.name;
    stats.min_area = std::numeric_limits<double>::infinity();
    report.per_class.push_back(stats);
  }
  for (auto& stats : report.per_class) lookup[stats.category_id] = &stats;

  for (const auto& ann : ds.annotations) {
    auto it = lookup.find(ann.category_id);
    if (it == lookup.end()) {
      throw DataError("annotation " + std::to_string(ann.id) +
                      " references unknown category " +
                      std::to_string(ann.category_id));
    }
    ClassStats& stats = *it->second;
    double area = ann.bbox.area();
    stats.count++;
    stats.min_area = std::min(stats.min_area, area);
    stats.max_area = std::max(stats.max_area, area);
    stats.mean_area += area;
    report.total_annotations++;
  }
  for (auto& stats : report.per_class) {
    if (stats.count > 0) {
      stats.mean_area /= static_cast<double>(stats.count);
    } else {
      stats.min_area = 0;
    }
  }
  return report;
}

json report_to_json(const DatasetReport& r) {
  json classes = json::array();
  for (const auto& s : r.per_class) {
    classes.push_back({{"category_id", s.category_id},
                       {"name", s.name},
                       {"count", s.count},
                       {"min_area", s.min_area},
                       {"max_area", s.max_area},
                       {"mean_area", s.mean_area}});
  }
  return json{{"total_images", r.total_images},
              {"total_annotations", r.total_annotations},
              {"classes", classes}};
}

}  // namespace tiledet
