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

#ifndef TILEDET_DATASET_HPP
#define TILEDET_DATASET_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tiledet/geometry.hpp"

namespace tiledet {

using json = nlohmann::ordered_json;

enum class Substrate { hard, soft };

std::string to_string(Substrate s);
Substrate substrate_from_string(const std::string& s);

struct EnvMetadata {
  Substrate substrate = Substrate::hard;
  double depth_m = 0.0;          // [0, 11000]
  double inclination_deg = 0.0;  // [0, 90]

  bool operator==(const EnvMetadata&) const = default;
};

struct ImageRecord {
  int id = 0;
  std::string file_name;
  double width = 0;
  double height = 0;
  EnvMetadata meta;
  json extra = json::object();  // unknown COCO fields, preserved on round-trip

  BBox bounds() const { return BBox(0, 0, width, height); }
};

struct Annotation {
  int64_t id = 0;
  int image_id = 0;
  int category_id = 0;
  BBox bbox;
  // Id of the whole-image annotation this one was sliced from, if any.
  std::optional<int64_t> source_id;
  json extra = json::object();
};

struct Detection {
  BBox bbox;
  int category_id = 0;
  double score = 0.0;  // [0, 1]
  std::optional<int64_t> patch_id;  // set before reprojection, cleared after
  std::optional<int> image_id;      // set after reprojection
};

struct Category {
  int id = 0;
  std::string name;
  // Evaluation-subset flag; for the built-in WSBD schema this marks the
  // 10 most abundant classes.
  bool in_subset = false;
  json extra = json::object();
};

struct CategoryTable {
  std::vector<Category> entries;

  bool contains(int category_id) const;
  const Category& at(int category_id) const;
  std::vector<int> subset_ids() const;
  void validate() const;  // unique ids and names
};

// The 25-class Weddell Sea benthic schema with its 10-class subset flagged.
CategoryTable wsbd_categories();

struct DatasetIndex {
  std::vector<ImageRecord> images;
  std::vector<Annotation> annotations;
  CategoryTable categories;
  json extra = json::object();

  const ImageRecord& image(int image_id) const;
  // Throws DataError on dangling references, duplicate ids or boxes
  // outside their image.
  void validate() const;
  std::map<int, std::vector<const Annotation*>> annotations_by_image() const;
};

struct ClassStats {
  int category_id = 0;
  std::string name;
  int64_t count = 0;
  double min_area = 0;
  double max_area = 0;
  double mean_area = 0;
};

struct DatasetReport {
  std::vector<ClassStats> per_class;  // in category-table order
  int64_t total_annotations = 0;
  int64_t total_images = 0;
};

DatasetReport dataset_report(const DatasetIndex& ds);
json report_to_json(const DatasetReport& r);

}  // namespace tiledet

#endif  // TILEDET_DATASET_HPP
