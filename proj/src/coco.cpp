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

#include "tiledet/coco.hpp"

#include <fstream>

namespace tiledet {

namespace {

// Pops `key` from `obj` if present, returning it; leftover keys end up in
// the record's `extra`.
json take(json& obj, const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end()) return json();
  json v = *it;
  obj.erase(it);
  return v;
}

}  // namespace

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw DataError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return doc;
}

void write_json_file(const json& doc, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

DatasetIndex coco_from_json(const json& doc) {
  if (!doc.is_object()) throw DataError("COCO document must be an object");
  DatasetIndex ds;
  json root = doc;

  for (json img_json : take(root, "images")) {
    ImageRecord img;
    img.id = take(img_json, "id").get<int>();
    img.file_name = take(img_json, "file_name").get<std::string>();
    img.width = take(img_json, "width").get<double>();
    img.height = take(img_json, "height").get<double>();
    if (json v = take(img_json, "substrate"); !v.is_null()) {
      img.meta.substrate = substrate_from_string(v.get<std::string>());
    }
    if (json v = take(img_json, "depth_m"); !v.is_null()) {
      img.meta.depth_m = v.get<double>();
    }
    if (json v = take(img_json, "inclination_deg"); !v.is_null()) {
      img.meta.inclination_deg = v.get<double>();
    }
    img.extra = std::move(img_json);
    ds.images.push_back(std::move(img));
  }

  for (json ann_json : take(root, "annotations")) {
    Annotation ann;
    ann.id = take(ann_json, "id").get<int64_t>();
    ann.image_id = take(ann_json, "image_id").get<int>();
    ann.category_id = take(ann_json, "category_id").get<int>();
    json box = take(ann_json, "bbox");
    if (!box.is_array() || box.size() != 4) {
      throw DataError("annotation " + std::to_string(ann.id) +
                      " bbox must be [x,y,w,h]");
    }
    ann.bbox = BBox(box[0].get<double>(), box[1].get<double>(),
                    box[2].get<double>(), box[3].get<double>());
    take(ann_json, "area");  // recomputed on save
    if (json v = take(ann_json, "source_id"); !v.is_null()) {
      ann.source_id = v.get<int64_t>();
    }
    ann.extra = std::move(ann_json);
    ds.annotations.push_back(std::move(ann));
  }

  for (json cat_json : take(root, "categories")) {
    Category cat;
    cat.id = take(cat_json, "id").get<int>();
    cat.name = take(cat_json, "name").get<std::string>();
    if (json v = take(cat_json, "in_subset"); !v.is_null()) {
      cat.in_subset = v.get<bool>();
    }
    cat.extra = std::move(cat_json);
    ds.categories.entries.push_back(std::move(cat));
  }

  ds.extra = std::move(root);
  ds.validate();
  return ds;
}

DatasetIndex load_coco(const std::filesystem::path& path) {
  return coco_from_json(read_json_file(path));
}

json coco_to_json(const DatasetIndex& ds) {
  json images = json::array();
  for (const auto& img : ds.images) {
    json j{{"id", img.id},
           {"file_name", img.file_name},
           {"width", img.width},
           {"height", img.height},
           {"substrate", to_string(img.meta.substrate)},
           {"depth_m", img.meta.depth_m},
           {"inclination_deg", img.meta.inclination_deg}};
    j.update(img.extra);
    images.push_back(std::move(j));
  }
  json annotations = json::array();
  for (const auto& ann : ds.annotations) {
    json j{{"id", ann.id},
           {"image_id", ann.image_id},
           {"category_id", ann.category_id},
           {"bbox", {ann.bbox.x, ann.bbox.y, ann.bbox.w, ann.bbox.h}},
           {"area", ann.bbox.area()}};
    if (ann.source_id) j["source_id"] = *ann.source_id;
    j.update(ann.extra);
    annotations.push_back(std::move(j));
  }
  json categories = json::array();
  for (const auto& cat : ds.categories.entries) {
    json j{{"id", cat.id}, {"name", cat.name}, {"in_subset", cat.in_subset}};
    j.update(cat.extra);
    categories.push_back(std::move(j));
  }
  json doc{{"images", std::move(images)},
           {"annotations", std::move(annotations)},
           {"categories", std::move(categories)}};
  doc.update(ds.extra);
  return doc;
}

void save_coco(const DatasetIndex& ds, const std::filesystem::path& path) {
  write_json_file(coco_to_json(ds), path);
}

}  // namespace tiledet
