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

#include "tiledet/slicer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <map>

#include "tiledet/raster.hpp"

namespace tiledet {

namespace {

constexpr double kEps = 1e-9;

std::vector<double> axis_origins(double image_size, double patch, double step) {
  if (image_size <= patch + kEps) return {0.0};
  std::vector<double> origins;
  for (double pos = 0; pos + patch < image_size - kEps; pos += step) {
    origins.push_back(pos);
  }
  // Final window clamped flush to the image edge.
  double last = image_size - patch;
  if (origins.empty() || last > origins.back() + kEps) {
    origins.push_back(last);
  }
  return origins;
}

std::string patch_file_name(const std::string& parent_file, size_t row,
                            size_t col) {
  std::filesystem::path p(parent_file);
  return p.stem().string() + "_r" + std::to_string(row) + "_c" +
         std::to_string(col) + ".png";
}

}  // namespace

void SliceConfig::validate() const {
  if (!(patch_w > 0) || !(patch_h > 0)) {
    throw ConfigError("patch dimensions must be positive");
  }
  if (overlap < 0 || overlap >= 1) {
    throw ConfigError("overlap must be in [0, 1)");
  }
  if (!(min_visibility > 0) || min_visibility > 1) {
    throw ConfigError("min_visibility must be in (0, 1]");
  }
}

PatchGrid compute_patch_grid(const ImageRecord& img, const SliceConfig& cfg) {
  cfg.validate();
  PatchGrid grid;
  grid.parent_image_id = img.id;
  grid.window_w = std::min(cfg.patch_w, img.width);
  grid.window_h = std::min(cfg.patch_h, img.height);
  grid.x_origins = axis_origins(img.width, cfg.patch_w, cfg.step_x());
  grid.y_origins = axis_origins(img.height, cfg.patch_h, cfg.step_y());
  return grid;
}

double visibility(const BBox& ann_box, const BBox& window) {
  return intersection_area(ann_box, window) / ann_box.area();
}

std::vector<PatchRecord> slice_annotations(
    const std::vector<const Annotation*>& img_annotations,
    const PatchGrid& grid, const SliceConfig& cfg, int64_t first_patch_id) {
  std::vector<PatchRecord> patches;
  patches.reserve(grid.patch_count());
  int64_t patch_id = first_patch_id;
  for (size_t yi = 0; yi < grid.y_origins.size(); ++yi) {
    for (size_t xi = 0; xi < grid.x_origins.size(); ++xi) {
      BBox window = grid.window_at(xi, yi);
      PatchRecord rec;
      rec.patch_id = patch_id++;
      rec.parent_image_id = grid.parent_image_id;
      rec.origin_x = window.x;
      rec.origin_y = window.y;
      rec.width = window.w;
      rec.height = window.h;
      for (const Annotation* ann : img_annotations) {
        double vis = visibility(ann->bbox, window);
        if (vis + kEps < cfg.min_visibility) continue;
        auto clipped = clip_box(ann->bbox, window);
        if (!clipped) continue;
        Annotation local;
        local.image_id = static_cast<int>(rec.patch_id);
        local.category_id = ann->category_id;
        local.bbox = BBox(clipped->x - window.x, clipped->y - window.y,
                          clipped->w, clipped->h);
        local.source_id = ann->id;
        rec.annotations.push_back(std::move(local));
      }
      patches.push_back(std::move(rec));
    }
  }
  return patches;
}

SliceResult slice_dataset(const DatasetIndex& ds, const SliceConfig& cfg) {
  cfg.validate();
  ds.validate();
  SliceResult result;
  result.patched.categories = ds.categories;

  std::vector<const ImageRecord*> images;
  for (const auto& img : ds.images) images.push_back(&img);
  std::sort(images.begin(), images.end(),
            [](const ImageRecord* a, const ImageRecord* b) {
              return a->id < b->id;
            });
  auto by_image = ds.annotations_by_image();

  int64_t next_patch_id = 1;
  int64_t next_ann_id = 1;
  for (const ImageRecord* img : images) {
    PatchGrid grid = compute_patch_grid(*img, cfg);
    auto patches =
        slice_annotations(by_image[img->id], grid, cfg, next_patch_id);
    next_patch_id += static_cast<int64_t>(patches.size());
    size_t cols = grid.x_origins.size();
    for (size_t i = 0; i < patches.size(); ++i) {
      PatchRecord& rec = patches[i];
      rec.file_name = patch_file_name(img->file_name, i / cols, i % cols);

      ImageRecord patch_img;
      patch_img.id = static_cast<int>(rec.patch_id);
      patch_img.file_name = rec.file_name;
      patch_img.width = rec.width;
      patch_img.height = rec.height;
      patch_img.meta = img->meta;
      result.patched.images.push_back(std::move(patch_img));

      for (Annotation& ann : rec.annotations) {
        ann.id = next_ann_id++;
        result.patched.annotations.push_back(ann);
      }
      result.manifest.patches.push_back(std::move(rec));
    }
  }
  return result;
}

void materialize_patches(const DatasetIndex& ds, const PatchManifest& manifest,
                         const std::filesystem::path& images_dir,
                         const std::filesystem::path& out_dir, int workers) {
  std::map<int, std::vector<const PatchRecord*>> by_parent;
  for (const auto& rec : manifest.patches) {
    by_parent[rec.parent_image_id].push_back(&rec);
  }
  std::filesystem::create_directories(out_dir);

  auto process_parent = [&](int parent_id,
                            const std::vector<const PatchRecord*>& recs) {
    const ImageRecord& parent = ds.image(parent_id);
    cv::Mat img = load_raster(images_dir / parent.file_name);
    for (const PatchRecord* rec : recs) {
      BBox window(rec->origin_x, rec->origin_y, rec->width, rec->height);
      save_raster(crop_raster(img, window), out_dir / rec->file_name);
    }
  };

  if (workers <= 1) {
    for (const auto& [parent_id, recs] : by_parent) {
      process_parent(parent_id, recs);
    }
    return;
  }
  // Distinct parents write distinct files, so completion order is irrelevant.
  std::vector<std::pair<int, const std::vector<const PatchRecord*>*>> items;
  for (const auto& [parent_id, recs] : by_parent) {
    items.emplace_back(parent_id, &recs);
  }
  std::atomic<size_t> cursor{0};
  std::vector<std::future<void>> tasks;
  for (int t = 0; t < workers; ++t) {
    tasks.push_back(std::async(std::launch::async, [&]() {
      for (size_t i = cursor++; i < items.size(); i = cursor++) {
        process_parent(items[i].first, *items[i].second);
      }
    }));
  }
  for (auto& task : tasks) task.get();
}

json manifest_to_json(const PatchManifest& m) {
  json patches = json::array();
  for (const auto& rec : m.patches) {
    patches.push_back({{"patch_id", rec.patch_id},
                       {"parent_image_id", rec.parent_image_id},
                       {"origin_x", rec.origin_x},
                       {"origin_y", rec.origin_y},
                       {"width", rec.width},
                       {"height", rec.height},
                       {"patch_file_name", rec.file_name}});
  }
  return json{{"patches", std::move(patches)}};
}

PatchManifest manifest_from_json(const json& doc) {
  PatchManifest m;
  if (!doc.is_object() || !doc.contains("patches")) {
    throw DataError("manifest must contain a patches array");
  }
  for (const auto& j : doc.at("patches")) {
    PatchRecord rec;
    rec.patch_id = j.at("patch_id").get<int64_t>();
    rec.parent_image_id = j.at("parent_image_id").get<int>();
    rec.origin_x = j.at("origin_x").get<double>();
    rec.origin_y = j.at("origin_y").get<double>();
    rec.width = j.at("width").get<double>();
    rec.height = j.at("height").get<double>();
    rec.file_name = j.at("patch_file_name").get<std::string>();
    m.patches.push_back(std::move(rec));
  }
  return m;
}

std::vector<Annotation> scale_annotations(const std::vector<Annotation>& anns,
                                          double orig_w, double orig_h,
                                          double target_w, double target_h) {
  if (!(orig_w > 0) || !(orig_h > 0) || !(target_w > 0) || !(target_h > 0)) {
    throw ConfigError("scale dimensions must be positive");
  }
  double sx = target_w / orig_w;
  double sy = target_h / orig_h;
  std::vector<Annotation> out;
  out.reserve(anns.size());
  for (const auto& ann : anns) {
    Annotation scaled = ann;
    double w = std::max(1.0, ann.bbox.w * sx);
    double h = std::max(1.0, ann.bbox.h * sy);
    double x = std::min(ann.bbox.x * sx, std::max(0.0, target_w - w));
    double y = std::min(ann.bbox.y * sy, std::max(0.0, target_h - h));
    scaled.bbox = BBox(x, y, w, h);
    out.push_back(std::move(scaled));
  }
  return out;
}

}  // namespace tiledet
