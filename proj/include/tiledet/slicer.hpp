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

#ifndef TILEDET_SLICER_HPP
#define TILEDET_SLICER_HPP

#include <filesystem>
#include <vector>

#include "tiledet/dataset.hpp"

namespace tiledet {

struct SliceConfig {
  double patch_w = 500;
  double patch_h = 500;
  // Fraction of patch size shared between adjacent windows on both axes;
  // step = patch * (1 - overlap).
  double overlap = 0.5;
  // Fraction of a box's area that must fall inside a window for the clipped
  // box to be kept. Comparison is inclusive (>=).
  double min_visibility = 0.25;

  void validate() const;
  double step_x() const { return patch_w * (1.0 - overlap); }
  double step_y() const { return patch_h * (1.0 - overlap); }
};

// Window origins over one image. Windows are clamped flush to the image edge,
// never padded, so window size is uniform (min(patch, image) per axis).
struct PatchGrid {
  int parent_image_id = 0;
  std::vector<double> x_origins;
  std::vector<double> y_origins;
  double window_w = 0;
  double window_h = 0;

  size_t patch_count() const { return x_origins.size() * y_origins.size(); }
  BBox window_at(size_t xi, size_t yi) const {
    return BBox(x_origins[xi], y_origins[yi], window_w, window_h);
  }
};

struct PatchRecord {
  int64_t patch_id = 0;
  int parent_image_id = 0;
  double origin_x = 0;
  double origin_y = 0;
  double width = 0;
  double height = 0;
  std::string file_name;
  std::vector<Annotation> annotations;  // patch-local coordinates
};

struct PatchManifest {
  std::vector<PatchRecord> patches;  // annotation lists omitted on save
};

struct SliceResult {
  DatasetIndex patched;  // images are patches, annotations patch-local
  PatchManifest manifest;
};

PatchGrid compute_patch_grid(const ImageRecord& img, const SliceConfig& cfg);

// Fraction of the annotation box's area inside the window.
double visibility(const BBox& ann_box, const BBox& window);

// Row-major windows (y outer, x inner); patch ids start at first_patch_id.
// Patch-local annotation ids are assigned by the caller via slice_dataset;
// here they keep 0 and carry source_id.
std::vector<PatchRecord> slice_annotations(
    const std::vector<const Annotation*>& img_annotations,
    const PatchGrid& grid, const SliceConfig& cfg, int64_t first_patch_id);

SliceResult slice_dataset(const DatasetIndex& ds, const SliceConfig& cfg);

// Crops and writes every patch raster listed in the manifest. Parent images
// are resolved relative to images_dir by their dataset file_name.
void materialize_patches(const DatasetIndex& ds, const PatchManifest& manifest,
                         const std::filesystem::path& images_dir,
                         const std::filesystem::path& out_dir, int workers = 1);

json manifest_to_json(const PatchManifest& m);
PatchManifest manifest_from_json(const json& doc);

// Scales boxes by (target/orig) per axis; w/h below one pixel clamp to 1.
std::vector<Annotation> scale_annotations(const std::vector<Annotation>& anns,
                                          double orig_w, double orig_h,
                                          double target_w, double target_h);

}  // namespace tiledet

#endif  // TILEDET_SLICER_HPP
