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

#include "tiledet/postprocess.hpp"

#include <algorithm>
#include <unordered_map>

namespace tiledet {

namespace {

// score desc, then lexicographic box coordinates, then class id.
bool det_order(const Detection& a, const Detection& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.bbox.x != b.bbox.x) return a.bbox.x < b.bbox.x;
  if (a.bbox.y != b.bbox.y) return a.bbox.y < b.bbox.y;
  if (a.bbox.w != b.bbox.w) return a.bbox.w < b.bbox.w;
  if (a.bbox.h != b.bbox.h) return a.bbox.h < b.bbox.h;
  return a.category_id < b.category_id;
}

}  // namespace

std::string to_string(PostprocessMode m) {
  switch (m) {
    case PostprocessMode::nmm: return "nmm";
    case PostprocessMode::nms: return "nms";
    case PostprocessMode::none: return "none";
  }
  return "none";
}

PostprocessMode postprocess_mode_from_string(const std::string& s) {
  if (s == "nmm") return PostprocessMode::nmm;
  if (s == "nms") return PostprocessMode::nms;
  if (s == "none") return PostprocessMode::none;
  throw ConfigError("unknown postprocess mode: " + s);
}

void PostprocessConfig::validate() const {
  if (!(iou_threshold > 0) || iou_threshold > 1) {
    throw ConfigError("iou_threshold must be in (0, 1]");
  }
}

std::vector<Detection> reproject(const std::vector<Detection>& dets,
                                 const PatchManifest& manifest,
                                 const DatasetIndex& ds) {
  std::unordered_map<int64_t, const PatchRecord*> by_id;
  for (const auto& rec : manifest.patches) by_id[rec.patch_id] = &rec;

  std::vector<Detection> out;
  out.reserve(dets.size());
  for (const auto& det : dets) {
    if (!det.patch_id) {
      out.push_back(det);  // already whole-image coordinates
      continue;
    }
    auto it = by_id.find(*det.patch_id);
    if (it == by_id.end()) {
      throw DataError("detection references unknown patch " +
                      std::to_string(*det.patch_id));
    }
    const PatchRecord& rec = *it->second;
    const ImageRecord& parent = ds.image(rec.parent_image_id);
    double x1 = std::max(0.0, det.bbox.x + rec.origin_x);
    double y1 = std::max(0.0, det.bbox.y + rec.origin_y);
    double x2 = std::min(parent.width, det.bbox.x2() + rec.origin_x);
    double y2 = std::min(parent.height, det.bbox.y2() + rec.origin_y);
    Detection global = det;
    global.bbox = BBox(x1, y1, x2 - x1, y2 - y1);
    global.patch_id.reset();
    global.image_id = rec.parent_image_id;
    out.push_back(std::move(global));
  }
  return out;
}

std::vector<Detection> nmm_merge(const std::vector<Detection>& dets,
                                 const PostprocessConfig& cfg) {
  cfg.validate();
  std::vector<Detection> pool = dets;
  std::sort(pool.begin(), pool.end(), det_order);

  std::vector<bool> consumed(pool.size(), false);
  std::vector<Detection> out;
  for (size_t i = 0; i < pool.size(); ++i) {
    if (consumed[i]) continue;
    consumed[i] = true;
    Detection anchor = pool[i];
    // Fixed point: every hull growth can bring new detections over the
    // threshold, so re-test the remainder until a clean pass.
    bool merged = true;
    while (merged) {
      merged = false;
      for (size_t j = i + 1; j < pool.size(); ++j) {
        if (consumed[j]) continue;
        if (!cfg.class_agnostic &&
            pool[j].category_id != anchor.category_id) {
          continue;
        }
        if (iou(anchor.bbox, pool[j].bbox) >= cfg.iou_threshold) {
          anchor.bbox = union_box(anchor.bbox, pool[j].bbox);
          anchor.score = std::max(anchor.score, pool[j].score);
          consumed[j] = true;
          merged = true;
        }
      }
    }
    out.push_back(std::move(anchor));
  }
  std::sort(out.begin(), out.end(), det_order);
  return out;
}

std::vector<Detection> nms_suppress(const std::vector<Detection>& dets,
                                    const PostprocessConfig& cfg) {
  cfg.validate();
  std::vector<Detection> pool = dets;
  std::sort(pool.begin(), pool.end(), det_order);

  std::vector<bool> suppressed(pool.size(), false);
  std::vector<Detection> out;
  for (size_t i = 0; i < pool.size(); ++i) {
    if (suppressed[i]) continue;
    out.push_back(pool[i]);
    for (size_t j = i + 1; j < pool.size(); ++j) {
      if (suppressed[j]) continue;
      if (!cfg.class_agnostic && pool[j].category_id != pool[i].category_id) {
        continue;
      }
      if (iou(pool[i].bbox, pool[j].bbox) >= cfg.iou_threshold) {
        suppressed[j] = true;
      }
    }
  }
  return out;
}

std::map<int, std::vector<Detection>> postprocess_pipeline(
    const std::vector<Detection>& dets, const PatchManifest& manifest,
    const DatasetIndex& ds, const PostprocessConfig& cfg) {
  cfg.validate();
  std::map<int, std::vector<Detection>> by_image;
  for (auto& det : reproject(dets, manifest, ds)) {
    if (!det.image_id) {
      throw DataError("whole-image detection is missing image_id");
    }
    by_image[*det.image_id].push_back(std::move(det));
  }
  for (auto& [image_id, image_dets] : by_image) {
    switch (cfg.mode) {
      case PostprocessMode::nmm:
        image_dets = nmm_merge(image_dets, cfg);
        break;
      case PostprocessMode::nms:
        image_dets = nms_suppress(image_dets, cfg);
        break;
      case PostprocessMode::none:
        break;
    }
  }
  return by_image;
}

}  // namespace tiledet
