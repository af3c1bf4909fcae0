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

#ifndef TILEDET_POSTPROCESS_HPP
#define TILEDET_POSTPROCESS_HPP

#include <map>
#include <vector>

#include "tiledet/dataset.hpp"
#include "tiledet/slicer.hpp"

namespace tiledet {

enum class PostprocessMode { nmm, nms, none };

std::string to_string(PostprocessMode m);
PostprocessMode postprocess_mode_from_string(const std::string& s);

struct PostprocessConfig {
  PostprocessMode mode = PostprocessMode::nmm;
  double iou_threshold = 0.20;
  bool class_agnostic = false;

  void validate() const;
};

// Translates patch-local detections into whole-image coordinates via the
// manifest: box shifted by the patch origin, clamped to the parent image,
// patch_id cleared and image_id set. Whole-image detections (no patch_id)
// pass through untouched.
std::vector<Detection> reproject(const std::vector<Detection>& dets,
                                 const PatchManifest& manifest,
                                 const DatasetIndex& ds);

// Greedy fixed-point Non-Maximum Merging. The highest-scored unconsumed
// detection anchors a group; every unconsumed same-class detection whose IoU
// with the anchor's current hull meets the threshold is absorbed (hull grows
// to the union box, score stays the max) and the scan restarts until no merge
// applies. Ties on score break lexicographically on box coordinates.
std::vector<Detection> nmm_merge(const std::vector<Detection>& dets,
                                 const PostprocessConfig& cfg);

// Standard greedy per-class suppression with the same deterministic ordering;
// survivors are unmodified originals.
std::vector<Detection> nms_suppress(const std::vector<Detection>& dets,
                                    const PostprocessConfig& cfg);

// reproject, group by parent image, apply the configured mode per image.
std::map<int, std::vector<Detection>> postprocess_pipeline(
    const std::vector<Detection>& dets, const PatchManifest& manifest,
    const DatasetIndex& ds, const PostprocessConfig& cfg);

}  // namespace tiledet

#endif  // TILEDET_POSTPROCESS_HPP
