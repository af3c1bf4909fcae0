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

#ifndef TILEDET_DETECTOR_HPP
#define TILEDET_DETECTOR_HPP

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "tiledet/dataset.hpp"
#include "tiledet/rng.hpp"

namespace tiledet {

// One patch's worth of detector input: the patch geometry plus its ground
// truth (oracle backends) — pixel access is backend-specific and optional.
struct PatchInput {
  int64_t patch_id = 0;
  double width = 0;
  double height = 0;
  std::vector<Annotation> annotations;  // patch-local ground truth
};

struct BackendInfo {
  std::string name;
  bool thread_safe = true;
};

class DetectorBackend {
 public:
  virtual ~DetectorBackend() = default;
  virtual BackendInfo info() const = 0;
  // Returns patch-local detections with patch_id set and scores in [0,1].
  virtual std::vector<Detection> detect(const PatchInput& patch) const = 0;
};

enum class ScoreModel { constant_1, iou_with_truth };

struct OracleConfig {
  double drop_rate = 0.0;       // probability a truth box is not detected
  double jitter_px = 0.0;       // uniform corner noise amplitude
  double confusion_rate = 0.0;  // probability of relabeling to another class
  ScoreModel score_model = ScoreModel::constant_1;
  uint64_t seed = 0;

  void validate() const;
};

// Synthesizes detections from ground truth with controllable corruption.
// The per-patch RNG stream depends only on (seed, patch_id), so processing
// order never changes the output.
class OracleBackend : public DetectorBackend {
 public:
  OracleBackend(OracleConfig cfg, CategoryTable categories);
  BackendInfo info() const override;
  std::vector<Detection> detect(const PatchInput& patch) const override;

 private:
  OracleConfig cfg_;
  std::vector<int> category_ids_;
};

// Replays detections previously written to a detections file.
class FileBackend : public DetectorBackend {
 public:
  explicit FileBackend(const std::filesystem::path& path);
  BackendInfo info() const override;
  std::vector<Detection> detect(const PatchInput& patch) const override;

 private:
  std::map<int64_t, std::vector<Detection>> by_patch_;
  bool strict_ = false;  // true when the file lists its covered patch ids
};

// Runs the backend over every patch of the patched dataset (images are
// patches, per slice_dataset). Output ordered by patch_id, then score
// descending.
std::vector<Detection> run_inference(const DatasetIndex& patched,
                                     const DetectorBackend& backend,
                                     int workers = 1);

// Detections file: {"patch_ids": [...], "detections": [...]}; records carry
// either patch_id (patch-local) or image_id (whole-image coordinates).
json detections_to_json(const std::vector<Detection>& dets,
                        const std::vector<int64_t>* covered_patch_ids);
std::vector<Detection> detections_from_json(const json& doc);
void save_detections(const std::vector<Detection>& dets,
                     const std::filesystem::path& path,
                     const std::vector<int64_t>* covered_patch_ids = nullptr);
std::vector<Detection> load_detections(const std::filesystem::path& path);

}  // namespace tiledet

#endif  // TILEDET_DETECTOR_HPP
