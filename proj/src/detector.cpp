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

#include "tiledet/detector.hpp"

#include <algorithm>
#include <atomic>
#include <future>

#include "tiledet/coco.hpp"

namespace tiledet {

void OracleConfig::validate() const {
  if (drop_rate < 0 || drop_rate > 1) {
    throw ConfigError("drop_rate must be in [0, 1]");
  }
  if (confusion_rate < 0 || confusion_rate > 1) {
    throw ConfigError("confusion_rate must be in [0, 1]");
  }
  if (jitter_px < 0) throw ConfigError("jitter_px must be >= 0");
}

OracleBackend::OracleBackend(OracleConfig cfg, CategoryTable categories)
    : cfg_(cfg) {
  cfg_.validate();
  for (const auto& c : categories.entries) category_ids_.push_back(c.id);
  if (category_ids_.empty()) {
    throw ConfigError("oracle backend needs a category table");
  }
}

BackendInfo OracleBackend::info() const { return {"oracle", true}; }

std::vector<Detection> OracleBackend::detect(const PatchInput& patch) const {
  Rng rng(derive_seed(cfg_.seed, static_cast<uint64_t>(patch.patch_id)));
  std::vector<Detection> dets;
  for (const auto& ann : patch.annotations) {
    bool dropped = rng.bernoulli(cfg_.drop_rate);
    double dx1 = rng.uniform(-cfg_.jitter_px, cfg_.jitter_px);
    double dy1 = rng.uniform(-cfg_.jitter_px, cfg_.jitter_px);
    double dx2 = rng.uniform(-cfg_.jitter_px, cfg_.jitter_px);
    double dy2 = rng.uniform(-cfg_.jitter_px, cfg_.jitter_px);
    bool confused = rng.bernoulli(cfg_.confusion_rate);
    int64_t relabel_pick = rng.uniform_int(0, 1'000'000);
    // All draws happen unconditionally so each truth box consumes a fixed
    // slice of the stream regardless of the flags above.
    if (dropped) continue;

    double x1 = std::max(0.0, ann.bbox.x + dx1);
    double y1 = std::max(0.0, ann.bbox.y + dy1);
    double x2 = std::min(patch.width, ann.bbox.x2() + dx2);
    double y2 = std::min(patch.height, ann.bbox.y2() + dy2);
    if (x2 - x1 < 1e-3) x2 = std::min(patch.width, x1 + 1e-3);
    if (y2 - y1 < 1e-3) y2 = std::min(patch.height, y1 + 1e-3);

    Detection det;
    det.bbox = BBox(x1, y1, x2 - x1, y2 - y1);
    det.category_id = ann.category_id;
    if (confused && category_ids_.size() > 1) {
      int pick = static_cast<int>(
          relabel_pick % static_cast<int64_t>(category_ids_.size() - 1));
      for (int id : category_ids_) {
        if (id == ann.category_id) continue;
        if (pick-- == 0) {
          det.category_id = id;
          break;
        }
      }
    }
    det.score = cfg_.score_model == ScoreModel::constant_1
                    ? 1.0
                    : iou(det.bbox, ann.bbox);
    det.patch_id = patch.patch_id;
    dets.push_back(std::move(det));
  }
  return dets;
}

FileBackend::FileBackend(const std::filesystem::path& path) {
  json doc = read_json_file(path);
  for (auto& det : detections_from_json(doc)) {
    if (!det.patch_id) {
      throw DataError("file backend requires patch-local detections");
    }
    by_patch_[*det.patch_id].push_back(std::move(det));
  }
  if (doc.is_object() && doc.contains("patch_ids")) {
    strict_ = true;
    for (const auto& id : doc.at("patch_ids")) {
      by_patch_[id.get<int64_t>()];  // present, possibly empty
    }
  }
}

BackendInfo FileBackend::info() const { return {"file", true}; }

std::vector<Detection> FileBackend::detect(const PatchInput& patch) const {
  auto it = by_patch_.find(patch.patch_id);
  if (it == by_patch_.end()) {
    if (strict_) {
      throw DataError("no detections recorded for patch " +
                      std::to_string(patch.patch_id));
    }
    return {};
  }
  return it->second;
}

std::vector<Detection> run_inference(const DatasetIndex& patched,
                                     const DetectorBackend& backend,
                                     int workers) {
  auto by_image = patched.annotations_by_image();
  std::vector<PatchInput> inputs;
  for (const auto& img : patched.images) {
    PatchInput in;
    in.patch_id = img.id;
    in.width = img.width;
    in.height = img.height;
    for (const Annotation* ann : by_image[img.id]) {
      in.annotations.push_back(*ann);
    }
    inputs.push_back(std::move(in));
  }
  std::sort(inputs.begin(), inputs.end(),
            [](const PatchInput& a, const PatchInput& b) {
              return a.patch_id < b.patch_id;
            });

  std::vector<std::vector<Detection>> per_patch(inputs.size());
  auto run_one = [&](size_t i) {
    try {
      per_patch[i] = backend.detect(inputs[i]);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw DataError("backend failed on patch " +
                      std::to_string(inputs[i].patch_id) + ": " + e.what());
    }
  };

  if (workers <= 1 || !backend.info().thread_safe) {
    for (size_t i = 0; i < inputs.size(); ++i) run_one(i);
  } else {
    std::atomic<size_t> cursor{0};
    std::vector<std::future<void>> tasks;
    for (int t = 0; t < workers; ++t) {
      tasks.push_back(std::async(std::launch::async, [&]() {
        for (size_t i = cursor++; i < inputs.size(); i = cursor++) run_one(i);
      }));
    }
    for (auto& task : tasks) task.get();
  }

  std::vector<Detection> out;
  for (size_t i = 0; i < inputs.size(); ++i) {
    auto& dets = per_patch[i];
    std::stable_sort(dets.begin(), dets.end(),
                     [](const Detection& a, const Detection& b) {
                       return a.score > b.score;
                     });
    for (auto& det : dets) out.push_back(std::move(det));
  }
  return out;
}

json detections_to_json(const std::vector<Detection>& dets,
                        const std::vector<int64_t>* covered_patch_ids) {
  json records = json::array();
  for (const auto& det : dets) {
    json j;
    if (det.patch_id) j["patch_id"] = *det.patch_id;
    if (det.image_id) j["image_id"] = *det.image_id;
    j["category_id"] = det.category_id;
    j["bbox"] = {det.bbox.x, det.bbox.y, det.bbox.w, det.bbox.h};
    j["score"] = det.score;
    records.push_back(std::move(j));
  }
  json doc{{"detections", std::move(records)}};
  if (covered_patch_ids) doc["patch_ids"] = *covered_patch_ids;
  return doc;
}

std::vector<Detection> detections_from_json(const json& doc) {
  const json* records = nullptr;
  if (doc.is_array()) {
    records = &doc;
  } else if (doc.is_object() && doc.contains("detections")) {
    records = &doc.at("detections");
  } else {
    throw DataError("detections document must be an array or contain one");
  }
  std::vector<Detection> dets;
  for (const auto& j : *records) {
    Detection det;
    if (j.contains("patch_id")) det.patch_id = j.at("patch_id").get<int64_t>();
    if (j.contains("image_id")) det.image_id = j.at("image_id").get<int>();
    det.category_id = j.at("category_id").get<int>();
    const json& box = j.at("bbox");
    det.bbox = BBox(box[0].get<double>(), box[1].get<double>(),
                    box[2].get<double>(), box[3].get<double>());
    det.score = j.at("score").get<double>();
    if (det.score < 0 || det.score > 1) {
      throw DataError("detection score outside [0, 1]");
    }
    dets.push_back(std::move(det));
  }
  return dets;
}

void save_detections(const std::vector<Detection>& dets,
                     const std::filesystem::path& path,
                     const std::vector<int64_t>* covered_patch_ids) {
  write_json_file(detections_to_json(dets, covered_patch_ids), path);
}

std::vector<Detection> load_detections(const std::filesystem::path& path) {
  return detections_from_json(read_json_file(path));
}

}  // namespace tiledet
