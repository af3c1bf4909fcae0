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

#ifndef TILEDET_EVALUATOR_HPP
#define TILEDET_EVALUATOR_HPP

#include <map>
#include <optional>
#include <vector>

#include "tiledet/dataset.hpp"

namespace tiledet {

struct EvalConfig {
  std::vector<double> iou_thresholds = {0.50, 0.55, 0.60, 0.65, 0.70,
                                        0.75, 0.80, 0.85, 0.90, 0.95};
  // COCO size-bucket edges in px^2: small < 1024, medium [1024, 9216),
  // large >= 9216, measured on GT areas in full-image pixels.
  double small_max_area = 1024;
  double medium_max_area = 9216;
  // WSBD images hold up to ~1700 objects, so the cap defaults well above
  // COCO's 100.
  int max_dets_per_image = 2000;
  std::optional<std::vector<int>> class_subset;
  double confusion_confidence = 0.60;

  void validate() const;
};

// Greedy per-class matching for one image at one IoU threshold.
// det_to_gt[i] is the matched GT index or -1; detections beyond max_dets are
// marked -2 (not considered).
struct Matching {
  std::vector<int> det_to_gt;
  std::vector<bool> gt_matched;
};

Matching match_detections(const std::vector<BBox>& gt,
                          const std::vector<BBox>& dets_by_score, double iou_t,
                          int max_dets);

// One scored detection outcome pooled across images for a single class and
// threshold. Ignored detections (matched to out-of-bucket GT) are skipped
// before pooling.
struct ScoredOutcome {
  double score = 0;
  bool is_tp = false;
};

// 101-point interpolated AP. n_gt == 0 with no outcomes has no defined AP;
// callers exclude such classes from the mean.
double average_precision(std::vector<ScoredOutcome> outcomes, int64_t n_gt);

struct ConfusionMatrix {
  // Row/column i < K is class_order[i]; index K is the background row
  // (unmatched detections) and the missed column (unmatched GT).
  std::vector<int> class_order;  // by descending GT abundance
  std::vector<std::vector<int64_t>> counts;  // (K+1) x (K+1)
};

struct ClassCounts {
  int64_t tp = 0;
  int64_t fp = 0;
  int64_t fn = 0;
};

struct EvalReport {
  double map_50_95 = 0;
  double map_50 = 0;
  // -1 marks "no GT in bucket anywhere"; JSON renders that as null.
  double map_50_small = -1;
  double map_50_medium = -1;
  double map_50_large = -1;
  std::map<int, double> per_class_ap_50;
  std::map<int, double> per_class_ap_50_95;
  std::map<int, ClassCounts> counts_at_50;  // TP/FP/FN at IoU 0.50
  ConfusionMatrix confusion;
};

EvalReport coco_map(const DatasetIndex& gt_ds,
                    const std::map<int, std::vector<Detection>>& dets_by_image,
                    const EvalConfig& cfg);

ConfusionMatrix confusion_matrix(
    const DatasetIndex& gt_ds,
    const std::map<int, std::vector<Detection>>& dets_by_image,
    const EvalConfig& cfg);

json eval_report_to_json(const EvalReport& r, const CategoryTable& categories);
std::string format_eval_report(const EvalReport& r,
                               const CategoryTable& categories);

}  // namespace tiledet

#endif  // TILEDET_EVALUATOR_HPP
