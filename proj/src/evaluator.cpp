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

#include "tiledet/evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_set>

namespace tiledet {

namespace {

struct ImageEntry {
  std::vector<const Annotation*> gt;
  std::vector<const Detection*> dets;  // score desc, stable
};

// Per (class) data pooled over images, for one evaluation pass.
struct ClassData {
  std::map<int, ImageEntry> by_image;
  int64_t gt_total = 0;
};

bool in_bucket(double area, double lo, double hi) {
  return area >= lo && area < hi;
}

}  // namespace

void EvalConfig::validate() const {
  if (iou_thresholds.empty()) throw ConfigError("need at least one threshold");
  double prev = 0;
  for (double t : iou_thresholds) {
    if (!(t > 0) || t > 1 || t <= prev) {
      throw ConfigError("iou_thresholds must be strictly increasing in (0,1]");
    }
    prev = t;
  }
  if (max_dets_per_image <= 0) throw ConfigError("max_dets must be positive");
}

Matching match_detections(const std::vector<BBox>& gt,
                          const std::vector<BBox>& dets_by_score, double iou_t,
                          int max_dets) {
  Matching m;
  m.det_to_gt.assign(dets_by_score.size(), -1);
  m.gt_matched.assign(gt.size(), false);
  for (size_t d = 0; d < dets_by_score.size(); ++d) {
    if (d >= static_cast<size_t>(max_dets)) {
      m.det_to_gt[d] = -2;
      continue;
    }
    double best_iou = iou_t;
    int best_gt = -1;
    for (size_t g = 0; g < gt.size(); ++g) {
      if (m.gt_matched[g]) continue;
      double v = iou(dets_by_score[d], gt[g]);
      if (v >= best_iou) {
        best_iou = v;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0) {
      m.det_to_gt[d] = best_gt;
      m.gt_matched[best_gt] = true;
    }
  }
  return m;
}

double average_precision(std::vector<ScoredOutcome> outcomes, int64_t n_gt) {
  if (n_gt == 0) return 0.0;  // only called with detections present
  std::stable_sort(outcomes.begin(), outcomes.end(),
                   [](const ScoredOutcome& a, const ScoredOutcome& b) {
                     return a.score > b.score;
                   });
  std::vector<double> precision, recall;
  int64_t tp = 0, fp = 0;
  for (const auto& o : outcomes) {
    o.is_tp ? ++tp : ++fp;
    precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(n_gt));
  }
  // Envelope: max precision to the right.
  for (int i = static_cast<int>(precision.size()) - 2; i >= 0; --i) {
    precision[i] = std::max(precision[i], precision[i + 1]);
  }
  double sum = 0;
  size_t idx = 0;
  for (int k = 0; k <= 100; ++k) {
    double r = k / 100.0;
    while (idx < recall.size() && recall[idx] < r - 1e-12) ++idx;
    if (idx < recall.size()) sum += precision[idx];
  }
  return sum / 101.0;
}

namespace {

// AP for one class at one threshold, optionally restricted to a GT area
// bucket. Detections matched to out-of-bucket GT are ignored (neither TP nor
// FP); matching itself always runs against the full GT set.
// Returns nullopt when the class has no GT in the bucket and no outcomes.
std::optional<double> class_ap(const ClassData& data, double iou_t,
                               int max_dets, double area_lo, double area_hi) {
  std::vector<ScoredOutcome> outcomes;
  int64_t n_gt = 0;
  for (const auto& [image_id, entry] : data.by_image) {
    std::vector<BBox> gt_boxes, det_boxes;
    for (const auto* ann : entry.gt) gt_boxes.push_back(ann->bbox);
    for (const auto* det : entry.dets) det_boxes.push_back(det->bbox);
    for (const auto& b : gt_boxes) {
      if (in_bucket(b.area(), area_lo, area_hi)) ++n_gt;
    }
    Matching m = match_detections(gt_boxes, det_boxes, iou_t, max_dets);
    for (size_t d = 0; d < det_boxes.size(); ++d) {
      if (m.det_to_gt[d] == -2) continue;
      if (m.det_to_gt[d] >= 0) {
        if (!in_bucket(gt_boxes[m.det_to_gt[d]].area(), area_lo, area_hi)) {
          continue;  // matched out-of-bucket: ignored
        }
        outcomes.push_back({entry.dets[d]->score, true});
      } else {
        outcomes.push_back({entry.dets[d]->score, false});
      }
    }
  }
  if (n_gt == 0 && outcomes.empty()) return std::nullopt;
  if (n_gt == 0) return 0.0;
  return average_precision(std::move(outcomes), n_gt);
}

}  // namespace

EvalReport coco_map(const DatasetIndex& gt_ds,
                    const std::map<int, std::vector<Detection>>& dets_by_image,
                    const EvalConfig& cfg) {
  cfg.validate();
  gt_ds.validate();

  std::set<int> subset;
  if (cfg.class_subset) {
    subset.insert(cfg.class_subset->begin(), cfg.class_subset->end());
  }
  auto class_included = [&](int cat_id) {
    return !cfg.class_subset || subset.count(cat_id) > 0;
  };

  std::set<int> image_ids;
  for (const auto& img : gt_ds.images) image_ids.insert(img.id);

  std::map<int, ClassData> per_class;
  for (const auto& cat : gt_ds.categories.entries) {
    if (class_included(cat.id)) per_class[cat.id];
  }
  for (const auto& ann : gt_ds.annotations) {
    if (!class_included(ann.category_id)) continue;
    auto& data = per_class.at(ann.category_id);
    data.by_image[ann.image_id].gt.push_back(&ann);
    data.gt_total++;
  }
  for (const auto& [image_id, dets] : dets_by_image) {
    if (image_ids.find(image_id) == image_ids.end()) {
      throw DataError("detections reference unknown image " +
                      std::to_string(image_id));
    }
    for (const auto& det : dets) {
      if (!class_included(det.category_id)) continue;
      auto it = per_class.find(det.category_id);
      if (it == per_class.end()) {
        throw DataError("detection references unknown category " +
                        std::to_string(det.category_id));
      }
      it->second.by_image[image_id].dets.push_back(&det);
    }
  }
  const double inf = std::numeric_limits<double>::infinity();
  for (auto& [cat_id, data] : per_class) {
    for (auto& [image_id, entry] : data.by_image) {
      std::stable_sort(entry.dets.begin(), entry.dets.end(),
                       [](const Detection* a, const Detection* b) {
                         return a->score > b->score;
                       });
    }
  }

  EvalReport report;
  double sum_all = 0, sum_50 = 0;
  int64_t n_all = 0, n_50 = 0;
  for (const auto& [cat_id, data] : per_class) {
    double class_sum = 0;
    int64_t class_n = 0;
    for (double t : cfg.iou_thresholds) {
      auto ap = class_ap(data, t, cfg.max_dets_per_image, 0, inf);
      if (!ap) continue;
      class_sum += *ap;
      class_n++;
      sum_all += *ap;
      n_all++;
      if (std::abs(t - 0.5) < 1e-9) {
        report.per_class_ap_50[cat_id] = *ap;
        sum_50 += *ap;
        n_50++;
      }
    }
    if (class_n > 0) {
      report.per_class_ap_50_95[cat_id] = class_sum / class_n;
    }
  }
  report.map_50_95 = n_all > 0 ? sum_all / n_all : 0.0;
  report.map_50 = n_50 > 0 ? sum_50 / n_50 : 0.0;

  const double buckets[3][2] = {{0, cfg.small_max_area},
                                {cfg.small_max_area, cfg.medium_max_area},
                                {cfg.medium_max_area, inf}};
  double* targets[3] = {&report.map_50_small, &report.map_50_medium,
                        &report.map_50_large};
  for (int b = 0; b < 3; ++b) {
    double sum = 0;
    int64_t n = 0;
    for (const auto& [cat_id, data] : per_class) {
      auto ap = class_ap(data, 0.5, cfg.max_dets_per_image, buckets[b][0],
                         buckets[b][1]);
      if (ap) {
        sum += *ap;
        n++;
      }
    }
    *targets[b] = n > 0 ? sum / n : -1;
  }

  // TP/FP/FN at IoU 0.50 (all scores considered).
  for (const auto& [cat_id, data] : per_class) {
    ClassCounts counts;
    for (const auto& [image_id, entry] : data.by_image) {
      std::vector<BBox> gt_boxes, det_boxes;
      for (const auto* ann : entry.gt) gt_boxes.push_back(ann->bbox);
      for (const auto* det : entry.dets) det_boxes.push_back(det->bbox);
      Matching m =
          match_detections(gt_boxes, det_boxes, 0.5, cfg.max_dets_per_image);
      for (int v : m.det_to_gt) {
        if (v >= 0) counts.tp++;
        else if (v == -1) counts.fp++;
      }
      for (bool matched : m.gt_matched) {
        if (!matched) counts.fn++;
      }
    }
    report.counts_at_50[cat_id] = counts;
  }

  report.confusion = confusion_matrix(gt_ds, dets_by_image, cfg);
  return report;
}

ConfusionMatrix confusion_matrix(
    const DatasetIndex& gt_ds,
    const std::map<int, std::vector<Detection>>& dets_by_image,
    const EvalConfig& cfg) {
  std::map<int, int64_t> abundance;
  for (const auto& cat : gt_ds.categories.entries) abundance[cat.id] = 0;
  for (const auto& ann : gt_ds.annotations) abundance[ann.category_id]++;

  ConfusionMatrix cm;
  for (const auto& [cat_id, count] : abundance) cm.class_order.push_back(cat_id);
  std::stable_sort(cm.class_order.begin(), cm.class_order.end(),
                   [&](int a, int b) {
                     if (abundance[a] != abundance[b]) {
                       return abundance[a] > abundance[b];
                     }
                     return a < b;
                   });
  size_t K = cm.class_order.size();
  cm.counts.assign(K + 1, std::vector<int64_t>(K + 1, 0));
  std::map<int, size_t> row_of;
  for (size_t i = 0; i < K; ++i) row_of[cm.class_order[i]] = i;

  auto by_image = gt_ds.annotations_by_image();
  for (const auto& img : gt_ds.images) {
    const auto& gt = by_image[img.id];
    std::vector<const Detection*> dets;
    if (auto it = dets_by_image.find(img.id); it != dets_by_image.end()) {
      for (const auto& det : it->second) {
        if (det.score >= cfg.confusion_confidence) dets.push_back(&det);
      }
    }
    std::stable_sort(dets.begin(), dets.end(),
                     [](const Detection* a, const Detection* b) {
                       return a->score > b->score;
                     });
    // Class-agnostic IoU >= 0.5 matching.
    std::vector<BBox> gt_boxes, det_boxes;
    for (const auto* ann : gt) gt_boxes.push_back(ann->bbox);
    for (const auto* det : dets) det_boxes.push_back(det->bbox);
    Matching m = match_detections(gt_boxes, det_boxes, 0.5,
                                  cfg.max_dets_per_image);
    for (size_t d = 0; d < dets.size(); ++d) {
      size_t col = row_of.at(dets[d]->category_id);
      if (m.det_to_gt[d] >= 0) {
        cm.counts[row_of.at(gt[m.det_to_gt[d]]->category_id)][col]++;
      } else if (m.det_to_gt[d] == -1) {
        cm.counts[K][col]++;  // background false positive
      }
    }
    for (size_t g = 0; g < gt.size(); ++g) {
      if (!m.gt_matched[g]) {
        cm.counts[row_of.at(gt[g]->category_id)][K]++;  // missed
      }
    }
  }
  return cm;
}

json eval_report_to_json(const EvalReport& r, const CategoryTable& categories) {
  auto bucket = [](double v) {
    return v < 0 ? json(nullptr) : json(v);
  };
  json per_class = json::array();
  for (const auto& cat : categories.entries) {
    json entry{{"category_id", cat.id}, {"name", cat.name}};
    if (auto it = r.per_class_ap_50.find(cat.id);
        it != r.per_class_ap_50.end()) {
      entry["ap_50"] = it->second;
    }
    if (auto it = r.per_class_ap_50_95.find(cat.id);
        it != r.per_class_ap_50_95.end()) {
      entry["ap_50_95"] = it->second;
    }
    if (auto it = r.counts_at_50.find(cat.id); it != r.counts_at_50.end()) {
      entry["tp"] = it->second.tp;
      entry["fp"] = it->second.fp;
      entry["fn"] = it->second.fn;
    }
    per_class.push_back(std::move(entry));
  }
  json confusion{{"class_order", r.confusion.class_order},
                 {"counts", r.confusion.counts}};
  return json{{"map_50_95", r.map_50_95},
              {"map_50", r.map_50},
              {"map_50_small", bucket(r.map_50_small)},
              {"map_50_medium", bucket(r.map_50_medium)},
              {"map_50_large", bucket(r.map_50_large)},
              {"per_class", std::move(per_class)},
              {"confusion", std::move(confusion)}};
}

std::string format_eval_report(const EvalReport& r,
                               const CategoryTable& categories) {
  std::ostringstream out;
  auto fmt = [](double v) {
    if (v < 0) return std::string("  n/a");
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return std::string(buf);
  };
  out << "mAP@0.5:0.95  " << fmt(r.map_50_95) << "\n";
  out << "mAP@0.5       " << fmt(r.map_50) << "\n";
  out << "mAP@0.5 (S)   " << fmt(r.map_50_small) << "\n";
  out << "mAP@0.5 (M)   " << fmt(r.map_50_medium) << "\n";
  out << "mAP@0.5 (L)   " << fmt(r.map_50_large) << "\n";
  out << "\nper-class AP:\n";
  for (const auto& cat : categories.entries) {
    auto it = r.per_class_ap_50_95.find(cat.id);
    if (it == r.per_class_ap_50_95.end()) continue;
    out << "  " << cat.name;
    for (size_t i = cat.name.size(); i < 34; ++i) out << ' ';
    out << fmt(it->second);
    if (auto it50 = r.per_class_ap_50.find(cat.id);
        it50 != r.per_class_ap_50.end()) {
      out << "  (@0.5 " << fmt(it50->second) << ")";
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace tiledet
