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

#include "tiledet/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tiledet {

namespace {

constexpr std::array<const char*, 3> kSplitNames = {"train", "val", "test"};

int bin_index(double value, const std::vector<double>& edges) {
  // Bins are [e0,e1), [e1,e2), ...; a value at an edge falls into the higher
  // bin; out-of-range values clamp to the end bins.
  int last = static_cast<int>(edges.size()) - 2;
  if (value < edges.front()) return 0;
  for (int i = 0; i < last; ++i) {
    if (value < edges[i + 1]) return i;
  }
  return last;
}

}  // namespace

std::string to_string(Split s) { return kSplitNames[static_cast<int>(s)]; }

Split split_from_string(const std::string& s) {
  for (int i = 0; i < 3; ++i) {
    if (s == kSplitNames[i]) return static_cast<Split>(i);
  }
  throw DataError("unknown split name: " + s);
}

void SplitSpec::validate() const {
  double sum = 0;
  for (double f : target_fractions) {
    if (!(f > 0)) throw ConfigError("split fractions must be positive");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }
  for (const auto* edges : {&depth_bins, &inclination_bins}) {
    if (edges->size() < 2) throw ConfigError("need at least two bin edges");
    if (!std::is_sorted(edges->begin(), edges->end(),
                        std::less_equal<double>())) {
      throw ConfigError("bin edges must be strictly increasing");
    }
  }
}

StratumKey stratum_key(const ImageRecord& img, const SplitSpec& spec) {
  return {img.meta.substrate, bin_index(img.meta.depth_m, spec.depth_bins),
          bin_index(img.meta.inclination_deg, spec.inclination_bins)};
}

SplitAssignment stratified_split(const DatasetIndex& ds, const SplitSpec& spec) {
  spec.validate();
  if (ds.images.size() < 3) {
    throw DataError("stratified split needs at least 3 images");
  }
  if (ds.annotations.empty()) {
    throw DataError("stratified split needs at least one annotation");
  }

  std::map<int, int64_t> ann_count;
  for (const auto& img : ds.images) ann_count[img.id] = 0;
  for (const auto& ann : ds.annotations) ann_count[ann.image_id]++;
  double total =
      static_cast<double>(std::accumulate(ds.annotations.begin(),
                                          ds.annotations.end(), int64_t{0},
                                          [](int64_t n, const Annotation&) {
                                            return n + 1;
                                          }));

  // Largest first, ties by image id.
  std::vector<const ImageRecord*> order;
  for (const auto& img : ds.images) order.push_back(&img);
  std::sort(order.begin(), order.end(),
            [&](const ImageRecord* a, const ImageRecord* b) {
              if (ann_count[a->id] != ann_count[b->id]) {
                return ann_count[a->id] > ann_count[b->id];
              }
              return a->id < b->id;
            });

  SplitAssignment result;
  std::array<double, 3> assigned = {0, 0, 0};
  std::map<StratumKey, std::array<double, 3>> stratum_assigned;
  for (const ImageRecord* img : order) {
    StratumKey key = stratum_key(*img, spec);
    auto& stratum = stratum_assigned[key];
    double stratum_total = stratum[0] + stratum[1] + stratum[2];

    int best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < 3; ++s) {
      double deficit = spec.target_fractions[s] - assigned[s] / total;
      double over = 0;
      if (stratum_total > 0) {
        over = std::max(0.0,
                        stratum[s] / stratum_total - spec.target_fractions[s]);
      }
      double score = deficit - spec.stratum_penalty * over;
      if (score > best_score + 1e-12) {
        best_score = score;
        best = s;
      }
    }
    result.by_image[img->id] = static_cast<Split>(best);
    double count = static_cast<double>(ann_count[img->id]);
    assigned[best] += count;
    stratum[best] += count;
  }

  for (int s = 0; s < 3; ++s) {
    result.achieved_fractions[s] = assigned[s] / total;
  }
  for (const auto& img : ds.images) {
    StratumKey key = stratum_key(img, spec);
    result.stratum_occupancy[key]
        [static_cast<int>(result.by_image.at(img.id))]++;
  }
  return result;
}

SplitReport validate_split(const DatasetIndex& ds, const SplitAssignment& a) {
  SplitReport report;
  for (const auto& img : ds.images) {
    auto it = a.by_image.find(img.id);
    if (it == a.by_image.end()) {
      throw DataError("image " + std::to_string(img.id) +
                      " is not assigned to any split");
    }
    report.image_counts[static_cast<int>(it->second)]++;
  }
  for (const auto& cat : ds.categories.entries) {
    report.per_class[cat.id] = {0, 0, 0};
  }
  int64_t total = 0;
  for (const auto& ann : ds.annotations) {
    int s = static_cast<int>(a.by_image.at(ann.image_id));
    report.annotation_counts[s]++;
    report.per_class[ann.category_id][s]++;
    total++;
  }
  for (int s = 0; s < 3; ++s) {
    report.achieved_fractions[s] =
        total > 0 ? static_cast<double>(report.annotation_counts[s]) /
                        static_cast<double>(total)
                  : 0.0;
  }
  for (const auto& [cat_id, counts] : report.per_class) {
    int64_t class_total = counts[0] + counts[1] + counts[2];
    if (class_total > 0 && counts[0] == 0) {
      report.classes_missing_from_train.push_back(cat_id);
    }
  }
  return report;
}

DatasetIndex subset_for_split(const DatasetIndex& ds, const SplitAssignment& a,
                              Split split) {
  DatasetIndex out;
  out.categories = ds.categories;
  out.extra = ds.extra;
  for (const auto& img : ds.images) {
    if (a.by_image.at(img.id) == split) out.images.push_back(img);
  }
  for (const auto& ann : ds.annotations) {
    if (a.by_image.at(ann.image_id) == split) out.annotations.push_back(ann);
  }
  return out;
}

json split_to_json(const SplitAssignment& a, const SplitReport& report) {
  json splits;
  for (int s = 0; s < 3; ++s) {
    json ids = json::array();
    for (const auto& [image_id, split] : a.by_image) {
      if (static_cast<int>(split) == s) ids.push_back(image_id);
    }
    splits[kSplitNames[s]] = std::move(ids);
  }
  json per_class = json::array();
  for (const auto& [cat_id, counts] : report.per_class) {
    per_class.push_back({{"category_id", cat_id},
                         {"train", counts[0]},
                         {"val", counts[1]},
                         {"test", counts[2]}});
  }
  return json{
      {"splits", std::move(splits)},
      {"achieved_fractions",
       {{"train", report.achieved_fractions[0]},
        {"val", report.achieved_fractions[1]},
        {"test", report.achieved_fractions[2]}}},
      {"annotation_counts",
       {{"train", report.annotation_counts[0]},
        {"val", report.annotation_counts[1]},
        {"test", report.annotation_counts[2]}}},
      {"per_class", std::move(per_class)},
      {"classes_missing_from_train", report.classes_missing_from_train}};
}

SplitAssignment split_from_json(const json& doc) {
  SplitAssignment a;
  const json& splits = doc.at("splits");
  for (int s = 0; s < 3; ++s) {
    for (const auto& id : splits.at(kSplitNames[s])) {
      a.by_image[id.get<int>()] = static_cast<Split>(s);
    }
  }
  if (doc.contains("achieved_fractions")) {
    const json& f = doc.at("achieved_fractions");
    a.achieved_fractions = {f.at("train").get<double>(),
                            f.at("val").get<double>(),
                            f.at("test").get<double>()};
  }
  return a;
}

}  // namespace tiledet
