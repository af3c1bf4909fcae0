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

#ifndef TILEDET_SPLITTER_HPP
#define TILEDET_SPLITTER_HPP

#include <array>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "tiledet/dataset.hpp"

namespace tiledet {

enum class Split { train = 0, val = 1, test = 2 };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct SplitSpec {
  std::array<double, 3> target_fractions = {0.6871, 0.1893, 0.1236};
  std::vector<double> depth_bins = {400, 500, 1000, 2500};      // metres
  std::vector<double> inclination_bins = {0, 10, 45, 90};       // degrees
  // Weight of the stratum over-representation penalty in the greedy score.
  double stratum_penalty = 0.25;
  uint64_t seed = 0;

  void validate() const;
};

// (substrate, depth bin, inclination bin); values at a bin edge fall into the
// higher bin, values outside the outermost edges clamp to the end bins.
using StratumKey = std::tuple<Substrate, int, int>;

struct SplitAssignment {
  std::map<int, Split> by_image;
  std::array<double, 3> achieved_fractions = {0, 0, 0};  // by annotation count
  std::map<StratumKey, std::array<int, 3>> stratum_occupancy;
};

struct SplitReport {
  std::array<double, 3> achieved_fractions = {0, 0, 0};
  std::array<int64_t, 3> annotation_counts = {0, 0, 0};
  std::array<int64_t, 3> image_counts = {0, 0, 0};
  // category id -> per-split annotation counts
  std::map<int, std::array<int64_t, 3>> per_class;
  std::vector<int> classes_missing_from_train;
};

StratumKey stratum_key(const ImageRecord& img, const SplitSpec& spec);

// Greedy largest-first assignment of whole images to splits, targeting
// annotation-count fractions with a stratum balance penalty.
SplitAssignment stratified_split(const DatasetIndex& ds, const SplitSpec& spec);

SplitReport validate_split(const DatasetIndex& ds, const SplitAssignment& a);

// Dataset restricted to one split's images (annotation/image ids unchanged).
DatasetIndex subset_for_split(const DatasetIndex& ds, const SplitAssignment& a,
                              Split split);

json split_to_json(const SplitAssignment& a, const SplitReport& report);
SplitAssignment split_from_json(const json& doc);

}  // namespace tiledet

#endif  // TILEDET_SPLITTER_HPP
