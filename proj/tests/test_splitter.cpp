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

#include <doctest.h>

#include <cmath>

#include "tiledet/rng.hpp"
#include "tiledet/splitter.hpp"

using namespace tiledet;

namespace {

DatasetIndex counted_dataset(const std::vector<int>& ann_counts) {
  DatasetIndex ds;
  ds.categories.entries = {{1, "alpha", false, json::object()}};
  int64_t next_ann = 1;
  for (size_t i = 0; i < ann_counts.size(); ++i) {
    ImageRecord img;
    img.id = static_cast<int>(i) + 1;
    img.file_name = "img.png";
    img.width = 1000;
    img.height = 1000;
    ds.images.push_back(img);
    for (int k = 0; k < ann_counts[i]; ++k) {
      Annotation ann;
      ann.id = next_ann++;
      ann.image_id = img.id;
      ann.category_id = 1;
      ann.bbox = BBox(0, 0, 10, 10);
      ds.annotations.push_back(ann);
    }
  }
  return ds;
}

double l1_error(const std::array<double, 3>& achieved,
                const std::array<double, 3>& target) {
  return std::abs(achieved[0] - target[0]) + std::abs(achieved[1] - target[1]) +
         std::abs(achieved[2] - target[2]);
}

}  // namespace

TEST_CASE("split spec validation") {
  SplitSpec spec;
  spec.validate();
  spec.target_fractions = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = SplitSpec{};
  spec.depth_bins = {500};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = SplitSpec{};
  spec.inclination_bins = {10, 10, 45};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("stratum key binning") {
  SplitSpec spec;  // depth {400,500,1000,2500}, inclination {0,10,45,90}
  ImageRecord img;
  img.meta.substrate = Substrate::soft;

  img.meta.depth_m = 450;
  img.meta.inclination_deg = 5;
  CHECK(stratum_key(img, spec) == StratumKey{Substrate::soft, 0, 0});

  // A value sitting exactly on an edge falls into the higher bin.
  img.meta.depth_m = 500;
  img.meta.inclination_deg = 10;
  CHECK(stratum_key(img, spec) == StratumKey{Substrate::soft, 1, 1});

  // Out-of-range values clamp to the end bins.
  img.meta.depth_m = 120;
  img.meta.inclination_deg = 95;
  CHECK(stratum_key(img, spec) == StratumKey{Substrate::soft, 0, 2});
  img.meta.depth_m = 9000;
  CHECK(std::get<1>(stratum_key(img, spec)) == 2);

  img.meta.substrate = Substrate::hard;
  CHECK(std::get<0>(stratum_key(img, spec)) == Substrate::hard);
}

TEST_CASE("three images matching the targets split exactly") {
  DatasetIndex ds = counted_dataset({70, 19, 11});
  SplitSpec spec;
  spec.target_fractions = {0.70, 0.19, 0.11};
  SplitAssignment a = stratified_split(ds, spec);

  // Exhaustive oracle: the 27 possible assignments have a unique optimum.
  double best_err = 1e9;
  std::array<int, 3> best{};
  std::array<int, 3> counts = {70, 19, 11};
  for (int s0 = 0; s0 < 3; ++s0) {
    for (int s1 = 0; s1 < 3; ++s1) {
      for (int s2 = 0; s2 < 3; ++s2) {
        std::array<double, 3> frac = {0, 0, 0};
        std::array<int, 3> pick = {s0, s1, s2};
        for (int i = 0; i < 3; ++i) frac[pick[i]] += counts[i] / 100.0;
        double err = l1_error(frac, spec.target_fractions);
        if (err < best_err) {
          best_err = err;
          best = pick;
        }
      }
    }
  }
  CHECK(best_err == doctest::Approx(0.0));
  CHECK(static_cast<int>(a.by_image.at(1)) == best[0]);
  CHECK(static_cast<int>(a.by_image.at(2)) == best[1]);
  CHECK(static_cast<int>(a.by_image.at(3)) == best[2]);
  CHECK(a.achieved_fractions[0] == doctest::Approx(0.70));
  CHECK(a.achieved_fractions[1] == doctest::Approx(0.19));
  CHECK(a.achieved_fractions[2] == doctest::Approx(0.11));
}

TEST_CASE("equal-sized images land near the targets") {
  DatasetIndex ds = counted_dataset(std::vector<int>(20, 10));
  SplitSpec spec;
  SplitAssignment a = stratified_split(ds, spec);
  SplitReport r = validate_split(ds, a);
  // 20 equal images, granularity 0.05: within one image of the target.
  CHECK(std::abs(r.achieved_fractions[0] - 0.6871) <= 0.05 + 1e-9);
  CHECK(std::abs(r.achieved_fractions[1] - 0.1893) <= 0.05 + 1e-9);
  CHECK(std::abs(r.achieved_fractions[2] - 0.1236) <= 0.05 + 1e-9);
  CHECK(r.image_counts[0] + r.image_counts[1] + r.image_counts[2] == 20);
}

TEST_CASE("split is a partition and deterministic") {
  Rng rng(11);
  std::vector<int> counts;
  for (int i = 0; i < 60; ++i) {
    counts.push_back(static_cast<int>(rng.uniform_int(1, 80)));
  }
  DatasetIndex ds = counted_dataset(counts);
  // Vary strata so the penalty term is exercised.
  for (auto& img : ds.images) {
    img.meta.substrate =
        img.id % 2 == 0 ? Substrate::hard : Substrate::soft;
    img.meta.depth_m = 300.0 + 40.0 * (img.id % 50);
    img.meta.inclination_deg = static_cast<double>(img.id % 90);
  }
  SplitSpec spec;
  SplitAssignment a = stratified_split(ds, spec);
  SplitAssignment b = stratified_split(ds, spec);
  CHECK(a.by_image == b.by_image);

  CHECK(a.by_image.size() == ds.images.size());
  for (const auto& img : ds.images) {
    CHECK(a.by_image.count(img.id) == 1);
  }
  SplitReport r = validate_split(ds, a);
  CHECK(r.annotation_counts[0] + r.annotation_counts[1] +
            r.annotation_counts[2] ==
        static_cast<int64_t>(ds.annotations.size()));
  // Whole images move as a unit, so fractions track targets loosely.
  CHECK(std::abs(r.achieved_fractions[0] - 0.6871) < 0.05);
  CHECK(std::abs(r.achieved_fractions[1] - 0.1893) < 0.05);
  CHECK(std::abs(r.achieved_fractions[2] - 0.1236) < 0.05);
}

TEST_CASE("validate_split flags classes missing from train") {
  DatasetIndex ds = counted_dataset({10, 5, 3});
  ds.categories.entries.push_back({2, "beta", false, json::object()});
  // One beta annotation on whatever image ends up outside train.
  SplitAssignment a = stratified_split(ds, SplitSpec{});
  int non_train_image = 0;
  for (const auto& [id, split] : a.by_image) {
    if (split != Split::train) non_train_image = id;
  }
  REQUIRE(non_train_image != 0);
  Annotation ann;
  ann.id = 999;
  ann.image_id = non_train_image;
  ann.category_id = 2;
  ann.bbox = BBox(0, 0, 5, 5);
  ds.annotations.push_back(ann);

  SplitReport r = validate_split(ds, a);
  CHECK(r.classes_missing_from_train == std::vector<int>{2});

  a.by_image.erase(1);
  CHECK_THROWS_AS(validate_split(ds, a), DataError);
}

TEST_CASE("subset_for_split restricts images and annotations") {
  DatasetIndex ds = counted_dataset({30, 10, 5, 20, 8});
  SplitAssignment a = stratified_split(ds, SplitSpec{});
  size_t total_imgs = 0, total_anns = 0;
  for (Split s : {Split::train, Split::val, Split::test}) {
    DatasetIndex sub = subset_for_split(ds, a, s);
    sub.validate();
    total_imgs += sub.images.size();
    total_anns += sub.annotations.size();
    for (const auto& img : sub.images) CHECK(a.by_image.at(img.id) == s);
  }
  CHECK(total_imgs == ds.images.size());
  CHECK(total_anns == ds.annotations.size());
}

TEST_CASE("split json round-trip") {
  DatasetIndex ds = counted_dataset({12, 7, 4, 9});
  SplitAssignment a = stratified_split(ds, SplitSpec{});
  SplitReport r = validate_split(ds, a);
  json doc = split_to_json(a, r);
  SplitAssignment back = split_from_json(doc);
  CHECK(back.by_image == a.by_image);
  CHECK(doc.at("annotation_counts").at("train").get<int64_t>() ==
        r.annotation_counts[0]);
}

TEST_CASE("split error paths") {
  DatasetIndex ds = counted_dataset({5, 5});
  CHECK_THROWS_AS(stratified_split(ds, SplitSpec{}), DataError);
  DatasetIndex empty = counted_dataset({0, 0, 0});
  CHECK_THROWS_AS(stratified_split(empty, SplitSpec{}), DataError);
}
