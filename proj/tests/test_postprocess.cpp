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

#include <algorithm>

#include "tiledet/postprocess.hpp"
#include "tiledet/rng.hpp"

using namespace tiledet;

namespace {

Detection det(BBox b, double score, int cat = 1,
              std::optional<int64_t> patch = std::nullopt) {
  Detection d;
  d.bbox = b;
  d.score = score;
  d.category_id = cat;
  d.patch_id = patch;
  return d;
}

// Deterministic comparison key shared by the oracle and the checks below.
bool det_less(const Detection& a, const Detection& b) {
  auto key = [](const Detection& d) {
    return std::make_tuple(-d.score, d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h,
                           d.category_id);
  };
  return key(a) < key(b);
}

bool same_dets(std::vector<Detection> a, std::vector<Detection> b) {
  if (a.size() != b.size()) return false;
  std::sort(a.begin(), a.end(), det_less);
  std::sort(b.begin(), b.end(), det_less);
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].bbox != b[i].bbox || a[i].score != b[i].score ||
        a[i].category_id != b[i].category_id) {
      return false;
    }
  }
  return true;
}

// Independent coding of the specified merge: anchors in deterministic order,
// forward absorption passes over the remaining pool until a pass is clean.
// Absorption order matters (IoU against a growing hull is not monotonic), so
// the oracle follows the same specified order on a different data structure.
std::vector<Detection> brute_nmm(std::vector<Detection> pool,
                                 const PostprocessConfig& cfg) {
  std::sort(pool.begin(), pool.end(), det_less);
  std::vector<Detection> out;
  while (!pool.empty()) {
    Detection anchor = pool.front();
    pool.erase(pool.begin());
    bool changed = true;
    while (changed) {
      changed = false;
      for (size_t i = 0; i < pool.size();) {
        bool class_ok =
            cfg.class_agnostic || pool[i].category_id == anchor.category_id;
        if (class_ok && iou(anchor.bbox, pool[i].bbox) >= cfg.iou_threshold) {
          anchor.bbox = union_box(anchor.bbox, pool[i].bbox);
          anchor.score = std::max(anchor.score, pool[i].score);
          pool.erase(pool.begin() + i);
          changed = true;
        } else {
          ++i;
        }
      }
    }
    out.push_back(anchor);
  }
  return out;
}

std::vector<Detection> random_instance(Rng& rng, int n) {
  std::vector<Detection> dets;
  for (int i = 0; i < n; ++i) {
    double w = rng.uniform(5.0, 120.0);
    double h = rng.uniform(5.0, 120.0);
    double x = rng.uniform(0.0, 300.0);
    double y = rng.uniform(0.0, 300.0);
    int cat = static_cast<int>(rng.uniform_int(1, 3));
    // Coarse score grid provokes ties on purpose.
    double score = rng.uniform_int(1, 10) / 10.0;
    dets.push_back(det(BBox(x, y, w, h), score, cat));
  }
  return dets;
}

}  // namespace

TEST_CASE("nmm merge examples") {
  PostprocessConfig cfg;
  cfg.iou_threshold = 0.2;

  SUBCASE("single detection passes through") {
    auto out = nmm_merge({det(BBox(0, 0, 10, 10), 0.8)}, cfg);
    REQUIRE(out.size() == 1);
    CHECK(out[0].bbox == BBox(0, 0, 10, 10));
    CHECK(out[0].score == 0.8);
  }
  SUBCASE("overlapping same-class boxes merge to the union with max score") {
    auto out = nmm_merge({det(BBox(0, 0, 10, 10), 0.9),
                          det(BBox(5, 0, 10, 10), 0.7)},
                         cfg);
    REQUIRE(out.size() == 1);
    CHECK(out[0].bbox == BBox(0, 0, 15, 10));
    CHECK(out[0].score == 0.9);
  }
  SUBCASE("different classes never merge") {
    auto out = nmm_merge({det(BBox(0, 0, 10, 10), 0.9, 1),
                          det(BBox(0, 0, 10, 10), 0.7, 2)},
                         cfg);
    CHECK(out.size() == 2);
  }
  SUBCASE("class-agnostic mode merges across classes") {
    cfg.class_agnostic = true;
    auto out = nmm_merge({det(BBox(0, 0, 10, 10), 0.9, 1),
                          det(BBox(0, 0, 10, 10), 0.7, 2)},
                         cfg);
    REQUIRE(out.size() == 1);
    CHECK(out[0].category_id == 1);  // anchor's class wins
  }
  SUBCASE("hull growth can absorb a box the anchor alone would miss") {
    // IoU(a, c) is only 10/190; c joins because the hull grows after a
    // absorbs b.
    auto out = nmm_merge({det(BBox(0, 0, 100, 100), 0.9),
                          det(BBox(60, 0, 100, 100), 0.8),
                          det(BBox(90, 0, 100, 100), 0.7)},
                         cfg);
    REQUIRE(out.size() == 1);
    CHECK(out[0].bbox == BBox(0, 0, 190, 100));
    CHECK(out[0].score == 0.9);
  }
  SUBCASE("below-threshold neighbours stay separate") {
    cfg.iou_threshold = 0.5;
    auto out = nmm_merge({det(BBox(0, 0, 10, 10), 0.9),
                          det(BBox(8, 0, 10, 10), 0.8)},
                         cfg);
    CHECK(out.size() == 2);
  }
}

TEST_CASE("fragment chains") {
  PostprocessConfig cfg;
  cfg.iou_threshold = 0.2;

  SUBCASE("densely overlapping chain collapses to one box") {
    std::vector<Detection> frags;
    for (int i = 0; i < 12; ++i) {
      frags.push_back(det(BBox(10.0 * i, 0, 400, 400), 0.9 - 0.01 * i));
    }
    auto out = nmm_merge(frags, cfg);
    REQUIRE(out.size() == 1);
    CHECK(out[0].bbox == BBox(0, 0, 510, 400));
    CHECK(out[0].score == 0.9);
  }
  SUBCASE("a sub-threshold gap splits the chain in two") {
    std::vector<Detection> frags;
    for (int i = 0; i < 6; ++i) {
      frags.push_back(det(BBox(10.0 * i, 0, 400, 400), 0.9 - 0.01 * i));
    }
    for (int i = 0; i < 6; ++i) {
      frags.push_back(det(BBox(2000 + 10.0 * i, 0, 400, 400), 0.8 - 0.01 * i));
    }
    auto out = nmm_merge(frags, cfg);
    REQUIRE(out.size() == 2);
  }
}

TEST_CASE("nms examples") {
  PostprocessConfig cfg;
  cfg.mode = PostprocessMode::nms;
  cfg.iou_threshold = 0.5;

  auto out = nms_suppress({det(BBox(0, 0, 10, 10), 0.9),
                           det(BBox(1, 0, 10, 10), 0.8),
                           det(BBox(100, 100, 10, 10), 0.7)},
                          cfg);
  REQUIRE(out.size() == 2);
  // Survivors are untouched originals.
  CHECK(out[0].bbox == BBox(0, 0, 10, 10));
  CHECK(out[0].score == 0.9);
  CHECK(out[1].bbox == BBox(100, 100, 10, 10));

  // Per-class by default: an identical box of another class survives.
  auto cross = nms_suppress({det(BBox(0, 0, 10, 10), 0.9, 1),
                             det(BBox(0, 0, 10, 10), 0.8, 2)},
                            cfg);
  CHECK(cross.size() == 2);
}

TEST_CASE("nmm agrees with the exhaustive oracle on random instances") {
  Rng rng(2024);
  for (int trial = 0; trial < 150; ++trial) {
    auto dets = random_instance(rng, static_cast<int>(rng.uniform_int(0, 20)));
    PostprocessConfig cfg;
    cfg.iou_threshold = 0.05 + 0.05 * static_cast<double>(rng.uniform_int(0, 9));
    cfg.class_agnostic = rng.bernoulli(0.3);
    auto fast = nmm_merge(dets, cfg);
    auto slow = brute_nmm(dets, cfg);
    REQUIRE(same_dets(fast, slow));
  }
}

TEST_CASE("nmm structural properties on random instances") {
  Rng rng(515);
  for (int trial = 0; trial < 80; ++trial) {
    auto dets = random_instance(rng, static_cast<int>(rng.uniform_int(1, 25)));
    PostprocessConfig cfg;
    cfg.iou_threshold = 0.2;
    auto merged = nmm_merge(dets, cfg);

    CHECK(merged.size() <= dets.size());
    CHECK(!merged.empty());

    // A second pass only ever merges further, never splits or invents boxes.
    CHECK(nmm_merge(merged, cfg).size() <= merged.size());

    // Soundness: every input is covered by an output of its class with a
    // score at least as high.
    for (const auto& d : dets) {
      bool covered = false;
      for (const auto& m : merged) {
        if (m.category_id == d.category_id && m.score >= d.score &&
            intersection_area(m.bbox, d.bbox) ==
                doctest::Approx(d.bbox.area())) {
          covered = true;
          break;
        }
      }
      CHECK(covered);
    }

    // Output scores are input scores, never invented.
    for (const auto& m : merged) {
      bool found = false;
      for (const auto& d : dets) {
        if (d.score == m.score && d.category_id == m.category_id) found = true;
      }
      CHECK(found);
    }
  }
}

TEST_CASE("nms keeps the highest-scored box of each cluster") {
  Rng rng(808);
  for (int trial = 0; trial < 80; ++trial) {
    auto dets = random_instance(rng, static_cast<int>(rng.uniform_int(1, 25)));
    PostprocessConfig cfg;
    cfg.mode = PostprocessMode::nms;
    cfg.iou_threshold = 0.5;
    auto kept = nms_suppress(dets, cfg);
    CHECK(!kept.empty());
    CHECK(kept.size() <= dets.size());
    // Survivors are verbatim inputs and pairwise below the threshold
    // within a class.
    for (size_t i = 0; i < kept.size(); ++i) {
      bool verbatim = false;
      for (const auto& d : dets) {
        if (d.bbox == kept[i].bbox && d.score == kept[i].score &&
            d.category_id == kept[i].category_id) {
          verbatim = true;
        }
      }
      CHECK(verbatim);
      for (size_t j = i + 1; j < kept.size(); ++j) {
        if (kept[i].category_id == kept[j].category_id) {
          CHECK(iou(kept[i].bbox, kept[j].bbox) < cfg.iou_threshold);
        }
      }
    }
  }
}

TEST_CASE("reproject translates and clamps patch-local detections") {
  DatasetIndex ds;
  ds.categories.entries = {{1, "alpha", false, json::object()}};
  ImageRecord img;
  img.id = 3;
  img.file_name = "parent.png";
  img.width = 1000;
  img.height = 800;
  ds.images.push_back(img);

  PatchManifest manifest;
  PatchRecord rec;
  rec.patch_id = 11;
  rec.parent_image_id = 3;
  rec.origin_x = 500;
  rec.origin_y = 300;
  rec.width = 500;
  rec.height = 500;
  manifest.patches.push_back(rec);

  std::vector<Detection> dets = {det(BBox(10, 20, 30, 40), 0.9, 1, 11)};
  auto out = reproject(dets, manifest, ds);
  REQUIRE(out.size() == 1);
  CHECK(out[0].bbox == BBox(510, 320, 30, 40));
  CHECK_FALSE(out[0].patch_id.has_value());
  CHECK(out[0].image_id == 3);

  SUBCASE("boxes poking past the parent edge are clamped") {
    std::vector<Detection> edge = {det(BBox(480, 490, 30, 20), 0.5, 1, 11)};
    auto clamped = reproject(edge, manifest, ds);
    REQUIRE(clamped.size() == 1);
    CHECK(clamped[0].bbox.x == 980);
    CHECK(clamped[0].bbox.x2() == doctest::Approx(1000));
    CHECK(clamped[0].bbox.y2() == doctest::Approx(800));
  }
  SUBCASE("whole-image detections pass through") {
    Detection whole = det(BBox(1, 2, 3, 4), 0.4);
    whole.image_id = 3;
    auto passed = reproject({whole}, manifest, ds);
    CHECK(passed[0].bbox == BBox(1, 2, 3, 4));
    CHECK(passed[0].image_id == 3);
  }
  SUBCASE("unknown patch id is an error") {
    std::vector<Detection> bad = {det(BBox(0, 0, 5, 5), 0.5, 1, 999)};
    CHECK_THROWS_AS(reproject(bad, manifest, ds), DataError);
  }
}

TEST_CASE("postprocess_pipeline groups by parent and mode none only reprojects") {
  DatasetIndex ds;
  ds.categories.entries = {{1, "alpha", false, json::object()}};
  for (int id : {1, 2}) {
    ImageRecord img;
    img.id = id;
    img.file_name = "p.png";
    img.width = 1000;
    img.height = 1000;
    ds.images.push_back(img);
  }
  PatchManifest manifest;
  for (int64_t pid = 1; pid <= 4; ++pid) {
    PatchRecord rec;
    rec.patch_id = pid;
    rec.parent_image_id = pid <= 2 ? 1 : 2;
    rec.origin_x = pid % 2 == 1 ? 0.0 : 250.0;
    rec.origin_y = 0;
    rec.width = 500;
    rec.height = 500;
    manifest.patches.push_back(rec);
  }
  std::vector<Detection> dets = {
      det(BBox(260, 10, 50, 50), 0.9, 1, 1),
      det(BBox(10, 10, 50, 50), 0.8, 1, 2),  // same spot after reprojection
      det(BBox(100, 100, 40, 40), 0.7, 1, 3),
  };

  PostprocessConfig cfg;
  cfg.mode = PostprocessMode::none;
  auto by_image = postprocess_pipeline(dets, manifest, ds, cfg);
  CHECK(by_image[1].size() == 2);  // mode none preserves every detection
  CHECK(by_image[2].size() == 1);

  cfg.mode = PostprocessMode::nmm;
  auto merged = postprocess_pipeline(dets, manifest, ds, cfg);
  CHECK(merged[1].size() == 1);  // duplicates across patches collapse
  CHECK(merged[2].size() == 1);
  CHECK(merged[1][0].bbox == BBox(260, 10, 50, 50));
}

TEST_CASE("postprocess config validation and names") {
  PostprocessConfig cfg;
  cfg.validate();
  cfg.iou_threshold = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK(postprocess_mode_from_string("nmm") == PostprocessMode::nmm);
  CHECK(postprocess_mode_from_string("none") == PostprocessMode::none);
  CHECK_THROWS_AS(postprocess_mode_from_string("soft"), ConfigError);
  CHECK(to_string(PostprocessMode::nms) == "nms");
}
