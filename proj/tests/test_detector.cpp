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

#include <filesystem>

#include "tiledet/detector.hpp"

using namespace tiledet;
namespace fs = std::filesystem;

namespace {

CategoryTable three_classes() {
  CategoryTable t;
  t.entries = {{1, "alpha", false, json::object()},
               {2, "beta", false, json::object()},
               {3, "gamma", false, json::object()}};
  return t;
}

PatchInput patch_with_boxes(int64_t patch_id,
                            const std::vector<BBox>& boxes, int cat = 1) {
  PatchInput in;
  in.patch_id = patch_id;
  in.width = 500;
  in.height = 500;
  int64_t next = 1;
  for (const BBox& b : boxes) {
    Annotation ann;
    ann.id = next++;
    ann.image_id = static_cast<int>(patch_id);
    ann.category_id = cat;
    ann.bbox = b;
    in.annotations.push_back(ann);
  }
  return in;
}

}  // namespace

TEST_CASE("identity oracle reproduces ground truth exactly") {
  OracleBackend oracle(OracleConfig{}, three_classes());
  PatchInput in = patch_with_boxes(
      5, {BBox(10, 20, 30, 40), BBox(200, 200, 50, 50)}, 2);
  auto dets = oracle.detect(in);
  REQUIRE(dets.size() == 2);
  for (size_t i = 0; i < dets.size(); ++i) {
    CHECK(dets[i].bbox == in.annotations[i].bbox);
    CHECK(dets[i].category_id == 2);
    CHECK(dets[i].score == 1.0);
    CHECK(dets[i].patch_id == 5);
  }
}

TEST_CASE("drop rate one yields no detections") {
  OracleConfig cfg;
  cfg.drop_rate = 1.0;
  OracleBackend oracle(cfg, three_classes());
  auto dets = oracle.detect(patch_with_boxes(1, {BBox(0, 0, 10, 10)}));
  CHECK(dets.empty());
}

TEST_CASE("jitter bound for 50x50 boxes") {
  OracleConfig cfg;
  cfg.jitter_px = 2.0;
  cfg.seed = 12;
  OracleBackend oracle(cfg, three_classes());

  // Analytic floor: every corner moves at most 2 px, so the worst box is
  // 46x46 against a 54x54 hull, IoU 2116/2916.
  double analytic = (46.0 * 46.0) / (54.0 * 54.0);
  double min_iou = 1.0;
  for (int64_t patch = 1; patch <= 50; ++patch) {
    std::vector<BBox> boxes;
    for (int k = 0; k < 4; ++k) {
      boxes.emplace_back(50.0 + 100.0 * k, 50.0 + 100.0 * (k % 2), 50, 50);
    }
    PatchInput in = patch_with_boxes(patch, boxes);
    auto dets = oracle.detect(in);
    REQUIRE(dets.size() == boxes.size());
    for (size_t i = 0; i < dets.size(); ++i) {
      double v = iou(dets[i].bbox, boxes[i]);
      CHECK(v >= analytic);
      min_iou = std::min(min_iou, v);
    }
  }
  // Uniform draws stay far from the analytic worst case; with this seed the
  // empirical floor is comfortably above 0.85.
  CHECK(min_iou >= 0.85);
}

TEST_CASE("iou score model reports overlap with the truth box") {
  OracleConfig cfg;
  cfg.jitter_px = 3.0;
  cfg.score_model = ScoreModel::iou_with_truth;
  OracleBackend oracle(cfg, three_classes());
  PatchInput in = patch_with_boxes(9, {BBox(100, 100, 60, 60)});
  auto dets = oracle.detect(in);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].score == doctest::Approx(iou(dets[0].bbox, in.annotations[0].bbox)));
  CHECK(dets[0].score < 1.0);
}

TEST_CASE("confusion rate one always relabels") {
  OracleConfig cfg;
  cfg.confusion_rate = 1.0;
  OracleBackend oracle(cfg, three_classes());
  for (int64_t patch = 1; patch <= 30; ++patch) {
    auto dets = oracle.detect(patch_with_boxes(patch, {BBox(5, 5, 20, 20)}, 2));
    REQUIRE(dets.size() == 1);
    CHECK(dets[0].category_id != 2);
    CHECK((dets[0].category_id == 1 || dets[0].category_id == 3));
  }
}

TEST_CASE("oracle output depends only on (seed, patch_id)") {
  OracleConfig cfg;
  cfg.jitter_px = 2.0;
  cfg.drop_rate = 0.3;
  cfg.seed = 77;
  OracleBackend oracle(cfg, three_classes());
  PatchInput in = patch_with_boxes(
      3, {BBox(10, 10, 40, 40), BBox(300, 300, 80, 80), BBox(90, 400, 30, 30)});
  auto a = oracle.detect(in);
  auto b = oracle.detect(in);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].bbox == b[i].bbox);
    CHECK(a[i].score == b[i].score);
  }
}

TEST_CASE("run_inference orders by patch id and is worker-invariant") {
  DatasetIndex patched;
  patched.categories = three_classes();
  for (int id : {4, 2, 9, 1}) {
    ImageRecord img;
    img.id = id;
    img.file_name = "p.png";
    img.width = 500;
    img.height = 500;
    patched.images.push_back(img);
    Annotation ann;
    ann.id = id * 10;
    ann.image_id = id;
    ann.category_id = 1;
    ann.bbox = BBox(10, 10, 50, 50);
    patched.annotations.push_back(ann);
    Annotation second = ann;
    second.id = id * 10 + 1;
    second.bbox = BBox(200, 200, 30, 30);
    patched.annotations.push_back(second);
  }
  OracleConfig cfg;
  cfg.jitter_px = 1.0;
  cfg.score_model = ScoreModel::iou_with_truth;
  OracleBackend oracle(cfg, three_classes());

  auto serial = run_inference(patched, oracle, 1);
  auto parallel = run_inference(patched, oracle, 4);
  REQUIRE(serial.size() == parallel.size());
  for (size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].bbox == parallel[i].bbox);
    CHECK(serial[i].patch_id == parallel[i].patch_id);
  }
  // Ordered by patch_id, then score descending inside a patch.
  for (size_t i = 0; i + 1 < serial.size(); ++i) {
    REQUIRE(serial[i].patch_id.has_value());
    if (*serial[i].patch_id == *serial[i + 1].patch_id) {
      CHECK(serial[i].score >= serial[i + 1].score);
    } else {
      CHECK(*serial[i].patch_id < *serial[i + 1].patch_id);
    }
  }
}

TEST_CASE("detections file round-trip") {
  fs::path dir = fs::temp_directory_path() / "tiledet_det_test";
  fs::create_directories(dir);
  fs::path path = dir / "dets.json";

  std::vector<Detection> dets;
  Detection d;
  d.bbox = BBox(1.5, 2.25, 10, 20);
  d.category_id = 2;
  d.score = 0.625;
  d.patch_id = 7;
  dets.push_back(d);
  d.bbox = BBox(100, 50, 5, 5);
  d.category_id = 1;
  d.score = 1.0;
  dets.push_back(d);

  std::vector<int64_t> covered = {7, 8};
  save_detections(dets, path, &covered);
  auto back = load_detections(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].bbox == dets[0].bbox);
  CHECK(back[0].score == 0.625);
  CHECK(back[0].patch_id == 7);

  SUBCASE("file backend replays recorded patches") {
    FileBackend fb(path);
    PatchInput in;
    in.patch_id = 7;
    auto replay = fb.detect(in);
    CHECK(replay.size() == 2);

    // Covered-but-empty patch is legal.
    in.patch_id = 8;
    CHECK(fb.detect(in).empty());

    // Uncovered patch is an error when the file lists its coverage.
    in.patch_id = 99;
    CHECK_THROWS_AS(fb.detect(in), DataError);
  }

  SUBCASE("bare arrays are lenient about coverage") {
    fs::path bare = dir / "bare.json";
    save_detections(dets, bare, nullptr);
    FileBackend fb(bare);
    PatchInput in;
    in.patch_id = 99;
    CHECK(fb.detect(in).empty());
  }

  fs::remove_all(dir);
}

TEST_CASE("detection parsing rejects bad scores") {
  json doc = json::parse(R"({"detections": [
    {"patch_id": 1, "category_id": 1, "bbox": [0, 0, 5, 5], "score": 1.5}
  ]})");
  CHECK_THROWS_AS(detections_from_json(doc), DataError);
}

TEST_CASE("oracle config validation") {
  OracleConfig cfg;
  cfg.drop_rate = 1.4;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = OracleConfig{};
  cfg.jitter_px = -1;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_THROWS_AS(OracleBackend(OracleConfig{}, CategoryTable{}), ConfigError);
}
