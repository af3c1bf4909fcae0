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

#include "tiledet/pipeline.hpp"

#include <fstream>

#include "tiledet/coco.hpp"
#include "tiledet/raster.hpp"

namespace tiledet {

namespace {

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback) {
  if (obj.is_object() && obj.contains(key)) return obj.at(key).get<T>();
  return fallback;
}

}  // namespace

void PipelineConfig::validate() const {
  if (dataset_path.empty()) throw ConfigError("dataset path is required");
  if (output_dir.empty()) throw ConfigError("output dir is required");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  slice.validate();
  split.validate();
  augment.validate();
  oracle.validate();
  postprocess.validate();
  eval.validate();
}

PipelineConfig pipeline_config_from_json(const json& doc) {
  PipelineConfig cfg;
  cfg.dataset_path = get_or<std::string>(doc, "dataset", "");
  cfg.images_dir = get_or<std::string>(doc, "images_dir", "");
  cfg.output_dir = get_or<std::string>(doc, "output_dir", "");
  cfg.detections_path = get_or<std::string>(doc, "detections", "");
  cfg.seed = get_or<uint64_t>(doc, "seed", 0);
  cfg.workers = get_or<int>(doc, "workers", 1);

  if (doc.contains("slice")) {
    const json& s = doc.at("slice");
    cfg.slice.patch_w = get_or<double>(s, "patch_w", cfg.slice.patch_w);
    cfg.slice.patch_h = get_or<double>(s, "patch_h", cfg.slice.patch_h);
    cfg.slice.overlap = get_or<double>(s, "overlap", cfg.slice.overlap);
    cfg.slice.min_visibility =
        get_or<double>(s, "min_visibility", cfg.slice.min_visibility);
  }
  if (doc.contains("split")) {
    const json& s = doc.at("split");
    if (s.contains("target_fractions")) {
      auto f = s.at("target_fractions").get<std::vector<double>>();
      if (f.size() != 3) throw ConfigError("target_fractions needs 3 values");
      cfg.split.target_fractions = {f[0], f[1], f[2]};
    }
    if (s.contains("depth_bins")) {
      cfg.split.depth_bins = s.at("depth_bins").get<std::vector<double>>();
    }
    if (s.contains("inclination_bins")) {
      cfg.split.inclination_bins =
          s.at("inclination_bins").get<std::vector<double>>();
    }
    cfg.split.stratum_penalty =
        get_or<double>(s, "stratum_penalty", cfg.split.stratum_penalty);
  }
  if (doc.contains("augment")) {
    const json& a = doc.at("augment");
    cfg.augment.strategy =
        strategy_from_string(get_or<std::string>(a, "strategy", "none"));
    cfg.augment.probability =
        get_or<double>(a, "probability", cfg.augment.probability);
    cfg.augment.crop_w = get_or<int>(a, "crop_w", 0);
    cfg.augment.crop_h = get_or<int>(a, "crop_h", 0);
  }
  if (doc.contains("oracle")) {
    const json& o = doc.at("oracle");
    cfg.oracle.drop_rate = get_or<double>(o, "drop_rate", 0.0);
    cfg.oracle.jitter_px = get_or<double>(o, "jitter_px", 0.0);
    cfg.oracle.confusion_rate = get_or<double>(o, "confusion_rate", 0.0);
    std::string sm = get_or<std::string>(o, "score_model", "constant_1");
    if (sm == "constant_1") {
      cfg.oracle.score_model = ScoreModel::constant_1;
    } else if (sm == "iou_with_truth") {
      cfg.oracle.score_model = ScoreModel::iou_with_truth;
    } else {
      throw ConfigError("unknown score_model: " + sm);
    }
  }
  if (doc.contains("postprocess")) {
    const json& p = doc.at("postprocess");
    cfg.postprocess.mode =
        postprocess_mode_from_string(get_or<std::string>(p, "mode", "nmm"));
    cfg.postprocess.iou_threshold =
        get_or<double>(p, "iou_threshold", cfg.postprocess.iou_threshold);
    cfg.postprocess.class_agnostic =
        get_or<bool>(p, "class_agnostic", false);
  }
  if (doc.contains("eval")) {
    const json& e = doc.at("eval");
    if (e.contains("iou_thresholds")) {
      cfg.eval.iou_thresholds =
          e.at("iou_thresholds").get<std::vector<double>>();
    }
    cfg.eval.max_dets_per_image =
        get_or<int>(e, "max_dets_per_image", cfg.eval.max_dets_per_image);
    cfg.eval.confusion_confidence =
        get_or<double>(e, "confusion_confidence", cfg.eval.confusion_confidence);
    if (e.contains("class_subset")) {
      cfg.eval.class_subset = e.at("class_subset").get<std::vector<int>>();
    }
  }
  return cfg;
}

json pipeline_config_to_json(const PipelineConfig& cfg) {
  json doc;
  doc["dataset"] = cfg.dataset_path.string();
  doc["images_dir"] = cfg.images_dir.string();
  doc["output_dir"] = cfg.output_dir.string();
  doc["detections"] = cfg.detections_path.string();
  doc["seed"] = cfg.seed;
  doc["workers"] = cfg.workers;
  doc["slice"] = {{"patch_w", cfg.slice.patch_w},
                  {"patch_h", cfg.slice.patch_h},
                  {"overlap", cfg.slice.overlap},
                  {"min_visibility", cfg.slice.min_visibility}};
  doc["split"] = {{"target_fractions",
                   {cfg.split.target_fractions[0], cfg.split.target_fractions[1],
                    cfg.split.target_fractions[2]}},
                  {"depth_bins", cfg.split.depth_bins},
                  {"inclination_bins", cfg.split.inclination_bins},
                  {"stratum_penalty", cfg.split.stratum_penalty}};
  doc["augment"] = {{"strategy", to_string(cfg.augment.strategy)},
                    {"probability", cfg.augment.probability},
                    {"crop_w", cfg.augment.crop_w},
                    {"crop_h", cfg.augment.crop_h}};
  doc["oracle"] = {{"drop_rate", cfg.oracle.drop_rate},
                   {"jitter_px", cfg.oracle.jitter_px},
                   {"confusion_rate", cfg.oracle.confusion_rate},
                   {"score_model", cfg.oracle.score_model == ScoreModel::constant_1
                                       ? "constant_1"
                                       : "iou_with_truth"}};
  doc["postprocess"] = {{"mode", to_string(cfg.postprocess.mode)},
                        {"iou_threshold", cfg.postprocess.iou_threshold},
                        {"class_agnostic", cfg.postprocess.class_agnostic}};
  doc["eval"] = {{"iou_thresholds", cfg.eval.iou_thresholds},
                 {"max_dets_per_image", cfg.eval.max_dets_per_image},
                 {"confusion_confidence", cfg.eval.confusion_confidence}};
  if (cfg.eval.class_subset) doc["eval"]["class_subset"] = *cfg.eval.class_subset;
  return doc;
}

uint64_t config_hash(const PipelineConfig& cfg) {
  std::string dump = pipeline_config_to_json(cfg).dump();
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

EvalReport run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  const auto& out = cfg.output_dir;
  std::filesystem::create_directories(out);

  // Worker count affects scheduling only and the output dir is run-local;
  // neither belongs in the provenance record, so reruns into different
  // directories with different parallelism produce identical artifacts.
  PipelineConfig canonical = cfg;
  canonical.workers = 1;
  canonical.output_dir.clear();
  json run_manifest{{"config_hash", config_hash(canonical)},
                    {"seed", cfg.seed}};
  write_json_file(pipeline_config_to_json(canonical),
                  out / "resolved_config.json");

  // split
  DatasetIndex ds = load_coco(cfg.dataset_path);
  SplitSpec split_spec = cfg.split;
  split_spec.seed = cfg.seed;
  SplitAssignment assignment = stratified_split(ds, split_spec);
  SplitReport split_report = validate_split(ds, assignment);
  write_json_file(split_to_json(assignment, split_report), out / "split.json");

  // slice, per split
  std::array<SliceResult, 3> sliced;
  for (int s = 0; s < 3; ++s) {
    Split split = static_cast<Split>(s);
    DatasetIndex subset = subset_for_split(ds, assignment, split);
    sliced[s] = slice_dataset(subset, cfg.slice);
    auto dir = out / "slices" / to_string(split);
    save_coco(sliced[s].patched, dir / "patched.json");
    write_json_file(manifest_to_json(sliced[s].manifest),
                    dir / "manifest.json");
    if (!cfg.images_dir.empty()) {
      materialize_patches(subset, sliced[s].manifest, cfg.images_dir,
                          dir / "patches", cfg.workers);
    }
  }

  // optional materialized augmentation of the training patches
  if (cfg.augment.strategy != AugmentStrategy::none && !cfg.images_dir.empty()) {
    AugmentationSpec aug = cfg.augment;
    aug.seed = cfg.seed;
    const SliceResult& train = sliced[0];
    auto patch_dir = out / "slices" / "train" / "patches";
    auto aug_dir = out / "augmented";
    DatasetIndex aug_ds;
    aug_ds.categories = train.patched.categories;
    auto by_image = train.patched.annotations_by_image();
    int64_t next_ann = 1;
    for (const auto& img : train.patched.images) {
      cv::Mat raster = load_raster(patch_dir / img.file_name);
      std::vector<Annotation> boxes;
      for (const Annotation* ann : by_image[img.id]) boxes.push_back(*ann);
      AugmentedPatch result = apply_strategy(raster, boxes, aug, img.id);
      ImageRecord out_img = img;
      out_img.width = result.raster.cols;
      out_img.height = result.raster.rows;
      out_img.file_name =
          std::filesystem::path(img.file_name).stem().string() + "_s" +
          std::to_string(aug.seed) + ".png";
      save_raster(result.raster, aug_dir / "patches" / out_img.file_name);
      for (Annotation& ann : result.boxes) {
        ann.id = next_ann++;
        ann.image_id = out_img.id;
        aug_ds.annotations.push_back(ann);
      }
      aug_ds.images.push_back(std::move(out_img));
    }
    save_coco(aug_ds, aug_dir / "patched.json");
  }

  // infer on the test split
  const SliceResult& test = sliced[2];
  std::unique_ptr<DetectorBackend> backend;
  if (!cfg.detections_path.empty()) {
    backend = std::make_unique<FileBackend>(cfg.detections_path);
  } else {
    OracleConfig oracle = cfg.oracle;
    oracle.seed = cfg.seed;
    backend = std::make_unique<OracleBackend>(oracle, ds.categories);
  }
  std::vector<Detection> patch_dets =
      run_inference(test.patched, *backend, cfg.workers);
  std::vector<int64_t> covered;
  for (const auto& img : test.patched.images) covered.push_back(img.id);
  save_detections(patch_dets, out / "detections" / "patch_detections.json",
                  &covered);

  // reproject + merge
  DatasetIndex test_gt = subset_for_split(ds, assignment, Split::test);
  auto merged =
      postprocess_pipeline(patch_dets, test.manifest, test_gt, cfg.postprocess);
  std::vector<Detection> merged_flat;
  for (const auto& [image_id, dets] : merged) {
    for (const auto& det : dets) merged_flat.push_back(det);
  }
  save_detections(merged_flat, out / "detections" / "merged.json");

  // evaluate against whole-image test ground truth
  EvalReport report = coco_map(test_gt, merged, cfg.eval);
  write_json_file(eval_report_to_json(report, ds.categories),
                  out / "eval" / "report.json");
  {
    auto path = out / "eval" / "report.txt";
    std::filesystem::create_directories(path.parent_path());
    std::ofstream txt(path);
    txt << format_eval_report(report, ds.categories);
  }
  write_json_file(run_manifest, out / "run_manifest.json");
  return report;
}

}  // namespace tiledet
