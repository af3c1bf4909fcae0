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

#include <iostream>

#include <CLI11.hpp>

#include "tiledet/coco.hpp"
#include "tiledet/pipeline.hpp"
#include "tiledet/raster.hpp"
#include "tiledet/render.hpp"
#include "tiledet/synth.hpp"

namespace td = tiledet;
using json = td::json;

namespace {

// Shared flag bundle; pipeline-level config file values are overridden by
// any explicitly passed flags.
struct Options {
  std::string config_path;
  std::string dataset;
  std::string images_dir;
  std::string out;
  std::string split_path;
  std::string manifest_path;
  std::string detections_path;
  std::string image_path;

  td::PipelineConfig cfg;

  // synth
  td::SynthSpec synth;
  bool synth_render = false;

  std::string backend = "oracle";
  std::string strategy = "none";
  std::string mode = "nmm";
  std::string score_model = "constant_1";
  bool subset10 = false;
  double render_threshold = 0.60;
};

td::PipelineConfig resolve_config(const Options& opt) {
  td::PipelineConfig cfg = opt.cfg;
  if (!opt.config_path.empty()) {
    td::PipelineConfig from_file =
        td::pipeline_config_from_json(td::read_json_file(opt.config_path));
    // File supplies defaults; explicit flags (already copied into opt.cfg by
    // CLI11 callbacks) win. Simplest merge: start from file, then overlay the
    // few path-ish flags that were set.
    from_file.workers = cfg.workers;
    if (!opt.dataset.empty()) from_file.dataset_path = opt.dataset;
    if (!opt.images_dir.empty()) from_file.images_dir = opt.images_dir;
    if (!opt.out.empty()) from_file.output_dir = opt.out;
    if (cfg.seed != 0) from_file.seed = cfg.seed;
    return from_file;
  }
  if (!opt.dataset.empty()) cfg.dataset_path = opt.dataset;
  if (!opt.images_dir.empty()) cfg.images_dir = opt.images_dir;
  if (!opt.out.empty()) cfg.output_dir = opt.out;
  return cfg;
}

int cmd_synth(const Options& opt) {
  td::SynthSpec spec = opt.synth;
  td::DatasetIndex ds = td::synth_dataset(spec);
  std::filesystem::path out = opt.out.empty() ? "synth" : opt.out;
  td::save_coco(ds, out / "dataset.json");
  if (opt.synth_render) {
    td::synth_render_images(ds, spec, out / "images");
  }
  std::cout << "wrote " << ds.images.size() << " images, "
            << ds.annotations.size() << " annotations to " << out.string()
            << "\n";
  return 0;
}

int cmd_report(const Options& opt) {
  td::DatasetIndex ds = td::load_coco(opt.dataset);
  td::DatasetReport report = td::dataset_report(ds);
  json doc = td::report_to_json(report);
  if (!opt.out.empty()) {
    td::write_json_file(doc, opt.out);
  }
  std::cout << doc.dump(2) << "\n";
  return 0;
}

int cmd_split(const Options& opt) {
  td::PipelineConfig cfg = resolve_config(opt);
  td::DatasetIndex ds = td::load_coco(cfg.dataset_path);
  td::SplitSpec spec = cfg.split;
  spec.seed = cfg.seed;
  td::SplitAssignment assignment = td::stratified_split(ds, spec);
  td::SplitReport report = td::validate_split(ds, assignment);
  json doc = td::split_to_json(assignment, report);
  td::write_json_file(doc, opt.out.empty() ? "split.json" : opt.out);
  std::cout << "train/val/test fractions: " << report.achieved_fractions[0]
            << " / " << report.achieved_fractions[1] << " / "
            << report.achieved_fractions[2] << "\n";
  return 0;
}

int cmd_slice(const Options& opt) {
  td::PipelineConfig cfg = resolve_config(opt);
  td::DatasetIndex ds = td::load_coco(cfg.dataset_path);
  std::filesystem::path out = cfg.output_dir.empty() ? "slices" : cfg.output_dir;

  auto emit = [&](const td::DatasetIndex& subset,
                  const std::filesystem::path& dir) {
    td::SliceResult result = td::slice_dataset(subset, cfg.slice);
    td::save_coco(result.patched, dir / "patched.json");
    td::write_json_file(td::manifest_to_json(result.manifest),
                        dir / "manifest.json");
    if (!cfg.images_dir.empty()) {
      td::materialize_patches(subset, result.manifest, cfg.images_dir,
                              dir / "patches", cfg.workers);
    }
    std::cout << dir.string() << ": " << result.manifest.patches.size()
              << " patches\n";
  };

  if (!opt.split_path.empty()) {
    td::SplitAssignment assignment =
        td::split_from_json(td::read_json_file(opt.split_path));
    for (int s = 0; s < 3; ++s) {
      td::Split split = static_cast<td::Split>(s);
      emit(td::subset_for_split(ds, assignment, split), out / to_string(split));
    }
  } else {
    emit(ds, out);
  }
  return 0;
}

int cmd_augment(const Options& opt) {
  td::PipelineConfig cfg = resolve_config(opt);
  if (cfg.images_dir.empty()) {
    throw td::ConfigError("augment requires --images (patch rasters)");
  }
  td::AugmentationSpec spec = cfg.augment;
  spec.strategy = td::strategy_from_string(opt.strategy);
  spec.seed = cfg.seed;
  td::DatasetIndex patched = td::load_coco(cfg.dataset_path);
  std::filesystem::path out = cfg.output_dir.empty() ? "augmented" : cfg.output_dir;

  td::DatasetIndex aug_ds;
  aug_ds.categories = patched.categories;
  auto by_image = patched.annotations_by_image();
  int64_t next_ann = 1;
  for (const auto& img : patched.images) {
    cv::Mat raster = td::load_raster(cfg.images_dir / img.file_name);
    std::vector<td::Annotation> boxes;
    for (const td::Annotation* ann : by_image[img.id]) boxes.push_back(*ann);
    td::AugmentedPatch result = td::apply_strategy(raster, boxes, spec, img.id);
    td::ImageRecord out_img = img;
    out_img.width = result.raster.cols;
    out_img.height = result.raster.rows;
    out_img.file_name = std::filesystem::path(img.file_name).stem().string() +
                        "_s" + std::to_string(spec.seed) + ".png";
    td::save_raster(result.raster, out / "patches" / out_img.file_name);
    for (td::Annotation& ann : result.boxes) {
      ann.id = next_ann++;
      ann.image_id = out_img.id;
      aug_ds.annotations.push_back(ann);
    }
    aug_ds.images.push_back(std::move(out_img));
  }
  td::save_coco(aug_ds, out / "patched.json");
  std::cout << "augmented " << aug_ds.images.size() << " patches\n";
  return 0;
}

int cmd_infer(const Options& opt) {
  td::PipelineConfig cfg = resolve_config(opt);
  td::DatasetIndex patched = td::load_coco(cfg.dataset_path);
  std::unique_ptr<td::DetectorBackend> backend;
  if (opt.backend == "file") {
    if (opt.detections_path.empty()) {
      throw td::ConfigError("file backend requires --detections");
    }
    backend = std::make_unique<td::FileBackend>(opt.detections_path);
  } else if (opt.backend == "oracle") {
    td::OracleConfig oracle = cfg.oracle;
    oracle.seed = cfg.seed;
    backend = std::make_unique<td::OracleBackend>(oracle, patched.categories);
  } else {
    throw td::ConfigError("unknown backend: " + opt.backend);
  }
  auto dets = td::run_inference(patched, *backend, cfg.workers);
  std::vector<int64_t> covered;
  for (const auto& img : patched.images) covered.push_back(img.id);
  td::save_detections(dets, opt.out.empty() ? "detections.json" : opt.out,
                      &covered);
  std::cout << dets.size() << " detections\n";
  return 0;
}

int cmd_merge(const Options& opt) {
  td::PipelineConfig cfg = resolve_config(opt);
  cfg.postprocess.mode = td::postprocess_mode_from_string(opt.mode);
  td::DatasetIndex ds = td::load_coco(cfg.dataset_path);
  td::PatchManifest manifest =
      td::manifest_from_json(td::read_json_file(opt.manifest_path));
  auto dets = td::load_detections(opt.detections_path);
  auto merged = td::postprocess_pipeline(dets, manifest, ds, cfg.postprocess);
  std::vector<td::Detection> flat;
  for (const auto& [image_id, image_dets] : merged) {
    for (const auto& det : image_dets) flat.push_back(det);
  }
  td::save_detections(flat, opt.out.empty() ? "merged.json" : opt.out);
  std::cout << flat.size() << " detections after " << opt.mode << "\n";
  return 0;
}

int cmd_eval(const Options& opt) {
  td::PipelineConfig cfg = resolve_config(opt);
  td::DatasetIndex gt = td::load_coco(cfg.dataset_path);
  auto dets = td::load_detections(opt.detections_path);
  std::map<int, std::vector<td::Detection>> by_image;
  for (auto& det : dets) {
    if (!det.image_id) {
      throw td::DataError("eval requires whole-image detections (image_id)");
    }
    by_image[*det.image_id].push_back(std::move(det));
  }
  td::EvalConfig eval_cfg = cfg.eval;
  if (opt.subset10) eval_cfg.class_subset = gt.categories.subset_ids();
  td::EvalReport report = td::coco_map(gt, by_image, eval_cfg);
  if (!opt.out.empty()) {
    td::write_json_file(td::eval_report_to_json(report, gt.categories),
                        opt.out);
  }
  std::cout << td::format_eval_report(report, gt.categories);
  return 0;
}

int cmd_render(const Options& opt) {
  td::DatasetIndex ds = td::load_coco(opt.dataset);
  auto dets = td::load_detections(opt.detections_path);
  cv::Mat image = td::load_raster(opt.image_path);

  // Detections for the image whose file name matches the given raster.
  std::string stem = std::filesystem::path(opt.image_path).filename().string();
  std::optional<int> image_id;
  for (const auto& img : ds.images) {
    if (img.file_name == stem) image_id = img.id;
  }
  std::vector<td::Detection> selected;
  for (const auto& det : dets) {
    if (det.image_id && image_id && *det.image_id == *image_id) {
      selected.push_back(det);
    }
  }
  cv::Mat annotated = td::render_detections(image, selected, ds.categories,
                                            opt.render_threshold);
  td::save_raster(annotated, opt.out.empty() ? "rendered.png" : opt.out);
  std::cout << "drew " << selected.size() << " detections\n";
  return 0;
}

int cmd_pipeline(const Options& opt) {
  td::PipelineConfig cfg = resolve_config(opt);
  td::EvalReport report = td::run_pipeline(cfg);
  std::cout << td::format_eval_report(report, td::load_coco(cfg.dataset_path).categories);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Resolution-preserving tiled object detection toolkit"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "pipeline config file");
    sub->add_option("--dataset", opt.dataset, "COCO dataset file");
    sub->add_option("--images", opt.images_dir, "image directory");
    sub->add_option("--out", opt.out, "output path");
    sub->add_option("--seed", opt.cfg.seed, "global seed");
    sub->add_option("--workers", opt.cfg.workers, "worker count");
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  add_common(synth);
  synth->add_option("--count", opt.synth.image_count, "image count");
  synth->add_option("--min-width", opt.synth.min_width, "");
  synth->add_option("--max-width", opt.synth.max_width, "");
  synth->add_option("--min-height", opt.synth.min_height, "");
  synth->add_option("--max-height", opt.synth.max_height, "");
  synth->add_option("--objects", opt.synth.objects_per_image, "objects/image");
  synth->add_option("--classes", opt.synth.num_classes, "class count");
  synth->add_option("--min-side", opt.synth.min_side, "");
  synth->add_option("--max-side", opt.synth.max_side, "");
  synth->add_option("--small-fraction", opt.synth.small_fraction, "");
  synth->add_option("--synth-seed", opt.synth.seed, "generator seed");
  synth->add_flag("--render", opt.synth_render, "also write rasters");

  auto* report = app.add_subcommand("report", "per-class dataset statistics");
  add_common(report);

  auto* split = app.add_subcommand("split", "stratified train/val/test split");
  add_common(split);

  auto* slice = app.add_subcommand("slice", "overlapping patch slicing");
  add_common(slice);
  slice->add_option("--split", opt.split_path, "split file (emit per split)");
  slice->add_option("--patch-w", opt.cfg.slice.patch_w, "");
  slice->add_option("--patch-h", opt.cfg.slice.patch_h, "");
  slice->add_option("--overlap", opt.cfg.slice.overlap, "");
  slice->add_option("--min-visibility", opt.cfg.slice.min_visibility, "");

  auto* augment = app.add_subcommand("augment", "materialize augmented patches");
  add_common(augment);
  augment->add_option("--strategy", opt.strategy, "none|pixel|spatial|both");

  auto* infer = app.add_subcommand("infer", "run a detector backend");
  add_common(infer);
  infer->add_option("--backend", opt.backend, "oracle|file");
  infer->add_option("--detections", opt.detections_path, "replay file");
  infer->add_option("--drop-rate", opt.cfg.oracle.drop_rate, "");
  infer->add_option("--jitter-px", opt.cfg.oracle.jitter_px, "");
  infer->add_option("--confusion-rate", opt.cfg.oracle.confusion_rate, "");

  auto* merge = app.add_subcommand("merge", "reproject and postprocess");
  add_common(merge);
  merge->add_option("--detections", opt.detections_path, "patch detections")
      ->required();
  merge->add_option("--manifest", opt.manifest_path, "patch manifest")
      ->required();
  merge->add_option("--mode", opt.mode, "nmm|nms|none");
  merge->add_option("--iou", opt.cfg.postprocess.iou_threshold, "");

  auto* evalc = app.add_subcommand("eval", "COCO-style evaluation");
  add_common(evalc);
  evalc->add_option("--detections", opt.detections_path, "merged detections")
      ->required();
  evalc->add_flag("--subset10", opt.subset10, "10-class subset evaluation");
  evalc->add_option("--confusion-confidence",
                    opt.cfg.eval.confusion_confidence, "");

  auto* render = app.add_subcommand("render", "draw detections on an image");
  add_common(render);
  render->add_option("--image", opt.image_path, "input raster")->required();
  render->add_option("--detections", opt.detections_path, "")->required();
  render->add_option("--threshold", opt.render_threshold, "");

  auto* pipeline = app.add_subcommand("pipeline", "full framework run");
  add_common(pipeline);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return cmd_synth(opt);
    if (report->parsed()) return cmd_report(opt);
    if (split->parsed()) return cmd_split(opt);
    if (slice->parsed()) return cmd_slice(opt);
    if (augment->parsed()) return cmd_augment(opt);
    if (infer->parsed()) return cmd_infer(opt);
    if (merge->parsed()) return cmd_merge(opt);
    if (evalc->parsed()) return cmd_eval(opt);
    if (render->parsed()) return cmd_render(opt);
    if (pipeline->parsed()) return cmd_pipeline(opt);
  } catch (const td::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
