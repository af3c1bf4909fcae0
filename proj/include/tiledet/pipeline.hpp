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

#ifndef TILEDET_PIPELINE_HPP
#define TILEDET_PIPELINE_HPP

#include <filesystem>

#include "tiledet/augment.hpp"
#include "tiledet/detector.hpp"
#include "tiledet/evaluator.hpp"
#include "tiledet/postprocess.hpp"
#include "tiledet/slicer.hpp"
#include "tiledet/splitter.hpp"

namespace tiledet {

struct PipelineConfig {
  std::filesystem::path dataset_path;
  std::filesystem::path images_dir;  // empty: skip all pixel stages
  std::filesystem::path output_dir;

  SliceConfig slice;
  SplitSpec split;
  AugmentationSpec augment;
  OracleConfig oracle;
  std::filesystem::path detections_path;  // non-empty: file backend
  PostprocessConfig postprocess;
  EvalConfig eval;
  uint64_t seed = 0;
  int workers = 1;

  void validate() const;
};

PipelineConfig pipeline_config_from_json(const json& doc);
json pipeline_config_to_json(const PipelineConfig& cfg);

// FNV-1a over the canonical JSON dump; recorded in the run manifest.
uint64_t config_hash(const PipelineConfig& cfg);

// split -> slice -> (optional augment) -> infer -> reproject+merge -> eval,
// persisting every stage's artifacts under cfg.output_dir. Reruns with the
// same config and seed reproduce every file byte-identically, independent of
// worker count.
EvalReport run_pipeline(const PipelineConfig& cfg);

}  // namespace tiledet

#endif  // TILEDET_PIPELINE_HPP
