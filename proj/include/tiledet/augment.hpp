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

#ifndef TILEDET_AUGMENT_HPP
#define TILEDET_AUGMENT_HPP

#include <opencv2/core.hpp>

#include "tiledet/dataset.hpp"
#include "tiledet/rng.hpp"

namespace tiledet {

enum class AugmentStrategy { none, pixel, spatial, both };

std::string to_string(AugmentStrategy s);
AugmentStrategy strategy_from_string(const std::string& s);

struct AugmentationSpec {
  AugmentStrategy strategy = AugmentStrategy::none;
  double probability = 0.5;  // independent fire probability per transform
  uint64_t seed = 0;
  // bbox-safe crop output size; 0 means "use the patch size".
  int crop_w = 0;
  int crop_h = 0;

  // Fixed toolkit constants; ranges below are declared stand-ins, chosen so
  // tests are reproducible without referencing any external library version.
  double dropout_rate = 0.01;
  double brightness_lo = -0.2, brightness_hi = 0.2;  // fraction of max value
  double contrast_lo = 0.8, contrast_hi = 1.2;
  double shadow_lo = 0.3, shadow_hi = 0.7;  // darkening factor range

  void validate() const;
};

struct AugmentedPatch {
  cv::Mat raster;
  std::vector<Annotation> boxes;
};

AugmentedPatch hflip(const cv::Mat& raster, const std::vector<Annotation>& boxes);
AugmentedPatch vflip(const cv::Mat& raster, const std::vector<Annotation>& boxes);

// Picks a window containing every box, crops and rescales to target. With no
// boxes any window is legal; a hull larger than the raster degenerates to a
// full-raster rescale.
AugmentedPatch bbox_safe_random_crop(const cv::Mat& raster,
                                     const std::vector<Annotation>& boxes,
                                     int target_w, int target_h, Rng& rng);

cv::Mat pixel_dropout(const cv::Mat& raster, double rate, Rng& rng);
cv::Mat brightness_contrast(const cv::Mat& raster, double alpha, double beta);
cv::Mat random_brightness_contrast(const cv::Mat& raster,
                                   const AugmentationSpec& spec, Rng& rng);
cv::Mat motion_blur(const cv::Mat& raster, Rng& rng);
cv::Mat random_shadow(const cv::Mat& raster, const AugmentationSpec& spec,
                      Rng& rng);

// Composes the strategy's transforms in fixed order (crop, hflip, vflip,
// dropout, blur, brightness/contrast, shadow), each fired independently with
// spec.probability. The RNG stream is derived from (spec.seed, patch_id).
AugmentedPatch apply_strategy(const cv::Mat& raster,
                              const std::vector<Annotation>& boxes,
                              const AugmentationSpec& spec, int64_t patch_id);

}  // namespace tiledet

#endif  // TILEDET_AUGMENT_HPP
