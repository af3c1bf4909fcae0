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

#ifndef TILEDET_SYNTH_HPP
#define TILEDET_SYNTH_HPP

#include <filesystem>

#include "tiledet/dataset.hpp"

namespace tiledet {

// Desk-scale ground-truth generator: colored-shape "organisms" on textured
// backgrounds with exact COCO annotations and a long-tailed class frequency
// profile. Geometry generation is separate from pixel rendering so pipelines
// that never touch rasters stay cheap.
struct SynthSpec {
  int image_count = 20;
  int min_width = 2800, max_width = 3200;
  int min_height = 3800, max_height = 4200;
  int objects_per_image = 120;
  int num_classes = 25;  // 25 selects the built-in benthic schema
  double zipf_exponent = 1.1;  // class weight ~ 1/rank^exponent
  double min_side = 14, max_side = 240;
  // Fraction of objects forced into the small area bucket (side < 32 px).
  double small_fraction = 0.0;
  // When set (size == num_classes), exact total object count per class;
  // overrides objects_per_image and the zipf profile.
  std::optional<std::vector<int64_t>> exact_class_counts;
  uint64_t seed = 0;

  void validate() const;
};

// Annotations only; objects within one image never overlap.
DatasetIndex synth_dataset(const SynthSpec& spec);

// Renders the matching rasters into out_dir (one PNG per image record).
void synth_render_images(const DatasetIndex& ds, const SynthSpec& spec,
                         const std::filesystem::path& out_dir);

}  // namespace tiledet

#endif  // TILEDET_SYNTH_HPP
