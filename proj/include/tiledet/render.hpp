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

#ifndef TILEDET_RENDER_HPP
#define TILEDET_RENDER_HPP

#include <opencv2/core.hpp>

#include "tiledet/dataset.hpp"

namespace tiledet {

// Deterministic per-class color (BGR), stable across runs.
cv::Scalar palette_color(int category_id);

// Draws every detection with score >= confidence_threshold (inclusive) with
// its class label and two-decimal score.
cv::Mat render_detections(const cv::Mat& image,
                          const std::vector<Detection>& dets,
                          const CategoryTable& categories,
                          double confidence_threshold);

}  // namespace tiledet

#endif  // TILEDET_RENDER_HPP
