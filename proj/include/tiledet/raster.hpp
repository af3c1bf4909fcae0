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

#ifndef TILEDET_RASTER_HPP
#define TILEDET_RASTER_HPP

#include <filesystem>

#include <opencv2/core.hpp>

#include "tiledet/geometry.hpp"

namespace tiledet {

cv::Mat load_raster(const std::filesystem::path& path);
void save_raster(const cv::Mat& img, const std::filesystem::path& path);

// Exact sub-raster of `window`; dimensions are the window's rounded to
// integers. Coordinates round only here, never in the annotation path.
cv::Mat crop_raster(const cv::Mat& img, const BBox& window);

cv::Mat downscale_raster(const cv::Mat& img, int target_w, int target_h);

}  // namespace tiledet

#endif  // TILEDET_RASTER_HPP
