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

#include "tiledet/raster.hpp"

#include <cmath>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "tiledet/errors.hpp"

namespace tiledet {

cv::Mat load_raster(const std::filesystem::path& path) {
  cv::Mat img = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (img.empty()) throw IoError("cannot read image " + path.string());
  return img;
}

void save_raster(const cv::Mat& img, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  if (!cv::imwrite(path.string(), img)) {
    throw IoError("cannot write image " + path.string());
  }
}

cv::Mat crop_raster(const cv::Mat& img, const BBox& window) {
  int x = static_cast<int>(std::lround(window.x));
  int y = static_cast<int>(std::lround(window.y));
  int w = static_cast<int>(std::lround(window.w));
  int h = static_cast<int>(std::lround(window.h));
  if (x < 0 || y < 0 || x + w > img.cols || y + h > img.rows) {
    throw DataError("crop window outside raster bounds");
  }
  // clone() so the patch owns its pixels and the parent can be released.
  return img(cv::Rect(x, y, w, h)).clone();
}

cv::Mat downscale_raster(const cv::Mat& img, int target_w, int target_h) {
  if (target_w <= 0 || target_h <= 0) {
    throw ConfigError("downscale target dimensions must be positive");
  }
  if (target_w == img.cols && target_h == img.rows) return img.clone();
  cv::Mat out;
  cv::resize(img, out, cv::Size(target_w, target_h), 0, 0, cv::INTER_LINEAR);
  return out;
}

}  // namespace tiledet
