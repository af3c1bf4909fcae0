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

#include "tiledet/render.hpp"

#include <cmath>
#include <cstdio>

#include <opencv2/imgproc.hpp>

namespace tiledet {

cv::Scalar palette_color(int category_id) {
  double hue = std::fmod(category_id * 0.6180339887, 1.0) * 180.0;
  cv::Mat hsv(1, 1, CV_8UC3, cv::Scalar(hue, 190, 255));
  cv::Mat bgr;
  cv::cvtColor(hsv, bgr, cv::COLOR_HSV2BGR);
  auto px = bgr.at<cv::Vec3b>(0, 0);
  return cv::Scalar(px[0], px[1], px[2]);
}

cv::Mat render_detections(const cv::Mat& image,
                          const std::vector<Detection>& dets,
                          const CategoryTable& categories,
                          double confidence_threshold) {
  cv::Mat out = image.clone();
  for (const auto& det : dets) {
    if (det.score < confidence_threshold) continue;
    cv::Scalar color = palette_color(det.category_id);
    cv::Rect rect(static_cast<int>(std::lround(det.bbox.x)),
                  static_cast<int>(std::lround(det.bbox.y)),
                  std::max(1, static_cast<int>(std::lround(det.bbox.w))),
                  std::max(1, static_cast<int>(std::lround(det.bbox.h))));
    cv::rectangle(out, rect, color, 2);

    char label[128];
    std::snprintf(label, sizeof(label), "%s %.2f",
                  categories.contains(det.category_id)
                      ? categories.at(det.category_id).name.c_str()
                      : "?",
                  det.score);
    int baseline = 0;
    cv::Size text =
        cv::getTextSize(label, cv::FONT_HERSHEY_SIMPLEX, 0.5, 1, &baseline);
    cv::Point anchor(rect.x, std::max(text.height + 2, rect.y - 2));
    cv::rectangle(out,
                  cv::Rect(anchor.x, anchor.y - text.height - 2,
                           text.width + 4, text.height + baseline + 2),
                  color, cv::FILLED);
    cv::putText(out, label, cv::Point(anchor.x + 2, anchor.y),
                cv::FONT_HERSHEY_SIMPLEX, 0.5, cv::Scalar(0, 0, 0), 1);
  }
  return out;
}

}  // namespace tiledet
