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

#include "tiledet/augment.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgproc.hpp>

namespace tiledet {

namespace {

// Keeps a transformed box inside [0,W]x[0,H] without collapsing it.
BBox clamp_into(double x, double y, double w, double h, double W, double H) {
  w = std::min(std::max(w, 1e-6), W);
  h = std::min(std::max(h, 1e-6), H);
  x = std::min(std::max(x, 0.0), W - w);
  y = std::min(std::max(y, 0.0), H - h);
  return BBox(x, y, w, h);
}

}  // namespace

std::string to_string(AugmentStrategy s) {
  switch (s) {
    case AugmentStrategy::none: return "none";
    case AugmentStrategy::pixel: return "pixel";
    case AugmentStrategy::spatial: return "spatial";
    case AugmentStrategy::both: return "both";
  }
  return "none";
}

AugmentStrategy strategy_from_string(const std::string& s) {
  if (s == "none") return AugmentStrategy::none;
  if (s == "pixel") return AugmentStrategy::pixel;
  if (s == "spatial") return AugmentStrategy::spatial;
  if (s == "both") return AugmentStrategy::both;
  throw ConfigError("unknown augmentation strategy: " + s);
}

void AugmentationSpec::validate() const {
  if (probability < 0 || probability > 1) {
    throw ConfigError("augmentation probability must be in [0, 1]");
  }
  if (crop_w < 0 || crop_h < 0) {
    throw ConfigError("crop target must be non-negative");
  }
  if (dropout_rate < 0 || dropout_rate > 1) {
    throw ConfigError("dropout rate must be in [0, 1]");
  }
}

AugmentedPatch hflip(const cv::Mat& raster,
                     const std::vector<Annotation>& boxes) {
  AugmentedPatch out;
  cv::flip(raster, out.raster, 1);
  double W = raster.cols;
  out.boxes = boxes;
  for (auto& ann : out.boxes) {
    ann.bbox = BBox(W - ann.bbox.x - ann.bbox.w, ann.bbox.y, ann.bbox.w,
                    ann.bbox.h);
  }
  return out;
}

AugmentedPatch vflip(const cv::Mat& raster,
                     const std::vector<Annotation>& boxes) {
  AugmentedPatch out;
  cv::flip(raster, out.raster, 0);
  double H = raster.rows;
  out.boxes = boxes;
  for (auto& ann : out.boxes) {
    ann.bbox = BBox(ann.bbox.x, H - ann.bbox.y - ann.bbox.h, ann.bbox.w,
                    ann.bbox.h);
  }
  return out;
}

AugmentedPatch bbox_safe_random_crop(const cv::Mat& raster,
                                     const std::vector<Annotation>& boxes,
                                     int target_w, int target_h, Rng& rng) {
  double W = raster.cols;
  double H = raster.rows;

  double hull_x = 0, hull_y = 0, hull_x2 = 0, hull_y2 = 0;
  if (!boxes.empty()) {
    hull_x = W;
    hull_y = H;
    for (const auto& ann : boxes) {
      hull_x = std::min(hull_x, ann.bbox.x);
      hull_y = std::min(hull_y, ann.bbox.y);
      hull_x2 = std::max(hull_x2, ann.bbox.x2());
      hull_y2 = std::max(hull_y2, ann.bbox.y2());
    }
  }
  double hull_w = hull_x2 - hull_x;
  double hull_h = hull_y2 - hull_y;

  double crop_w, crop_h, crop_x, crop_y;
  if (hull_w >= W || hull_h >= H) {
    // Hull fills (or exceeds) the patch: rescale only.
    crop_x = 0;
    crop_y = 0;
    crop_w = W;
    crop_h = H;
  } else {
    double min_w = boxes.empty() ? std::max(1.0, W * 0.5) : hull_w;
    double min_h = boxes.empty() ? std::max(1.0, H * 0.5) : hull_h;
    crop_w = rng.uniform(min_w, W);
    crop_h = rng.uniform(min_h, H);
    double x_lo = std::max(0.0, hull_x2 - crop_w);
    double x_hi = std::min(hull_x, W - crop_w);
    double y_lo = std::max(0.0, hull_y2 - crop_h);
    double y_hi = std::min(hull_y, H - crop_h);
    crop_x = rng.uniform(x_lo, std::max(x_lo, x_hi));
    crop_y = rng.uniform(y_lo, std::max(y_lo, y_hi));
  }

  int cx = static_cast<int>(std::floor(crop_x));
  int cy = static_cast<int>(std::floor(crop_y));
  int cw = std::min(static_cast<int>(std::ceil(crop_w)), raster.cols - cx);
  int ch = std::min(static_cast<int>(std::ceil(crop_h)), raster.rows - cy);

  AugmentedPatch out;
  cv::Mat crop = raster(cv::Rect(cx, cy, cw, ch));
  cv::resize(crop, out.raster, cv::Size(target_w, target_h), 0, 0,
             cv::INTER_LINEAR);

  double sx = static_cast<double>(target_w) / cw;
  double sy = static_cast<double>(target_h) / ch;
  out.boxes = boxes;
  for (auto& ann : out.boxes) {
    ann.bbox = clamp_into((ann.bbox.x - cx) * sx, (ann.bbox.y - cy) * sy,
                          ann.bbox.w * sx, ann.bbox.h * sy, target_w, target_h);
  }
  return out;
}

cv::Mat pixel_dropout(const cv::Mat& raster, double rate, Rng& rng) {
  cv::Mat out = raster.clone();
  if (rate <= 0) return out;
  for (int r = 0; r < out.rows; ++r) {
    auto* row = out.ptr<cv::Vec3b>(r);
    for (int c = 0; c < out.cols; ++c) {
      if (rng.bernoulli(rate)) row[c] = cv::Vec3b(0, 0, 0);
    }
  }
  return out;
}

cv::Mat brightness_contrast(const cv::Mat& raster, double alpha, double beta) {
  cv::Mat out;
  raster.convertTo(out, -1, alpha, beta * 255.0);
  return out;
}

cv::Mat random_brightness_contrast(const cv::Mat& raster,
                                   const AugmentationSpec& spec, Rng& rng) {
  double alpha = rng.uniform(spec.contrast_lo, spec.contrast_hi);
  double beta = rng.uniform(spec.brightness_lo, spec.brightness_hi);
  return brightness_contrast(raster, alpha, beta);
}

cv::Mat motion_blur(const cv::Mat& raster, Rng& rng) {
  static const int kLengths[] = {3, 5, 7};
  int len = kLengths[rng.uniform_int(0, 2)];
  double angle = rng.uniform(0.0, CV_PI);
  cv::Mat kernel = cv::Mat::zeros(len, len, CV_32F);
  double c = (len - 1) / 2.0;
  double dx = std::cos(angle) * c;
  double dy = std::sin(angle) * c;
  cv::line(kernel,
           cv::Point(static_cast<int>(std::round(c - dx)),
                     static_cast<int>(std::round(c - dy))),
           cv::Point(static_cast<int>(std::round(c + dx)),
                     static_cast<int>(std::round(c + dy))),
           cv::Scalar(1.0));
  kernel /= cv::sum(kernel)[0];
  cv::Mat out;
  cv::filter2D(raster, out, -1, kernel, cv::Point(-1, -1), 0,
               cv::BORDER_REPLICATE);
  return out;
}

cv::Mat random_shadow(const cv::Mat& raster, const AugmentationSpec& spec,
                      Rng& rng) {
  double W = raster.cols;
  double H = raster.rows;
  double cx = rng.uniform(0.0, W);
  double cy = rng.uniform(0.0, H);
  double radius = rng.uniform(0.15, 0.5) * std::min(W, H);
  int n = static_cast<int>(rng.uniform_int(3, 6));

  // Vertices at sorted angles around the centre give a convex region.
  std::vector<double> angles(n);
  for (auto& a : angles) a = rng.uniform(0.0, 2.0 * CV_PI);
  std::sort(angles.begin(), angles.end());
  std::vector<cv::Point> poly;
  for (double a : angles) {
    poly.emplace_back(static_cast<int>(cx + radius * std::cos(a)),
                      static_cast<int>(cy + radius * std::sin(a)));
  }
  double factor = rng.uniform(spec.shadow_lo, spec.shadow_hi);

  cv::Mat mask = cv::Mat::zeros(raster.size(), CV_8U);
  cv::fillConvexPoly(mask, poly, cv::Scalar(255));
  cv::Mat out = raster.clone();
  cv::Mat darkened;
  raster.convertTo(darkened, -1, factor, 0);
  darkened.copyTo(out, mask);
  return out;
}

AugmentedPatch apply_strategy(const cv::Mat& raster,
                              const std::vector<Annotation>& boxes,
                              const AugmentationSpec& spec, int64_t patch_id) {
  spec.validate();
  AugmentedPatch cur{raster.clone(), boxes};
  if (spec.strategy == AugmentStrategy::none) return cur;

  Rng rng(derive_seed(spec.seed, static_cast<uint64_t>(patch_id)));
  bool spatial = spec.strategy != AugmentStrategy::pixel;
  bool pixel = spec.strategy != AugmentStrategy::spatial;

  // Fixed composition order: crop, hflip, vflip, dropout, blur,
  // brightness/contrast, shadow. Pixel dropout counts as spatial.
  if (spatial && rng.bernoulli(spec.probability)) {
    int tw = spec.crop_w > 0 ? spec.crop_w : raster.cols;
    int th = spec.crop_h > 0 ? spec.crop_h : raster.rows;
    cur = bbox_safe_random_crop(cur.raster, cur.boxes, tw, th, rng);
  }
  if (spatial && rng.bernoulli(spec.probability)) {
    cur = hflip(cur.raster, cur.boxes);
  }
  if (spatial && rng.bernoulli(spec.probability)) {
    cur = vflip(cur.raster, cur.boxes);
  }
  if (spatial && rng.bernoulli(spec.probability)) {
    cur.raster = pixel_dropout(cur.raster, spec.dropout_rate, rng);
  }
  if (pixel && rng.bernoulli(spec.probability)) {
    cur.raster = motion_blur(cur.raster, rng);
  }
  if (pixel && rng.bernoulli(spec.probability)) {
    cur.raster = random_brightness_contrast(cur.raster, spec, rng);
  }
  if (pixel && rng.bernoulli(spec.probability)) {
    cur.raster = random_shadow(cur.raster, spec, rng);
  }
  return cur;
}

}  // namespace tiledet
