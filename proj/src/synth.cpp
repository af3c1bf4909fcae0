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

#include "tiledet/synth.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/imgproc.hpp>

#include "tiledet/raster.hpp"
#include "tiledet/rng.hpp"

namespace tiledet {

namespace {

cv::Scalar class_color(int category_id) {
  // Golden-ratio hue stepping gives well-spread, stable colors.
  double hue = std::fmod(category_id * 0.6180339887, 1.0) * 180.0;
  cv::Mat hsv(1, 1, CV_8UC3, cv::Scalar(hue, 200, 230));
  cv::Mat bgr;
  cv::cvtColor(hsv, bgr, cv::COLOR_HSV2BGR);
  auto px = bgr.at<cv::Vec3b>(0, 0);
  return cv::Scalar(px[0], px[1], px[2]);
}

// Object geometry is regenerated identically for annotations and rendering.
struct SynthObject {
  BBox bbox;
  int category_id;
  int shape;  // 0 ellipse, 1 rect, 2 triangle
};

std::vector<SynthObject> image_objects(const SynthSpec& spec, int image_index,
                                       double W, double H,
                                       const std::vector<int>& class_picks) {
  Rng rng(derive_seed(spec.seed, 0x0b9ec7, image_index));
  std::vector<SynthObject> objects;
  for (int cat : class_picks) {
    bool small = rng.bernoulli(spec.small_fraction);
    double lo = small ? std::min(8.0, spec.min_side) : spec.min_side;
    double hi = small ? 30.0 : spec.max_side;
    // Rejection sampling keeps objects pairwise disjoint.
    for (int attempt = 0; attempt < 50; ++attempt) {
      double w = rng.uniform(lo, hi);
      double h = rng.uniform(lo, hi);
      double x = rng.uniform(0.0, W - w);
      double y = rng.uniform(0.0, H - h);
      BBox candidate(x, y, w, h);
      bool clear = true;
      for (const auto& other : objects) {
        if (intersection_area(candidate, other.bbox) > 0) {
          clear = false;
          break;
        }
      }
      if (clear) {
        objects.push_back(
            {candidate, cat, static_cast<int>(rng.uniform_int(0, 2))});
        break;
      }
    }
  }
  return objects;
}

std::vector<std::vector<int>> plan_class_picks(const SynthSpec& spec) {
  // Per-image list of category ids to place.
  std::vector<std::vector<int>> picks(spec.image_count);
  Rng rng(derive_seed(spec.seed, 0x91a2));
  if (spec.exact_class_counts) {
    const auto& counts = *spec.exact_class_counts;
    for (int c = 0; c < spec.num_classes; ++c) {
      for (int64_t k = 0; k < counts[c]; ++k) {
        picks[rng.uniform_int(0, spec.image_count - 1)].push_back(c + 1);
      }
    }
    return picks;
  }
  std::vector<double> cumulative;
  double total = 0;
  for (int c = 1; c <= spec.num_classes; ++c) {
    total += 1.0 / std::pow(static_cast<double>(c), spec.zipf_exponent);
    cumulative.push_back(total);
  }
  for (int i = 0; i < spec.image_count; ++i) {
    for (int k = 0; k < spec.objects_per_image; ++k) {
      double u = rng.uniform(0.0, total);
      auto it = std::lower_bound(cumulative.begin(), cumulative.end(), u);
      picks[i].push_back(
          static_cast<int>(it - cumulative.begin()) + 1);
    }
  }
  return picks;
}

}  // namespace

void SynthSpec::validate() const {
  if (image_count < 1) throw ConfigError("image_count must be >= 1");
  if (min_width < 32 || min_height < 32 || max_width < min_width ||
      max_height < min_height) {
    throw ConfigError("invalid synth image size range");
  }
  if (num_classes < 1) throw ConfigError("num_classes must be >= 1");
  if (exact_class_counts &&
      static_cast<int>(exact_class_counts->size()) != num_classes) {
    throw ConfigError("exact_class_counts size must equal num_classes");
  }
  if (small_fraction < 0 || small_fraction > 1) {
    throw ConfigError("small_fraction must be in [0, 1]");
  }
  if (!(min_side >= 2) || max_side < min_side) {
    throw ConfigError("invalid synth object size range");
  }
}

DatasetIndex synth_dataset(const SynthSpec& spec) {
  spec.validate();
  DatasetIndex ds;
  if (spec.num_classes == 25) {
    ds.categories = wsbd_categories();
  } else {
    for (int c = 1; c <= spec.num_classes; ++c) {
      ds.categories.entries.push_back(
          Category{c, "class_" + std::to_string(c), c <= 10});
    }
  }

  auto picks = plan_class_picks(spec);
  int64_t next_ann_id = 1;
  for (int i = 0; i < spec.image_count; ++i) {
    Rng rng(derive_seed(spec.seed, 0x57e11a, i));
    ImageRecord img;
    img.id = i + 1;
    img.file_name = "synth_" + std::to_string(img.id) + ".png";
    img.width = static_cast<double>(
        rng.uniform_int(spec.min_width, spec.max_width));
    img.height = static_cast<double>(
        rng.uniform_int(spec.min_height, spec.max_height));
    img.meta.substrate = rng.bernoulli(0.5) ? Substrate::hard : Substrate::soft;
    img.meta.depth_m = rng.uniform(421.0, 2202.0);
    img.meta.inclination_deg = rng.uniform(0.0, 80.0);

    auto objects =
        image_objects(spec, i, img.width, img.height, picks[i]);
    for (const auto& obj : objects) {
      Annotation ann;
      ann.id = next_ann_id++;
      ann.image_id = img.id;
      ann.category_id = obj.category_id;
      ann.bbox = obj.bbox;
      ds.annotations.push_back(std::move(ann));
    }
    ds.images.push_back(std::move(img));
  }
  ds.validate();
  return ds;
}

void synth_render_images(const DatasetIndex& ds, const SynthSpec& spec,
                         const std::filesystem::path& out_dir) {
  auto by_image = ds.annotations_by_image();
  for (size_t i = 0; i < ds.images.size(); ++i) {
    const ImageRecord& img = ds.images[i];
    int W = static_cast<int>(img.width);
    int H = static_cast<int>(img.height);
    Rng rng(derive_seed(spec.seed, 0xba5e, i));

    // Textured seafloor-ish background: low-frequency noise blobs.
    cv::Mat raster(H, W, CV_8UC3, cv::Scalar(70, 80, 90));
    int blobs = std::max(20, W * H / 200000);
    for (int b = 0; b < blobs; ++b) {
      cv::Point center(static_cast<int>(rng.uniform(0, W)),
                       static_cast<int>(rng.uniform(0, H)));
      int radius = static_cast<int>(rng.uniform(10, 80));
      int shade = static_cast<int>(rng.uniform(-25, 25));
      cv::circle(raster, center, radius,
                 cv::Scalar(70 + shade, 80 + shade, 90 + shade), cv::FILLED);
    }

    for (const Annotation* ann : by_image.at(img.id)) {
      cv::Scalar color = class_color(ann->category_id);
      const BBox& b = ann->bbox;
      cv::Rect rect(static_cast<int>(std::lround(b.x)),
                    static_cast<int>(std::lround(b.y)),
                    std::max(1, static_cast<int>(std::lround(b.w))),
                    std::max(1, static_cast<int>(std::lround(b.h))));
      rect &= cv::Rect(0, 0, W, H);
      int shape = static_cast<int>(
          (static_cast<int64_t>(ann->id) + ann->category_id) % 3);
      if (shape == 0) {
        cv::ellipse(raster,
                    cv::Point(rect.x + rect.width / 2, rect.y + rect.height / 2),
                    cv::Size(std::max(1, rect.width / 2),
                             std::max(1, rect.height / 2)),
                    0, 0, 360, color, cv::FILLED);
      } else if (shape == 1) {
        cv::rectangle(raster, rect, color, cv::FILLED);
      } else {
        std::vector<cv::Point> tri{
            {rect.x + rect.width / 2, rect.y},
            {rect.x, rect.y + rect.height},
            {rect.x + rect.width, rect.y + rect.height}};
        cv::fillConvexPoly(raster, tri, color);
      }
    }
    save_raster(raster, out_dir / img.file_name);
  }
}

}  // namespace tiledet
