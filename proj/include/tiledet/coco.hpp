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

#ifndef TILEDET_COCO_HPP
#define TILEDET_COCO_HPP

#include <filesystem>
#include <string>

#include "tiledet/dataset.hpp"

namespace tiledet {

// COCO-format dataset IO. Recognized extension fields on images are
// `substrate`, `depth_m` and `inclination_deg`; anything else is kept verbatim
// in the record's `extra` object and written back on save.
DatasetIndex load_coco(const std::filesystem::path& path);
DatasetIndex coco_from_json(const json& doc);
json coco_to_json(const DatasetIndex& ds);
void save_coco(const DatasetIndex& ds, const std::filesystem::path& path);

// Generic helpers shared by the other file formats.
json read_json_file(const std::filesystem::path& path);
void write_json_file(const json& doc, const std::filesystem::path& path);

}  // namespace tiledet

#endif  // TILEDET_COCO_HPP
