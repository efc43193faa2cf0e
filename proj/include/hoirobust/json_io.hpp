// Copyright 2026 The hoirobust Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "hoirobust/core.hpp"

namespace hoirobust {

using Json = nlohmann::json;

/// Version of the on-disk annotation/detection/manifest schemas.
inline constexpr const char* kSchemaVersion = "1";

/// Reads and parses a JSON file. Throws ParseError on I/O or syntax errors.
[[nodiscard]] Json read_json_file(const std::filesystem::path& path);

/// Writes `value` with two-space indentation and a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& value);

// Annotation files. Boxes are [x1,y1,x2,y2] unless the top-level
// "box_format" field is "xywh", in which case they are converted on load.
[[nodiscard]] DatasetIndex parse_dataset(const Json& doc);
[[nodiscard]] DatasetIndex load_dataset(const std::filesystem::path& path);
[[nodiscard]] Json to_json(const DatasetIndex& dataset);

// Detection files. Image ids must exist in `dataset`, scores lie in [0,1].
[[nodiscard]] DetectionSet parse_detections(const Json& doc, const DatasetIndex& dataset);
[[nodiscard]] DetectionSet load_detections(const std::filesystem::path& path,
                                           const DatasetIndex& dataset);
[[nodiscard]] Json to_json(const DetectionSet& detections);

// Manifest files. Duplicate (base, domain) entries are an InvariantError.
[[nodiscard]] DomainManifest parse_manifest(const Json& doc);
[[nodiscard]] DomainManifest load_manifest(const std::filesystem::path& path);
[[nodiscard]] Json to_json(const DomainManifest& manifest);
[[nodiscard]] Json to_json(const ManifestReport& report);

[[nodiscard]] BoundingBox parse_box(const Json& value, bool xywh, const std::string& where);
[[nodiscard]] Json box_to_json(const BoundingBox& box);

}  // namespace hoirobust
