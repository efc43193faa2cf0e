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

// Canonical data model for HOI datasets, detections and multi-domain
// manifests. Everything here is immutable after load and safe to share
// between worker threads.

#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hoirobust {

// ---------------------------------------------------------------------------
// Error taxonomy. DataError subclasses map to CLI exit code 2, ConfigError to
// exit code 1, anything else escaping a subcommand to exit code 3.
// ---------------------------------------------------------------------------

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed JSON or unreadable file.
class ParseError : public DataError {
 public:
  using DataError::DataError;
};

/// Well-formed JSON that is missing a field or has the wrong type.
class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

/// Content that parses but violates a domain invariant.
class InvariantError : public DataError {
 public:
  using DataError::DataError;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using ImageId = std::string;
using DomainName = std::string;
using HoiId = int;

/// Axis-aligned box in absolute pixel corner format.
struct BoundingBox {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  [[nodiscard]] double width() const noexcept { return x2 - x1; }
  [[nodiscard]] double height() const noexcept { return y2 - y1; }
  [[nodiscard]] double area() const noexcept { return width() * height(); }

  /// Finite, non-negative, positive area.
  [[nodiscard]] bool valid() const noexcept;
  [[nodiscard]] bool within(double image_width, double image_height) const noexcept;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct HoiCategory {
  int interaction = 0;
  int object = 0;
  friend bool operator==(const HoiCategory&, const HoiCategory&) = default;
};

/// Interaction x object category table with rare flags read from config.
struct HoiCategoryTable {
  std::vector<std::string> interactions;
  std::vector<std::string> objects;
  std::vector<HoiCategory> hoi;
  std::vector<bool> rare;

  [[nodiscard]] std::size_t size() const noexcept { return hoi.size(); }
  [[nodiscard]] bool contains(HoiId id) const noexcept {
    return id >= 0 && static_cast<std::size_t>(id) < hoi.size();
  }
  [[nodiscard]] int interaction_of(HoiId id) const { return hoi.at(static_cast<std::size_t>(id)).interaction; }
  [[nodiscard]] int object_of(HoiId id) const { return hoi.at(static_cast<std::size_t>(id)).object; }
  [[nodiscard]] bool is_rare(HoiId id) const { return rare.at(static_cast<std::size_t>(id)); }
  [[nodiscard]] std::size_t rare_count() const noexcept;

  /// Throws InvariantError when an id is out of range or flags mismatch.
  void validate() const;

  friend bool operator==(const HoiCategoryTable&, const HoiCategoryTable&) = default;
};

/// Shape of the HICO-DET category table.
struct HicoDetLayout {
  static constexpr std::size_t kInteractions = 117;
  static constexpr std::size_t kObjects = 80;
  static constexpr std::size_t kCategories = 600;
  static constexpr std::size_t kRare = 138;
};

[[nodiscard]] bool matches_hico_det_layout(const HoiCategoryTable& table) noexcept;

struct GroundTruthInstance {
  BoundingBox human;
  BoundingBox object;
  HoiId hoi = 0;
  friend bool operator==(const GroundTruthInstance&, const GroundTruthInstance&) = default;
};

struct DetectionInstance {
  BoundingBox human;
  BoundingBox object;
  HoiId hoi = 0;
  double score = 0.0;
  friend bool operator==(const DetectionInstance&, const DetectionInstance&) = default;
};

struct ImageRecord {
  ImageId id;
  int width = 0;
  int height = 0;
  std::vector<GroundTruthInstance> gts;
  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct DatasetIndex {
  HoiCategoryTable categories;
  std::map<ImageId, ImageRecord> images;

  [[nodiscard]] const ImageRecord* find(const ImageId& id) const;
  friend bool operator==(const DatasetIndex&, const DatasetIndex&) = default;
};

/// Scored triplet predictions of one method on one domain, grouped by image.
struct DetectionSet {
  std::string method;
  DomainName domain;
  std::map<ImageId, std::vector<DetectionInstance>> by_image;

  [[nodiscard]] std::size_t total() const noexcept;
};

struct DomainManifest {
  std::vector<DomainName> domains;
  /// (base image id, domain) -> path or image id of the domain copy.
  std::map<std::pair<ImageId, DomainName>, std::string> copies;
};

/// The ten shifted domains of the robustness benchmark.
[[nodiscard]] const std::vector<DomainName>& default_shift_domains();

struct ManifestReport {
  std::map<DomainName, std::size_t> copies_per_domain;
  std::vector<std::pair<ImageId, DomainName>> missing;
  /// Copies whose base id is not in the dataset or whose domain is not listed.
  std::vector<std::pair<ImageId, DomainName>> unexpected;
  bool passed = true;
};

/// Passes iff every base sample has a copy in every listed domain. Output
/// vectors are sorted so the report does not depend on entry order.
[[nodiscard]] ManifestReport validate_manifest(const DomainManifest& manifest,
                                               const DatasetIndex& dataset);

}  // namespace hoirobust
