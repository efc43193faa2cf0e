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

// Sample filtering for a multi-domain benchmark. A base sample is dropped
// from every domain at once when any of its copies fails a stage.

#pragma once

#include <istream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hoirobust/core.hpp"

namespace hoirobust::filter {

enum class Stage { kVl, kConsistency, kSmallObject, kManual };

[[nodiscard]] std::string to_string(Stage s);
[[nodiscard]] Stage parse_stage(const std::string& s);

using CopyKey = std::pair<ImageId, DomainName>;

struct ObjectDetection {
  std::string cls;
  BoundingBox box;
  double score = 1.0;
};

struct FilterScores {
  /// Absent when no relevance scores were supplied; the stage is skipped.
  std::optional<std::map<CopyKey, double>> vl;
  /// Per-domain detection files; the base images are under base_domain. An
  /// image absent from a present domain has no detections.
  std::optional<std::map<DomainName, std::map<ImageId, std::vector<ObjectDetection>>>> detections;
  DomainName base_domain = "original";
};

struct Thresholds {
  double tau_vl = 0.25;
  double iou_threshold = 0.5;
  double tau_f1 = 0.5;
  double min_area_ratio = 0.005;

  void validate() const;
};

struct StageVerdict {
  bool keep = true;
  std::string detail;
};

/// Discards iff some copy scores below tau. Throws DataError naming the
/// first unscored (base, domain) pair.
[[nodiscard]] StageVerdict vl_alignment_filter(const std::map<CopyKey, double>& scores, const ImageId& base,
                                               std::span<const DomainName> domains, double tau_vl);

/// Greedy class-aware matching of `b` against `a` (both in descending score
/// order, IoU >= iou_threshold). Returns 2m / (|a| + |b|), or 1 when both
/// lists are empty.
[[nodiscard]] double match_f1(std::span<const ObjectDetection> a, std::span<const ObjectDetection> b,
                              double iou_threshold);

struct ConsistencyVerdict {
  bool keep = true;
  std::vector<double> f1;
};

[[nodiscard]] ConsistencyVerdict object_consistency_filter(
    std::span<const ObjectDetection> base_dets, std::span<const std::vector<ObjectDetection>> domain_dets,
    double iou_threshold, double tau_f1);

/// Discards iff a human or object box covers less than min_area_ratio of
/// the image.
[[nodiscard]] StageVerdict small_object_filter(const ImageRecord& record, double min_area_ratio);

struct FilterDecision {
  std::set<ImageId> kept;
  std::map<ImageId, Stage> discarded;
  std::map<ImageId, std::string> details;
  std::vector<Stage> stages_run;
  /// Excluded ids that are not in the manifest.
  std::vector<ImageId> unknown_exclusions;
  DomainManifest manifest;
};

struct FilterOptions {
  Thresholds thresholds;
  /// Automatic stages, in application order. Manual exclusion always runs last.
  std::vector<Stage> order{Stage::kVl, Stage::kConsistency, Stage::kSmallObject};
  unsigned workers = 1;
};

/// Runs the stages per base id of the manifest and emits the filtered
/// manifest. Missing inputs from every base are collected into one
/// DataError.
[[nodiscard]] FilterDecision apply_filters(const DomainManifest& manifest, const DatasetIndex& dataset,
                                           const FilterScores& scores, const std::set<ImageId>& exclusions,
                                           const FilterOptions& options = {});

[[nodiscard]] nlohmann::json to_json(const FilterDecision& decision, const FilterOptions& options);

/// {"scores": [{"base", "domain", "score"}]}.
[[nodiscard]] std::map<CopyKey, double> parse_vl_scores(const nlohmann::json& doc);

/// {"domain": str, "detections": [{"base", "class", "box", "score"}]}.
[[nodiscard]] std::pair<DomainName, std::map<ImageId, std::vector<ObjectDetection>>> parse_detection_file(
    const nlohmann::json& doc);

/// One id per line; blank lines and '#' comments are ignored.
[[nodiscard]] std::set<ImageId> parse_exclusions(std::istream& in);

}  // namespace hoirobust::filter
