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

// HOI triplet mean average precision.
//
// A detection is a true positive when its HOI category matches a ground truth
// pair and both the human and the object box overlap that pair with IoU
// strictly above the threshold. Detections are matched greedily in descending
// score order (ties keep input order); each ground truth pair is consumed at
// most once. AP is the area under the monotone precision envelope. Categories
// without ground truth in the evaluated image set are left out of the mean.

#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hoirobust/core.hpp"

namespace hoirobust::eval {

enum class Setting { kDefault, kKnownObject };

[[nodiscard]] std::string to_string(Setting s);
/// Accepts "default", "ko" and "known_object".
[[nodiscard]] Setting parse_setting(const std::string& s);

[[nodiscard]] double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

/// min(human IoU, object IoU): the score a triplet pair must beat.
[[nodiscard]] double pair_iou(const BoundingBox& human_a, const BoundingBox& object_a,
                              const BoundingBox& human_b, const BoundingBox& object_b) noexcept;

struct MatchResult {
  /// Indexed like the input detections.
  std::vector<bool> true_positive;
  std::vector<std::optional<std::size_t>> matched_gt;
  /// Indexed like the input ground truths.
  std::vector<bool> gt_consumed;
  /// Detection indices in processing order (descending score, stable).
  std::vector<std::size_t> order;
};

/// Greedy one-to-one matching of detections and ground truths that were
/// already filtered to a single HOI category.
[[nodiscard]] MatchResult match_image(std::span<const DetectionInstance> dets,
                                      std::span<const GroundTruthInstance> gts,
                                      double iou_threshold);

/// `flags` are TP(true)/FP(false) in descending score order.
[[nodiscard]] double average_precision(const std::vector<bool>& flags, std::size_t num_gt);

struct EvalReport {
  Setting setting = Setting::kDefault;
  double iou_threshold = 0.5;
  /// Only categories with at least one ground truth in the evaluated images.
  std::map<HoiId, double> per_category_ap;
  std::map<HoiId, std::size_t> num_gt;
  std::map<HoiId, std::size_t> num_det;
  double map_full = 0.0;
  double map_rare = 0.0;
  double map_nonrare = 0.0;
  std::size_t scored_categories = 0;
  std::size_t rare_categories = 0;
  std::size_t nonrare_categories = 0;
  /// Categories with no ground truth in the evaluated image set.
  std::vector<HoiId> excluded_categories;
};

struct EvalOptions {
  Setting setting = Setting::kDefault;
  double iou_threshold = 0.5;
  unsigned workers = 1;
};

/// Images a category is evaluated on under `setting`.
[[nodiscard]] std::vector<const ImageRecord*> images_for_category(const DatasetIndex& dataset, HoiId category,
                                                                  Setting setting);

[[nodiscard]] EvalReport evaluate(const DatasetIndex& dataset, const DetectionSet& dets,
                                  const EvalOptions& options = {});

[[nodiscard]] nlohmann::json to_json(const EvalReport& report);

/// hoi_id,interaction,object,rare,num_gt,num_det,ap rows.
[[nodiscard]] std::string to_csv(const EvalReport& report, const HoiCategoryTable& table);

}  // namespace hoirobust::eval
