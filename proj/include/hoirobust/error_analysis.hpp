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

// Sub-task attribution of false positives.
//
// The eight-way taxonomy is this toolkit's own definition. A false positive
// gets the first type whose rule fires, in this order:
//
//   duplicate        a same-category GT passes the pair-IoU test but was consumed
//   interaction_cls  boxes pass against a GT with the same object, other interaction
//   object_cls       boxes pass against a GT with the same interaction, other object
//   both_cls         boxes pass against a GT that differs in both
//   human_loc        best same-category GT: object box passes, human box fails
//   object_loc       best same-category GT: human box passes, object box fails
//   association      human box matches one GT, object box a different GT
//   background       anything else

#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hoirobust/core.hpp"
#include "hoirobust/evaluator.hpp"

namespace hoirobust::errors {

enum class ErrorType {
  kDuplicate,
  kInteractionCls,
  kObjectCls,
  kBothCls,
  kHumanLoc,
  kObjectLoc,
  kAssociation,
  kBackground,
};

inline constexpr std::size_t kNumErrorTypes = 8;
inline constexpr const char* kTaxonomyName = "hoirobust-fp-taxonomy-v1";

[[nodiscard]] const char* to_string(ErrorType t) noexcept;
[[nodiscard]] const std::array<ErrorType, kNumErrorTypes>& all_error_types() noexcept;

/// `consumed[i]` tells whether gts[i] was claimed by a higher-scoring
/// detection of its own category. Throws std::logic_error if `fp` would
/// actually be a true positive.
[[nodiscard]] ErrorType attribute_error(const DetectionInstance& fp, std::span<const GroundTruthInstance> gts,
                                        const std::vector<bool>& consumed, const HoiCategoryTable& table,
                                        double iou_threshold);

struct ErrorBreakdown {
  std::array<std::size_t, kNumErrorTypes> counts{};
  std::size_t total_fp = 0;
  std::size_t missed_gt = 0;

  [[nodiscard]] std::size_t count(ErrorType t) const { return counts[static_cast<std::size_t>(t)]; }
  /// Percentage of all false positives; 0 when there are none.
  [[nodiscard]] double percentage(ErrorType t) const;
};

struct BreakdownOptions {
  eval::Setting setting = eval::Setting::kDefault;
  double iou_threshold = 0.5;
  unsigned workers = 1;
};

/// Runs the evaluator's matching per image and category and attributes every
/// false positive. Under the known-object setting only images containing the
/// category's object are considered, as in evaluation.
[[nodiscard]] ErrorBreakdown breakdown(const DatasetIndex& dataset, const DetectionSet& dets,
                                       const BreakdownOptions& options = {});

struct DeltaTable {
  /// shifted - base, in percentage points. nullopt when either side has no
  /// false positives and the percentages are undefined.
  std::array<std::optional<double>, kNumErrorTypes> delta_pp{};
};

[[nodiscard]] DeltaTable compare_domains(const ErrorBreakdown& base, const ErrorBreakdown& shifted);

[[nodiscard]] nlohmann::json to_json(const ErrorBreakdown& b);
[[nodiscard]] ErrorBreakdown breakdown_from_json(const nlohmann::json& j);
[[nodiscard]] nlohmann::json to_json(const DeltaTable& d);

}  // namespace hoirobust::errors
