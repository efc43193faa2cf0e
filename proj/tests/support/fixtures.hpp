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

// Small hand-built datasets with hand-derived expectations.

#pragma once

#include <map>
#include <set>
#include <vector>

#include "hoirobust/bench_filter.hpp"
#include "hoirobust/core.hpp"
#include "hoirobust/error_analysis.hpp"

namespace hoirobust::testing {

struct EvalFixture {
  DatasetIndex dataset;
  DetectionSet dets;
};

/// Three images, four categories over two objects; one detection per GT,
/// identical boxes, score 1.
[[nodiscard]] EvalFixture perfect_fixture();

struct ErrorFixture {
  DatasetIndex dataset;
  DetectionSet dets;
  /// Hand-attributed label of every false positive, keyed by its score.
  std::map<double, errors::ErrorType> labels;
  std::size_t missed_gt = 0;
};

/// Six false positives, one of each of: duplicate, interaction_cls,
/// object_cls, human_loc, association, background.
[[nodiscard]] ErrorFixture error_fixture();

struct FilterFixture {
  DomainManifest manifest;
  DatasetIndex dataset;
  filter::FilterScores scores;
  std::set<ImageId> exclusions;
  std::set<ImageId> expected_kept;
  std::map<ImageId, filter::Stage> expected_discarded;
};

/// s1 passes everything; s2 fails vl and consistency; s3 fails consistency;
/// s4 has a tiny box; s5 is excluded by hand.
[[nodiscard]] FilterFixture filter_fixture();

}  // namespace hoirobust::testing
