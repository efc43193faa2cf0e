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

// Distribution-shift robustness metrics.
//
//   RR_m  = mAP_shifted / mAP_original
//   RRM_m = RR_m - mean over the fleet of RR
//
// The fleet mean can be pinned (e.g. 0.68) to score methods against a larger
// population than the one supplied.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hoirobust/core.hpp"

namespace hoirobust::robustness {

/// Mean of the per-domain mAPs. Throws DataError on an empty map.
[[nodiscard]] double comprehensive_map(const std::map<DomainName, double>& per_domain);

/// map_r / map_h. Throws DataError unless map_h > 0 and map_r >= 0.
[[nodiscard]] double robust_ratio(double map_h, double map_r);

struct MethodPair {
  std::string method;
  double map_h = 0.0;
  /// Either map_r or per_domain is used; per_domain wins when non-empty.
  double map_r = 0.0;
  std::map<DomainName, double> per_domain;
  /// Optional reference values carried through from input files.
  std::optional<double> printed_rrm_pp;
  std::string source;
};

struct MethodRobustness {
  std::string method;
  double map_h = 0.0;
  double map_r = 0.0;
  std::map<DomainName, double> per_domain;
  double rr = 0.0;
  std::optional<double> printed_rrm_pp;
  std::string source;
};

struct FleetReport {
  std::vector<MethodRobustness> methods;
  double mean_rr = 0.0;
  bool mean_overridden = false;
  /// Per method, in RR units (multiply by 100 for percentage points).
  std::map<std::string, double> rrm;

  [[nodiscard]] double rrm_of(const std::string& method) const { return rrm.at(method); }
};

/// Throws DataError on an empty fleet without an override, or on a
/// non-positive map_h. Duplicate method names are rejected.
[[nodiscard]] FleetReport fleet_report(const std::vector<MethodPair>& methods,
                                       std::optional<double> mean_rr_override = std::nullopt);

/// Accepts a JSON array of {"method","map_h","map_r"} or
/// {"method","map_h","per_domain":{...}} objects, or an object with a
/// "pairs" array of the same. Optional "printed_rrm" and "table" fields are
/// carried through for comparison.
[[nodiscard]] std::vector<MethodPair> parse_pairs(const nlohmann::json& doc);

[[nodiscard]] nlohmann::json to_json(const FleetReport& report);

}  // namespace hoirobust::robustness
