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

#include "hoirobust/robustness.hpp"

#include <cmath>
#include <set>

namespace hoirobust::robustness {

double comprehensive_map(const std::map<DomainName, double>& per_domain) {
  if (per_domain.empty()) throw DataError("comprehensive mAP needs at least one domain");
  double sum = 0.0;
  for (const auto& [domain, value] : per_domain) {
    if (!std::isfinite(value)) throw DataError("non-finite mAP for domain '" + domain + "'");
    sum += value;
  }
  return sum / static_cast<double>(per_domain.size());
}

double robust_ratio(double map_h, double map_r) {
  if (!std::isfinite(map_h) || map_h <= 0.0) {
    throw DataError("robust ratio undefined for original-domain mAP " + std::to_string(map_h));
  }
  if (!std::isfinite(map_r) || map_r < 0.0) {
    throw DataError("shifted-domain mAP must be finite and non-negative");
  }
  return map_r / map_h;
}

FleetReport fleet_report(const std::vector<MethodPair>& methods, std::optional<double> mean_rr_override) {
  if (methods.empty() && !mean_rr_override) throw DataError("empty fleet and no mean RR override");
  if (mean_rr_override && (!std::isfinite(*mean_rr_override) || *mean_rr_override < 0.0)) {
    throw DataError("mean RR override must be finite and non-negative");
  }

  FleetReport report;
  std::set<std::string> seen;
  double sum = 0.0;
  for (const auto& p : methods) {
    if (!seen.insert(p.method).second) throw DataError("duplicate method '" + p.method + "'");
    MethodRobustness m;
    m.method = p.method;
    m.map_h = p.map_h;
    m.per_domain = p.per_domain;
    m.map_r = p.per_domain.empty() ? p.map_r : comprehensive_map(p.per_domain);
    m.rr = robust_ratio(m.map_h, m.map_r);
    m.printed_rrm_pp = p.printed_rrm_pp;
    m.source = p.source;
    sum += m.rr;
    report.methods.push_back(std::move(m));
  }
  report.mean_overridden = mean_rr_override.has_value();
  report.mean_rr = mean_rr_override ? *mean_rr_override : sum / static_cast<double>(methods.size());
  for (const auto& m : report.methods) report.rrm[m.method] = m.rr - report.mean_rr;
  return report;
}

namespace {

MethodPair parse_pair(const nlohmann::json& j, std::size_t index) {
  const std::string where = "pairs[" + std::to_string(index) + "]";
  if (!j.is_object()) throw SchemaError(where + ": expected an object");
  MethodPair p;
  if (!j.contains("method") || !j["method"].is_string()) throw SchemaError(where + ": missing string 'method'");
  p.method = j["method"].get<std::string>();
  if (!j.contains("map_h") || !j["map_h"].is_number()) throw SchemaError(where + ": missing numeric 'map_h'");
  p.map_h = j["map_h"].get<double>();
  if (j.contains("per_domain")) {
    if (!j["per_domain"].is_object()) throw SchemaError(where + ": 'per_domain' must be an object");
    for (const auto& [domain, v] : j["per_domain"].items()) {
      if (!v.is_number()) throw SchemaError(where + ": per_domain values must be numbers");
      p.per_domain[domain] = v.get<double>();
    }
    if (p.per_domain.empty()) throw DataError(where + ": 'per_domain' is empty");
  } else if (j.contains("map_r") && j["map_r"].is_number()) {
    p.map_r = j["map_r"].get<double>();
  } else {
    throw SchemaError(where + ": needs numeric 'map_r' or a 'per_domain' map");
  }
  if (j.contains("printed_rrm")) {
    if (!j["printed_rrm"].is_number()) throw SchemaError(where + ": 'printed_rrm' must be a number");
    p.printed_rrm_pp = j["printed_rrm"].get<double>();
  }
  if (j.contains("table") && j["table"].is_string()) p.source = j["table"].get<std::string>();
  return p;
}

}  // namespace

std::vector<MethodPair> parse_pairs(const nlohmann::json& doc) {
  const nlohmann::json* arr = &doc;
  if (doc.is_object()) {
    if (!doc.contains("pairs")) throw SchemaError("pairs file: missing 'pairs' array");
    arr = &doc["pairs"];
  }
  if (!arr->is_array()) throw SchemaError("pairs file: expected an array");
  std::vector<MethodPair> out;
  for (std::size_t i = 0; i < arr->size(); ++i) out.push_back(parse_pair((*arr)[i], i));
  return out;
}

nlohmann::json to_json(const FleetReport& report) {
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : report.methods) {
    nlohmann::json j = {{"method", m.method},
                        {"map_h", m.map_h},
                        {"map_r", m.map_r},
                        {"rr", m.rr},
                        {"rrm", report.rrm.at(m.method)},
                        {"rrm_pp", 100.0 * report.rrm.at(m.method)}};
    if (!m.per_domain.empty()) j["per_domain"] = m.per_domain;
    if (m.printed_rrm_pp) {
      j["printed_rrm_pp"] = *m.printed_rrm_pp;
      j["delta_pp"] = 100.0 * report.rrm.at(m.method) - *m.printed_rrm_pp;
    }
    if (!m.source.empty()) j["table"] = m.source;
    methods.push_back(std::move(j));
  }
  return {{"mean_rr", report.mean_rr}, {"mean_rr_overridden", report.mean_overridden}, {"methods", methods}};
}

}  // namespace hoirobust::robustness
