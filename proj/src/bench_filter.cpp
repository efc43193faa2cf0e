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

#include "hoirobust/bench_filter.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "hoirobust/evaluator.hpp"
#include "hoirobust/json_io.hpp"
#include "hoirobust/parallel.hpp"

namespace hoirobust::filter {
namespace {

std::string pair_name(const ImageId& base, const DomainName& domain) {
  return "(" + base + ", " + domain + ")";
}

std::vector<std::size_t> by_score(std::span<const ObjectDetection> dets) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return dets[x].score > dets[y].score; });
  return order;
}

struct BaseOutcome {
  std::optional<Stage> reason;
  std::string detail;
  std::vector<std::string> errors;
};

}  // namespace

std::string to_string(Stage s) {
  switch (s) {
    case Stage::kVl: return "vl";
    case Stage::kConsistency: return "consistency";
    case Stage::kSmallObject: return "small_object";
    case Stage::kManual: return "manual";
  }
  return "unknown";
}

Stage parse_stage(const std::string& s) {
  if (s == "vl") return Stage::kVl;
  if (s == "consistency") return Stage::kConsistency;
  if (s == "small_object") return Stage::kSmallObject;
  if (s == "manual") return Stage::kManual;
  throw ConfigError("unknown filter stage '" + s + "'");
}

void Thresholds::validate() const {
  auto in_unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (!in_unit(tau_vl)) throw ConfigError("tau_vl must lie in [0, 1]");
  if (!in_unit(iou_threshold)) throw ConfigError("iou_threshold must lie in [0, 1]");
  if (!in_unit(tau_f1)) throw ConfigError("tau_f1 must lie in [0, 1]");
  if (!in_unit(min_area_ratio)) throw ConfigError("min_area_ratio must lie in [0, 1]");
}

StageVerdict vl_alignment_filter(const std::map<CopyKey, double>& scores, const ImageId& base,
                                 std::span<const DomainName> domains, double tau_vl) {
  StageVerdict v;
  for (const auto& d : domains) {
    const auto it = scores.find({base, d});
    if (it == scores.end()) throw DataError("missing VL score for " + pair_name(base, d));
    if (v.keep && it->second < tau_vl) {
      v.keep = false;
      std::ostringstream os;
      os << d << " scored " << it->second << " < " << tau_vl;
      v.detail = os.str();
    }
  }
  return v;
}

double match_f1(std::span<const ObjectDetection> a, std::span<const ObjectDetection> b, double iou_threshold) {
  if (a.empty() && b.empty()) return 1.0;
  std::vector<bool> used(b.size(), false);
  const auto b_order = by_score(b);
  std::size_t matched = 0;
  for (const std::size_t i : by_score(a)) {
    std::optional<std::size_t> best;
    double best_iou = -1.0;
    for (const std::size_t j : b_order) {
      if (used[j] || b[j].cls != a[i].cls) continue;
      const double o = eval::iou(a[i].box, b[j].box);
      if (o >= iou_threshold && o > best_iou) {
        best = j;
        best_iou = o;
      }
    }
    if (best) {
      used[*best] = true;
      ++matched;
    }
  }
  return 2.0 * static_cast<double>(matched) / static_cast<double>(a.size() + b.size());
}

ConsistencyVerdict object_consistency_filter(std::span<const ObjectDetection> base_dets,
                                             std::span<const std::vector<ObjectDetection>> domain_dets,
                                             double iou_threshold, double tau_f1) {
  ConsistencyVerdict v;
  for (const auto& dets : domain_dets) {
    const double f1 = match_f1(base_dets, dets, iou_threshold);
    v.f1.push_back(f1);
    if (f1 < tau_f1) v.keep = false;
  }
  return v;
}

StageVerdict small_object_filter(const ImageRecord& record, double min_area_ratio) {
  const double canvas = static_cast<double>(record.width) * static_cast<double>(record.height);
  for (const auto& gt : record.gts) {
    for (const auto* box : {&gt.human, &gt.object}) {
      const double ratio = box->area() / canvas;
      if (ratio < min_area_ratio) {
        std::ostringstream os;
        os << "box area ratio " << ratio << " < " << min_area_ratio;
        return {false, os.str()};
      }
    }
  }
  return {};
}

FilterDecision apply_filters(const DomainManifest& manifest, const DatasetIndex& dataset, const FilterScores& scores,
                             const std::set<ImageId>& exclusions, const FilterOptions& options) {
  options.thresholds.validate();
  const Thresholds& th = options.thresholds;
  for (const Stage s : options.order) {
    if (s == Stage::kManual) throw ConfigError("manual exclusion always runs last and cannot be reordered");
  }

  std::map<ImageId, std::vector<DomainName>> domains_of;
  for (const auto& [key, path] : manifest.copies) domains_of[key.first].push_back(key.second);
  std::vector<ImageId> bases;
  for (const auto& [base, ds] : domains_of) bases.push_back(base);

  FilterDecision decision;
  for (const Stage s : options.order) {
    const bool skipped = (s == Stage::kVl && !scores.vl) || (s == Stage::kConsistency && !scores.detections);
    if (!skipped) decision.stages_run.push_back(s);
  }
  decision.stages_run.push_back(Stage::kManual);

  std::vector<BaseOutcome> outcomes(bases.size());
  parallel_for(bases.size(), options.workers, [&](std::size_t i) {
    const ImageId& base = bases[i];
    const auto& domains = domains_of.at(base);
    BaseOutcome& out = outcomes[i];
    auto fail = [&](Stage s, std::string detail) {
      if (!out.reason) {
        out.reason = s;
        out.detail = std::move(detail);
      }
    };
    for (const Stage s : decision.stages_run) {
      try {
        switch (s) {
          case Stage::kVl: {
            const StageVerdict v = vl_alignment_filter(*scores.vl, base, domains, th.tau_vl);
            if (!v.keep) fail(s, v.detail);
            break;
          }
          case Stage::kConsistency: {
            const auto& files = *scores.detections;
            auto lookup = [&](const DomainName& d) {
              const auto f = files.find(d);
              if (f == files.end()) throw DataError("missing detections for " + pair_name(base, d));
              const auto it = f->second.find(base);
              return it == f->second.end() ? std::vector<ObjectDetection>{} : it->second;
            };
            const std::vector<ObjectDetection> base_dets = lookup(scores.base_domain);
            std::vector<std::vector<ObjectDetection>> copies;
            std::vector<DomainName> names;
            for (const auto& d : domains) {
              if (d == scores.base_domain) continue;
              copies.push_back(lookup(d));
              names.push_back(d);
            }
            const ConsistencyVerdict v = object_consistency_filter(base_dets, copies, th.iou_threshold, th.tau_f1);
            if (!v.keep) {
              const auto worst = std::min_element(v.f1.begin(), v.f1.end()) - v.f1.begin();
              std::ostringstream os;
              os << names[static_cast<std::size_t>(worst)] << " F1 " << v.f1[static_cast<std::size_t>(worst)] << " < "
                 << th.tau_f1;
              fail(s, os.str());
            }
            break;
          }
          case Stage::kSmallObject: {
            const ImageRecord* rec = dataset.find(base);
            if (rec == nullptr) throw DataError("manifest base '" + base + "' is not in the dataset");
            const StageVerdict v = small_object_filter(*rec, th.min_area_ratio);
            if (!v.keep) fail(s, v.detail);
            break;
          }
          case Stage::kManual:
            if (exclusions.count(base) != 0) fail(s, "listed in the exclusion file");
            break;
        }
      } catch (const DataError& e) {
        out.errors.push_back(e.what());
      }
    }
  });

  std::vector<std::string> errors;
  for (const auto& o : outcomes) errors.insert(errors.end(), o.errors.begin(), o.errors.end());
  if (!errors.empty()) {
    std::string msg = std::to_string(errors.size()) + " filter input error(s): " + errors.front();
    for (std::size_t i = 1; i < std::min<std::size_t>(errors.size(), 5); ++i) msg += "; " + errors[i];
    throw DataError(msg);
  }

  for (std::size_t i = 0; i < bases.size(); ++i) {
    if (outcomes[i].reason) {
      decision.discarded[bases[i]] = *outcomes[i].reason;
      decision.details[bases[i]] = outcomes[i].detail;
    } else {
      decision.kept.insert(bases[i]);
    }
  }
  for (const auto& id : exclusions) {
    if (domains_of.count(id) == 0) decision.unknown_exclusions.push_back(id);
  }
  decision.manifest.domains = manifest.domains;
  for (const auto& [key, path] : manifest.copies) {
    if (decision.kept.count(key.first) != 0) decision.manifest.copies.emplace(key, path);
  }
  return decision;
}

nlohmann::json to_json(const FilterDecision& decision, const FilterOptions& options) {
  nlohmann::json discarded = nlohmann::json::array();
  std::map<std::string, std::size_t> by_reason;
  for (const Stage s : {Stage::kVl, Stage::kConsistency, Stage::kSmallObject, Stage::kManual}) by_reason[to_string(s)] = 0;
  for (const auto& [base, stage] : decision.discarded) {
    discarded.push_back({{"base", base}, {"reason", to_string(stage)}, {"detail", decision.details.at(base)}});
    ++by_reason[to_string(stage)];
  }
  nlohmann::json order = nlohmann::json::array();
  for (const Stage s : options.order) order.push_back(to_string(s));
  order.push_back(to_string(Stage::kManual));
  nlohmann::json run = nlohmann::json::array();
  for (const Stage s : decision.stages_run) run.push_back(to_string(s));
  const auto& th = options.thresholds;
  return {{"thresholds",
           {{"tau_vl", th.tau_vl},
            {"iou_threshold", th.iou_threshold},
            {"tau_f1", th.tau_f1},
            {"min_area_ratio", th.min_area_ratio}}},
          {"stage_order", std::move(order)},
          {"stages_run", std::move(run)},
          {"kept", decision.kept},
          {"discarded", std::move(discarded)},
          {"counts", {{"kept", decision.kept.size()}, {"discarded", decision.discarded.size()}, {"by_reason", by_reason}}},
          {"unknown_exclusions", decision.unknown_exclusions},
          {"manifest", hoirobust::to_json(decision.manifest)}};
}

std::map<CopyKey, double> parse_vl_scores(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("scores") || !doc.at("scores").is_array()) {
    throw SchemaError("VL score file needs a 'scores' array");
  }
  std::map<CopyKey, double> out;
  for (const auto& e : doc.at("scores")) {
    if (!e.is_object() || !e.contains("base") || !e.contains("domain") || !e.contains("score") ||
        !e.at("base").is_string() || !e.at("domain").is_string() || !e.at("score").is_number()) {
      throw SchemaError("VL score entries need string 'base', string 'domain' and numeric 'score'");
    }
    const CopyKey key{e.at("base").get<std::string>(), e.at("domain").get<std::string>()};
    const double s = e.at("score").get<double>();
    if (!std::isfinite(s) || s < 0.0 || s > 1.0) {
      throw InvariantError("VL score for " + pair_name(key.first, key.second) + " lies outside [0, 1]");
    }
    if (!out.emplace(key, s).second) throw InvariantError("duplicate VL score for " + pair_name(key.first, key.second));
  }
  return out;
}

std::pair<DomainName, std::map<ImageId, std::vector<ObjectDetection>>> parse_detection_file(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("domain") || !doc.at("domain").is_string() || !doc.contains("detections") ||
      !doc.at("detections").is_array()) {
    throw SchemaError("detection file needs string 'domain' and a 'detections' array");
  }
  std::pair<DomainName, std::map<ImageId, std::vector<ObjectDetection>>> out;
  out.first = doc.at("domain").get<std::string>();
  for (const auto& e : doc.at("detections")) {
    if (!e.is_object() || !e.contains("base") || !e.at("base").is_string() || !e.contains("class") ||
        !e.contains("box")) {
      throw SchemaError("detection entries need 'base', 'class' and 'box'");
    }
    ObjectDetection d;
    const auto& cls = e.at("class");
    d.cls = cls.is_string() ? cls.get<std::string>() : cls.dump();
    const std::string base = e.at("base").get<std::string>();
    d.box = parse_box(e.at("box"), false, "detection of " + pair_name(base, out.first));
    if (e.contains("score")) {
      if (!e.at("score").is_number() || !std::isfinite(e.at("score").get<double>())) {
        throw SchemaError("detection score must be a finite number");
      }
      d.score = e.at("score").get<double>();
    }
    out.second[base].push_back(std::move(d));
  }
  return out;
}

std::set<ImageId> parse_exclusions(std::istream& in) {
  std::set<ImageId> out;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    out.insert(line.substr(first, last - first + 1));
  }
  return out;
}

}  // namespace hoirobust::filter
