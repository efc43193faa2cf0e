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

#include "hoirobust/error_analysis.hpp"

#include <stdexcept>

#include "hoirobust/parallel.hpp"

namespace hoirobust::errors {

const char* to_string(ErrorType t) noexcept {
  switch (t) {
    case ErrorType::kDuplicate: return "duplicate";
    case ErrorType::kInteractionCls: return "interaction_cls";
    case ErrorType::kObjectCls: return "object_cls";
    case ErrorType::kBothCls: return "both_cls";
    case ErrorType::kHumanLoc: return "human_loc";
    case ErrorType::kObjectLoc: return "object_loc";
    case ErrorType::kAssociation: return "association";
    case ErrorType::kBackground: return "background";
  }
  return "unknown";
}

const std::array<ErrorType, kNumErrorTypes>& all_error_types() noexcept {
  static constexpr std::array<ErrorType, kNumErrorTypes> kAll = {
      ErrorType::kDuplicate, ErrorType::kInteractionCls, ErrorType::kObjectCls,   ErrorType::kBothCls,
      ErrorType::kHumanLoc,  ErrorType::kObjectLoc,      ErrorType::kAssociation, ErrorType::kBackground};
  return kAll;
}

ErrorType attribute_error(const DetectionInstance& fp, std::span<const GroundTruthInstance> gts,
                          const std::vector<bool>& consumed, const HoiCategoryTable& table, double iou_threshold) {
  if (consumed.size() != gts.size()) throw std::invalid_argument("consumed flags must align with gts");

  const int fp_inter = table.interaction_of(fp.hoi);
  const int fp_obj = table.object_of(fp.hoi);

  std::vector<bool> passes(gts.size());
  for (std::size_t i = 0; i < gts.size(); ++i) {
    passes[i] = eval::pair_iou(fp.human, fp.object, gts[i].human, gts[i].object) > iou_threshold;
  }

  bool duplicate = false;
  bool inter_err = false;
  bool obj_err = false;
  bool both_err = false;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (!passes[i]) continue;
    const auto& g = gts[i];
    if (g.hoi == fp.hoi) {
      if (!consumed[i]) throw std::logic_error("detection passed to error attribution is a true positive");
      duplicate = true;
      continue;
    }
    const bool same_inter = table.interaction_of(g.hoi) == fp_inter;
    const bool same_obj = table.object_of(g.hoi) == fp_obj;
    if (same_obj && !same_inter) inter_err = true;
    else if (same_inter && !same_obj) obj_err = true;
    else if (!same_inter && !same_obj) both_err = true;
  }
  if (duplicate) return ErrorType::kDuplicate;
  if (inter_err) return ErrorType::kInteractionCls;
  if (obj_err) return ErrorType::kObjectCls;
  if (both_err) return ErrorType::kBothCls;

  std::optional<std::size_t> best;
  double best_score = -1.0;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (gts[i].hoi != fp.hoi) continue;
    const double s = eval::pair_iou(fp.human, fp.object, gts[i].human, gts[i].object);
    if (s > best_score) {
      best_score = s;
      best = i;
    }
  }
  if (best) {
    const bool human_ok = eval::iou(fp.human, gts[*best].human) > iou_threshold;
    const bool object_ok = eval::iou(fp.object, gts[*best].object) > iou_threshold;
    if (!human_ok && object_ok) return ErrorType::kHumanLoc;
    if (human_ok && !object_ok) return ErrorType::kObjectLoc;
  }

  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (eval::iou(fp.human, gts[i].human) <= iou_threshold) continue;
    for (std::size_t j = 0; j < gts.size(); ++j) {
      if (j != i && eval::iou(fp.object, gts[j].object) > iou_threshold) return ErrorType::kAssociation;
    }
  }
  return ErrorType::kBackground;
}

double ErrorBreakdown::percentage(ErrorType t) const {
  if (total_fp == 0) return 0.0;
  return 100.0 * static_cast<double>(count(t)) / static_cast<double>(total_fp);
}

namespace {

ErrorBreakdown breakdown_category(const DatasetIndex& dataset, const DetectionSet& dets, HoiId category,
                                  const BreakdownOptions& options) {
  ErrorBreakdown out;
  std::vector<DetectionInstance> cat_dets;
  std::vector<GroundTruthInstance> cat_gts;
  std::vector<std::size_t> cat_gt_index;
  for (const ImageRecord* rec : eval::images_for_category(dataset, category, options.setting)) {
    cat_gts.clear();
    cat_gt_index.clear();
    for (std::size_t i = 0; i < rec->gts.size(); ++i) {
      if (rec->gts[i].hoi == category) {
        cat_gts.push_back(rec->gts[i]);
        cat_gt_index.push_back(i);
      }
    }
    cat_dets.clear();
    if (auto it = dets.by_image.find(rec->id); it != dets.by_image.end()) {
      for (const auto& d : it->second) {
        if (d.hoi == category) cat_dets.push_back(d);
      }
    }
    const auto match = eval::match_image(cat_dets, cat_gts, options.iou_threshold);
    std::vector<bool> consumed(rec->gts.size(), false);
    for (std::size_t k = 0; k < cat_gts.size(); ++k) {
      if (match.gt_consumed[k]) consumed[cat_gt_index[k]] = true;
      else ++out.missed_gt;
    }
    for (std::size_t i = 0; i < cat_dets.size(); ++i) {
      if (match.true_positive[i]) continue;
      const auto t = attribute_error(cat_dets[i], rec->gts, consumed, dataset.categories, options.iou_threshold);
      ++out.counts[static_cast<std::size_t>(t)];
      ++out.total_fp;
    }
  }
  return out;
}

}  // namespace

ErrorBreakdown breakdown(const DatasetIndex& dataset, const DetectionSet& dets, const BreakdownOptions& options) {
  const std::size_t n = dataset.categories.size();
  std::vector<ErrorBreakdown> parts(n);
  parallel_for(n, options.workers, [&](std::size_t c) {
    parts[c] = breakdown_category(dataset, dets, static_cast<HoiId>(c), options);
  });
  ErrorBreakdown total;
  for (const auto& p : parts) {
    for (std::size_t t = 0; t < kNumErrorTypes; ++t) total.counts[t] += p.counts[t];
    total.total_fp += p.total_fp;
    total.missed_gt += p.missed_gt;
  }
  return total;
}

DeltaTable compare_domains(const ErrorBreakdown& base, const ErrorBreakdown& shifted) {
  DeltaTable d;
  if (base.total_fp == 0 || shifted.total_fp == 0) return d;
  for (auto t : all_error_types()) {
    d.delta_pp[static_cast<std::size_t>(t)] = shifted.percentage(t) - base.percentage(t);
  }
  return d;
}

nlohmann::json to_json(const ErrorBreakdown& b) {
  nlohmann::json counts = nlohmann::json::object();
  nlohmann::json pct = nlohmann::json::object();
  for (auto t : all_error_types()) {
    counts[to_string(t)] = b.count(t);
    pct[to_string(t)] = b.percentage(t);
  }
  return {{"taxonomy", kTaxonomyName},
          {"counts", counts},
          {"percentages", pct},
          {"total_fp", b.total_fp},
          {"missed_gt", b.missed_gt}};
}

ErrorBreakdown breakdown_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("counts") || !j["counts"].is_object()) {
    throw SchemaError("breakdown: missing 'counts' object");
  }
  if (j.contains("taxonomy") && j["taxonomy"] != kTaxonomyName) {
    throw SchemaError("breakdown uses a different taxonomy: " + j["taxonomy"].dump());
  }
  ErrorBreakdown b;
  for (auto t : all_error_types()) {
    const auto& c = j["counts"];
    if (!c.contains(to_string(t)) || !c[to_string(t)].is_number_unsigned()) {
      throw SchemaError(std::string("breakdown: missing count for ") + to_string(t));
    }
    b.counts[static_cast<std::size_t>(t)] = c[to_string(t)].get<std::size_t>();
    b.total_fp += b.counts[static_cast<std::size_t>(t)];
  }
  if (j.contains("missed_gt") && j["missed_gt"].is_number_unsigned()) b.missed_gt = j["missed_gt"].get<std::size_t>();
  return b;
}

nlohmann::json to_json(const DeltaTable& d) {
  nlohmann::json out = nlohmann::json::object();
  for (auto t : all_error_types()) {
    const auto& v = d.delta_pp[static_cast<std::size_t>(t)];
    out[to_string(t)] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  }
  return out;
}

}  // namespace hoirobust::errors
