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

#include "hoirobust/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "hoirobust/parallel.hpp"

namespace hoirobust {

namespace eval {

std::string to_string(Setting s) { return s == Setting::kDefault ? "default" : "known_object"; }

Setting parse_setting(const std::string& s) {
  if (s == "default") return Setting::kDefault;
  if (s == "ko" || s == "known_object" || s == "known-object") return Setting::kKnownObject;
  throw ConfigError("unknown evaluation setting '" + s + "' (expected default|ko)");
}

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double pair_iou(const BoundingBox& human_a, const BoundingBox& object_a, const BoundingBox& human_b,
                const BoundingBox& object_b) noexcept {
  return std::min(iou(human_a, human_b), iou(object_a, object_b));
}

MatchResult match_image(std::span<const DetectionInstance> dets, std::span<const GroundTruthInstance> gts,
                        double iou_threshold) {
  MatchResult r;
  r.true_positive.assign(dets.size(), false);
  r.matched_gt.assign(dets.size(), std::nullopt);
  r.gt_consumed.assign(gts.size(), false);
  r.order.resize(dets.size());
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });

  for (std::size_t di : r.order) {
    const auto& d = dets[di];
    double best = iou_threshold;
    std::optional<std::size_t> best_gt;
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (r.gt_consumed[gi]) continue;
      const double ov = pair_iou(d.human, d.object, gts[gi].human, gts[gi].object);
      if (ov > best) {
        best = ov;
        best_gt = gi;
      }
    }
    if (best_gt) {
      r.gt_consumed[*best_gt] = true;
      r.true_positive[di] = true;
      r.matched_gt[di] = best_gt;
    }
  }
  return r;
}

double average_precision(const std::vector<bool>& flags, std::size_t num_gt) {
  if (num_gt == 0 || flags.empty()) return 0.0;
  const std::size_t n = flags.size();
  std::vector<double> precision(n);
  std::vector<double> recall(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (flags[i]) ++tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(num_gt);
  }
  for (std::size_t i = n - 1; i > 0; --i) precision[i - 1] = std::max(precision[i - 1], precision[i]);

  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (recall[i] > prev_recall) {
      ap += (recall[i] - prev_recall) * precision[i];
      prev_recall = recall[i];
    }
  }
  return std::clamp(ap, 0.0, 1.0);
}

std::vector<const ImageRecord*> images_for_category(const DatasetIndex& dataset, HoiId category,
                                                    Setting setting) {
  std::vector<const ImageRecord*> out;
  out.reserve(dataset.images.size());
  const int object = dataset.categories.object_of(category);
  for (const auto& [id, rec] : dataset.images) {
    if (setting == Setting::kKnownObject) {
      const bool has_object = std::any_of(rec.gts.begin(), rec.gts.end(), [&](const GroundTruthInstance& g) {
        return dataset.categories.object_of(g.hoi) == object;
      });
      if (!has_object) continue;
    }
    out.push_back(&rec);
  }
  return out;
}

namespace {

struct CategoryResult {
  std::size_t num_gt = 0;
  std::size_t num_det = 0;
  double ap = 0.0;
};

struct Ranked {
  double score;
  bool tp;
};

CategoryResult evaluate_category(const DatasetIndex& dataset, const DetectionSet& dets, HoiId category,
                                 const EvalOptions& options) {
  CategoryResult result;
  std::vector<Ranked> ranked;
  std::vector<DetectionInstance> cat_dets;
  std::vector<GroundTruthInstance> cat_gts;
  for (const ImageRecord* rec : images_for_category(dataset, category, options.setting)) {
    cat_gts.clear();
    for (const auto& g : rec->gts) {
      if (g.hoi == category) cat_gts.push_back(g);
    }
    result.num_gt += cat_gts.size();

    cat_dets.clear();
    if (auto it = dets.by_image.find(rec->id); it != dets.by_image.end()) {
      for (const auto& d : it->second) {
        if (d.hoi == category) cat_dets.push_back(d);
      }
    }
    const auto match = match_image(cat_dets, cat_gts, options.iou_threshold);
    for (std::size_t i = 0; i < cat_dets.size(); ++i) ranked.push_back({cat_dets[i].score, match.true_positive[i]});
  }
  result.num_det = ranked.size();
  if (result.num_gt == 0) return result;

  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) { return a.score > b.score; });
  std::vector<bool> flags(ranked.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) flags[i] = ranked[i].tp;
  result.ap = average_precision(flags, result.num_gt);
  return result;
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

EvalReport evaluate(const DatasetIndex& dataset, const DetectionSet& dets, const EvalOptions& options) {
  const std::size_t n = dataset.categories.size();
  std::vector<CategoryResult> results(n);
  parallel_for(n, options.workers, [&](std::size_t c) {
    results[c] = evaluate_category(dataset, dets, static_cast<HoiId>(c), options);
  });

  EvalReport report;
  report.setting = options.setting;
  report.iou_threshold = options.iou_threshold;
  std::vector<double> all;
  std::vector<double> rare;
  std::vector<double> nonrare;
  for (std::size_t c = 0; c < n; ++c) {
    const auto id = static_cast<HoiId>(c);
    if (results[c].num_gt == 0) {
      report.excluded_categories.push_back(id);
      continue;
    }
    report.per_category_ap[id] = results[c].ap;
    report.num_gt[id] = results[c].num_gt;
    report.num_det[id] = results[c].num_det;
    all.push_back(results[c].ap);
    (dataset.categories.is_rare(id) ? rare : nonrare).push_back(results[c].ap);
  }
  report.map_full = mean_of(all);
  report.map_rare = mean_of(rare);
  report.map_nonrare = mean_of(nonrare);
  report.scored_categories = all.size();
  report.rare_categories = rare.size();
  report.nonrare_categories = nonrare.size();
  return report;
}

nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json per_cat = nlohmann::json::array();
  for (const auto& [id, ap] : r.per_category_ap) {
    per_cat.push_back({{"hoi", id}, {"ap", ap}, {"num_gt", r.num_gt.at(id)}, {"num_det", r.num_det.at(id)}});
  }
  return {{"setting", to_string(r.setting)},
          {"iou_threshold", r.iou_threshold},
          {"map_full", r.map_full},
          {"map_rare", r.map_rare},
          {"map_nonrare", r.map_nonrare},
          {"scored_categories", r.scored_categories},
          {"rare_categories", r.rare_categories},
          {"nonrare_categories", r.nonrare_categories},
          {"excluded_categories", r.excluded_categories},
          {"per_category", std::move(per_cat)}};
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string to_csv(const EvalReport& r, const HoiCategoryTable& table) {
  std::ostringstream os;
  os << "hoi_id,interaction,object,rare,num_gt,num_det,ap\n";
  char ap[32];
  for (const auto& [id, value] : r.per_category_ap) {
    std::snprintf(ap, sizeof ap, "%.6f", value);
    os << id << ',' << csv_field(table.interactions.at(static_cast<std::size_t>(table.interaction_of(id)))) << ','
       << csv_field(table.objects.at(static_cast<std::size_t>(table.object_of(id)))) << ','
       << (table.is_rare(id) ? 1 : 0) << ',' << r.num_gt.at(id) << ',' << r.num_det.at(id) << ',' << ap << '\n';
  }
  return os.str();
}

}  // namespace eval
}  // namespace hoirobust
