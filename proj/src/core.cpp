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

#include "hoirobust/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hoirobust {

bool BoundingBox::valid() const noexcept {
  const bool finite = std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2);
  return finite && x1 >= 0.0 && y1 >= 0.0 && x2 > x1 && y2 > y1;
}

bool BoundingBox::within(double image_width, double image_height) const noexcept {
  return x2 <= image_width && y2 <= image_height && x1 >= 0.0 && y1 >= 0.0;
}

std::size_t HoiCategoryTable::rare_count() const noexcept {
  return static_cast<std::size_t>(std::count(rare.begin(), rare.end(), true));
}

void HoiCategoryTable::validate() const {
  if (rare.size() != hoi.size()) {
    throw InvariantError("rare flag count " + std::to_string(rare.size()) +
                         " does not match hoi category count " + std::to_string(hoi.size()));
  }
  for (std::size_t i = 0; i < hoi.size(); ++i) {
    const auto& c = hoi[i];
    if (c.interaction < 0 || static_cast<std::size_t>(c.interaction) >= interactions.size()) {
      throw InvariantError("hoi category " + std::to_string(i) + " references unknown interaction " +
                           std::to_string(c.interaction));
    }
    if (c.object < 0 || static_cast<std::size_t>(c.object) >= objects.size()) {
      throw InvariantError("hoi category " + std::to_string(i) + " references unknown object " +
                           std::to_string(c.object));
    }
  }
}

bool matches_hico_det_layout(const HoiCategoryTable& table) noexcept {
  return table.interactions.size() == HicoDetLayout::kInteractions &&
         table.objects.size() == HicoDetLayout::kObjects &&
         table.hoi.size() == HicoDetLayout::kCategories &&
         table.rare_count() == HicoDetLayout::kRare;
}

const ImageRecord* DatasetIndex::find(const ImageId& id) const {
  auto it = images.find(id);
  return it == images.end() ? nullptr : &it->second;
}

std::size_t DetectionSet::total() const noexcept {
  std::size_t n = 0;
  for (const auto& [id, dets] : by_image) n += dets.size();
  return n;
}

const std::vector<DomainName>& default_shift_domains() {
  static const std::vector<DomainName> kDomains = {
      "rain", "snow", "fog", "sea", "grassland", "forest", "darkness", "motion_blur", "sketch", "watercolor"};
  return kDomains;
}

ManifestReport validate_manifest(const DomainManifest& manifest, const DatasetIndex& dataset) {
  ManifestReport report;
  const std::set<DomainName> listed(manifest.domains.begin(), manifest.domains.end());
  for (const auto& d : listed) report.copies_per_domain[d] = 0;

  for (const auto& [key, path] : manifest.copies) {
    const auto& [base, domain] = key;
    if (!listed.contains(domain) || dataset.find(base) == nullptr) {
      report.unexpected.push_back(key);
      continue;
    }
    ++report.copies_per_domain[domain];
  }
  for (const auto& [id, record] : dataset.images) {
    for (const auto& d : listed) {
      if (!manifest.copies.contains({id, d})) report.missing.emplace_back(id, d);
    }
  }
  std::sort(report.missing.begin(), report.missing.end());
  std::sort(report.unexpected.begin(), report.unexpected.end());
  report.passed = report.missing.empty() && report.unexpected.empty();
  return report;
}

}  // namespace hoirobust
