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

#include "support/fixtures.hpp"

namespace hoirobust::testing {
namespace {

ImageRecord image(const std::string& id, int w, int h, std::vector<GroundTruthInstance> gts) {
  ImageRecord r;
  r.id = id;
  r.width = w;
  r.height = h;
  r.gts = std::move(gts);
  return r;
}

void add(DatasetIndex& ds, ImageRecord rec) {
  auto id = rec.id;
  ds.images.emplace(id, std::move(rec));
}

}  // namespace

EvalFixture perfect_fixture() {
  EvalFixture f;
  auto& t = f.dataset.categories;
  t.interactions = {"ride", "hold", "wash"};
  t.objects = {"bicycle", "cup"};
  t.hoi = {{0, 0}, {1, 0}, {1, 1}, {2, 1}};
  t.rare = {false, true, false, true};
  add(f.dataset, image("p1", 100, 80,
                       {{{5, 5, 40, 70}, {30, 40, 90, 78}, 0}, {{50, 2, 70, 50}, {60, 20, 80, 40}, 2}}));
  add(f.dataset, image("p2", 120, 120, {{{0, 0, 60, 100}, {50, 50, 110, 110}, 1}}));
  add(f.dataset, image("p3", 64, 64, {{{10, 10, 30, 60}, {25, 25, 40, 40}, 3}, {{1, 1, 20, 20}, {5, 5, 60, 60}, 0}}));
  for (const auto& [id, rec] : f.dataset.images) {
    for (const auto& g : rec.gts) f.dets.by_image[id].push_back({g.human, g.object, g.hoi, 1.0});
  }
  f.dets.method = "oracle";
  f.dets.domain = "original";
  return f;
}

ErrorFixture error_fixture() {
  using errors::ErrorType;
  ErrorFixture f;
  auto& t = f.dataset.categories;
  t.interactions = {"ride", "wash", "hold"};
  t.objects = {"bicycle", "motorcycle"};
  // 0 ride-bicycle, 1 wash-bicycle, 2 ride-motorcycle, 3 hold-motorcycle
  t.hoi = {{0, 0}, {1, 0}, {0, 1}, {2, 1}};
  t.rare = {false, false, true, false};

  const BoundingBox h1{10, 10, 50, 90};
  const BoundingBox o1{40, 50, 110, 100};
  add(f.dataset, image("e1", 200, 200, {{h1, o1, 0}}));
  const BoundingBox h2{0, 0, 40, 80};
  const BoundingBox o2{30, 40, 90, 90};
  const BoundingBox h3{120, 0, 160, 80};
  const BoundingBox o3{110, 100, 190, 190};
  add(f.dataset, image("e2", 200, 200, {{h2, o2, 0}, {h3, o3, 3}}));

  auto& e1 = f.dets.by_image["e1"];
  e1.push_back({h1, o1, 0, 0.95});                      // true positive
  e1.push_back({h1, o1, 0, 0.90});                      // same GT again
  e1.push_back({h1, o1, 1, 0.85});                      // wash instead of ride
  e1.push_back({h1, o1, 2, 0.80});                      // motorcycle instead of bicycle
  e1.push_back({{60, 100, 100, 180}, o1, 0, 0.75});     // human box elsewhere
  auto& e2 = f.dets.by_image["e2"];
  e2.push_back({h2, o3, 1, 0.70});                      // human of one pair, object of another
  e2.push_back({{150, 150, 190, 190}, {160, 160, 200, 200}, 0, 0.65});

  f.labels = {{0.90, ErrorType::kDuplicate},   {0.85, ErrorType::kInteractionCls}, {0.80, ErrorType::kObjectCls},
              {0.75, ErrorType::kHumanLoc},    {0.70, ErrorType::kAssociation},    {0.65, ErrorType::kBackground}};
  // Both GTs of e2 stay unmatched.
  f.missed_gt = 2;
  return f;
}

FilterFixture filter_fixture() {
  using filter::ObjectDetection;
  using filter::Stage;
  FilterFixture f;
  f.manifest.domains = {"rain", "snow"};
  const std::vector<std::string> bases{"s1", "s2", "s3", "s4", "s5"};
  for (const auto& b : bases)
    for (const auto& d : f.manifest.domains) f.manifest.copies[{b, d}] = d + "/" + b + ".png";

  auto& t = f.dataset.categories;
  t.interactions = {"ride"};
  t.objects = {"bicycle"};
  t.hoi = {{0, 0}};
  t.rare = {false};
  const GroundTruthInstance big{{10, 10, 60, 90}, {40, 40, 95, 95}, 0};
  for (const auto& b : {"s1", "s2", "s3", "s5"}) add(f.dataset, image(b, 100, 100, {big}));
  // 10x10 human box in a 1000x1000 image: area ratio 1e-4.
  add(f.dataset, image("s4", 1000, 1000, {{{0, 0, 10, 10}, {100, 100, 600, 600}, 0}}));

  std::map<filter::CopyKey, double> vl;
  for (const auto& b : bases) {
    vl[{b, "rain"}] = 0.31;
    vl[{b, "snow"}] = 0.29;
  }
  vl[{"s2", "snow"}] = 0.10;
  f.scores.vl = vl;

  const std::vector<ObjectDetection> three{
      {"person", {10, 10, 60, 90}, 0.9}, {"bicycle", {40, 40, 95, 95}, 0.8}, {"cup", {0, 0, 8, 8}, 0.7}};
  std::vector<ObjectDetection> two_of_three = three;
  two_of_three[2].box = {90, 90, 99, 99};
  const std::vector<ObjectDetection> moved{{"person", {70, 0, 99, 30}, 0.9}};

  std::map<DomainName, std::map<ImageId, std::vector<ObjectDetection>>> dets;
  for (const auto& b : bases) {
    dets["original"][b] = three;
    dets["rain"][b] = three;
    dets["snow"][b] = three;
  }
  dets["rain"]["s1"] = two_of_three;  // F1 = 2/3
  dets["rain"]["s2"] = {};            // F1 = 0
  dets["snow"]["s3"] = moved;         // F1 = 0
  f.scores.detections = dets;
  f.scores.base_domain = "original";

  f.exclusions = {"s5", "ghost"};
  f.expected_kept = {"s1"};
  f.expected_discarded = {{"s2", Stage::kVl}, {"s3", Stage::kConsistency}, {"s4", Stage::kSmallObject},
                          {"s5", Stage::kManual}};
  return f;
}

}  // namespace hoirobust::testing
