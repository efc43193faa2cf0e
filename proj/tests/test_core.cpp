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


#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "hoirobust/core.hpp"
#include "hoirobust/json_io.hpp"
#include "hoirobust/parallel.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

namespace hoirobust {
namespace {

TEST(BoundingBoxTest, Validity) {
  EXPECT_TRUE((BoundingBox{0, 0, 1, 1}.valid()));
  EXPECT_FALSE((BoundingBox{2, 0, 2, 1}.valid()));
  EXPECT_FALSE((BoundingBox{-1, 0, 2, 1}.valid()));
  EXPECT_FALSE((BoundingBox{0, 0, std::nan(""), 1}.valid()));
  EXPECT_TRUE((BoundingBox{0, 0, 10, 5}.within(10, 5)));
  EXPECT_FALSE((BoundingBox{0, 0, 10.5, 5}.within(10, 5)));
  EXPECT_DOUBLE_EQ((BoundingBox{1, 2, 4, 6}.area()), 12.0);
}

TEST(CategoryTableTest, ValidateRejectsBadReferences) {
  HoiCategoryTable t;
  t.interactions = {"ride"};
  t.objects = {"bicycle"};
  t.hoi = {{0, 0}};
  t.rare = {false};
  EXPECT_NO_THROW(t.validate());
  t.hoi.push_back({1, 0});
  t.rare.push_back(false);
  EXPECT_THROW(t.validate(), InvariantError);
  t.hoi.back() = {0, 3};
  EXPECT_THROW(t.validate(), InvariantError);
  t.hoi.back() = {0, 0};
  t.rare.pop_back();
  EXPECT_THROW(t.validate(), InvariantError);
}

TEST(CategoryTableTest, HicoLayout) {
  const auto t = testing::hico_layout_table();
  EXPECT_NO_THROW(t.validate());
  EXPECT_EQ(t.rare_count(), 138u);
  EXPECT_TRUE(matches_hico_det_layout(t));
  auto smaller = t;
  smaller.rare[1] = false;
  EXPECT_FALSE(matches_hico_det_layout(smaller));
}

TEST(JsonIoTest, DatasetRoundTrip) {
  const auto fx = testing::perfect_fixture();
  const auto j = to_json(fx.dataset);
  EXPECT_EQ(parse_dataset(j), fx.dataset);
  const auto dets = parse_detections(to_json(fx.dets), fx.dataset);
  EXPECT_EQ(dets.by_image, fx.dets.by_image);
  EXPECT_EQ(dets.method, "oracle");
}

TEST(JsonIoTest, XywhBoxes) {
  auto j = to_json(testing::perfect_fixture().dataset);
  j["box_format"] = "xywh";
  for (auto& img : j["images"])
    for (auto& g : img["gts"]) {
      for (const char* k : {"hbox", "obox"}) {
        auto& b = g[k];
        b = Json::array({b[0], b[1], b[2].get<double>() - b[0].get<double>(), b[3].get<double>() - b[1].get<double>()});
      }
    }
  EXPECT_EQ(parse_dataset(j), testing::perfect_fixture().dataset);
  j["box_format"] = "cxcywh";
  EXPECT_THROW((void)parse_dataset(j), SchemaError);
}

TEST(JsonIoTest, RejectsBadInput) {
  const auto good = to_json(testing::perfect_fixture().dataset);
  auto j = good;
  j["images"][0]["gts"][0]["hbox"] = Json::array({5, 5, 1, 1});
  EXPECT_THROW((void)parse_dataset(j), InvariantError);
  j = good;
  j["images"][0]["gts"][0]["hoi"] = 99;
  EXPECT_THROW((void)parse_dataset(j), InvariantError);
  j = good;
  j["images"][0]["gts"][0]["obox"] = Json::array({0, 0, 500, 10});
  EXPECT_THROW((void)parse_dataset(j), InvariantError);
  j = good;
  j["images"].push_back(j["images"][0]);
  EXPECT_THROW((void)parse_dataset(j), InvariantError);
  j = good;
  j.erase("categories");
  EXPECT_THROW((void)parse_dataset(j), SchemaError);

  const auto ds = parse_dataset(good);
  Json d = {{"detections", Json::array({{{"image_id", "nope"}, {"hbox", {0, 0, 1, 1}}, {"obox", {0, 0, 1, 1}},
                                          {"hoi", 0}, {"score", 0.5}}})}};
  EXPECT_THROW((void)parse_detections(d, ds), InvariantError);
  d["detections"][0]["image_id"] = "p1";
  d["detections"][0]["score"] = 1.5;
  EXPECT_THROW((void)parse_detections(d, ds), InvariantError);
  d["detections"][0]["score"] = 0.5;
  EXPECT_EQ(parse_detections(d, ds).total(), 1u);
}

TEST(JsonIoTest, ReadFileErrors) {
  EXPECT_THROW((void)read_json_file("/nonexistent/file.json"), ParseError);
  const auto p = std::filesystem::temp_directory_path() / "hoirobust_bad.json";
  {
    std::ofstream out(p);
    out << "{ not json";
  }
  EXPECT_THROW((void)read_json_file(p), ParseError);
  write_json_file(p, Json{{"a", 1}});
  EXPECT_EQ(read_json_file(p)["a"], 1);
  std::filesystem::remove(p);
}

TEST(ManifestTest, RoundTripAndValidation) {
  const auto fx = testing::filter_fixture();
  const auto m = parse_manifest(to_json(fx.manifest));
  EXPECT_EQ(m.domains, fx.manifest.domains);
  EXPECT_EQ(m.copies, fx.manifest.copies);
  auto r = validate_manifest(m, fx.dataset);
  EXPECT_TRUE(r.passed);
  EXPECT_EQ(r.copies_per_domain.at("rain"), 5u);

  auto broken = m;
  broken.copies.erase({"s3", "snow"});
  broken.copies[{"zz", "rain"}] = "x";
  broken.copies[{"s1", "fog"}] = "x";
  r = validate_manifest(broken, fx.dataset);
  EXPECT_FALSE(r.passed);
  ASSERT_EQ(r.missing.size(), 1u);
  EXPECT_EQ(r.missing[0], (std::pair<ImageId, DomainName>{"s3", "snow"}));
  EXPECT_EQ(r.unexpected.size(), 2u);
}

TEST(ManifestTest, DefaultDomains) { EXPECT_EQ(default_shift_domains().size(), 10u); }

TEST(ParallelTest, VisitsEveryIndexOnce) {
  for (unsigned w : {1u, 2u, 7u}) {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(hits.size(), w, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
  }
  EXPECT_GE(default_worker_count(), 1u);
}

TEST(ParallelTest, PropagatesExceptions) {
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                 if (i == 4) throw DataError("boom");
               }),
               DataError);
}

}  // namespace
}  // namespace hoirobust
