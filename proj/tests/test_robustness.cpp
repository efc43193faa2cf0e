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


#include <cmath>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "hoirobust/json_io.hpp"
#include "hoirobust/robustness.hpp"

namespace hoirobust::robustness {
namespace {

MethodPair pair(const std::string& name, double h, double r) {
  MethodPair p;
  p.method = name;
  p.map_h = h;
  p.map_r = r;
  return p;
}

TEST(RobustRatioTest, Basics) {
  EXPECT_DOUBLE_EQ(robust_ratio(40.0, 30.0), 0.75);
  EXPECT_THROW((void)robust_ratio(0.0, 1.0), DataError);
  EXPECT_THROW((void)robust_ratio(10.0, -1.0), DataError);
  EXPECT_THROW((void)robust_ratio(NAN, 1.0), DataError);
}

TEST(RobustRatioTest, ComprehensiveMapIsDomainMean) {
  EXPECT_DOUBLE_EQ(comprehensive_map({{"rain", 10.0}, {"snow", 20.0}, {"fog", 30.0}}), 20.0);
  EXPECT_THROW((void)comprehensive_map({}), DataError);
  EXPECT_THROW((void)comprehensive_map({{"rain", INFINITY}}), DataError);
}

TEST(FleetTest, PublishedExamples) {
  const auto fleet = fleet_report({pair("QPIC", 33.64, 22.29), pair("SCG-R50", 30.12, 20.56),
                                   pair("PViC-R50", 38.65, 26.02), pair("PViC-SwinL", 45.37, 32.81)},
                                  0.68);
  EXPECT_NEAR(100 * fleet.rrm_of("QPIC"), -1.7, 0.15);
  EXPECT_NEAR(100 * fleet.rrm_of("SCG-R50"), 0.3, 0.15);
  EXPECT_NEAR(100 * fleet.rrm_of("PViC-R50"), -0.7, 0.15);
  EXPECT_NEAR(100 * fleet.rrm_of("PViC-SwinL"), 4.3, 0.15);
  EXPECT_TRUE(fleet.mean_overridden);
}

TEST(FleetTest, MarginsSumToZeroWithoutOverride) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(5.0, 50.0);
  std::vector<MethodPair> methods;
  for (int i = 0; i < 20; ++i) {
    const double h = u(rng);
    methods.push_back(pair("m" + std::to_string(i), h, h * u(rng) / 50.0));
  }
  const auto fleet = fleet_report(methods);
  double sum = 0.0;
  for (const auto& [m, v] : fleet.rrm) sum += v;
  EXPECT_NEAR(sum, 0.0, 1e-12);
  EXPECT_FALSE(fleet.mean_overridden);
}

TEST(FleetTest, ScaleInvariant) {
  const auto a = fleet_report({pair("a", 30, 20), pair("b", 40, 25)});
  const auto b = fleet_report({pair("a", 3, 2), pair("b", 4, 2.5)});
  EXPECT_NEAR(a.rrm_of("a"), b.rrm_of("a"), 1e-15);
  EXPECT_NEAR(a.mean_rr, b.mean_rr, 1e-15);
}

TEST(FleetTest, PerDomainWins) {
  auto p = pair("x", 40, 1);
  p.per_domain = {{"rain", 20}, {"snow", 30}};
  const auto fleet = fleet_report({p});
  EXPECT_DOUBLE_EQ(fleet.methods[0].map_r, 25.0);
  EXPECT_DOUBLE_EQ(fleet.methods[0].rr, 0.625);
  EXPECT_DOUBLE_EQ(fleet.rrm_of("x"), 0.0);
}

TEST(FleetTest, Errors) {
  EXPECT_THROW((void)fleet_report({}), DataError);
  EXPECT_NO_THROW((void)fleet_report({}, 0.68));
  EXPECT_THROW((void)fleet_report({pair("a", 1, 1), pair("a", 2, 1)}), DataError);
  EXPECT_THROW((void)fleet_report({pair("a", 1, 1)}, -1.0), DataError);
}

TEST(ParseTest, Shapes) {
  const nlohmann::json doc = {
      {"pairs",
       {{{"method", "a"}, {"map_h", 30}, {"map_r", 20}, {"printed_rrm", 1.5}, {"table", "t1"}},
        {{"method", "b"}, {"map_h", 30}, {"per_domain", {{"rain", 10}, {"fog", 14}}}}}}};
  const auto pairs = parse_pairs(doc);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0].printed_rrm_pp, 1.5);
  EXPECT_EQ(pairs[0].source, "t1");
  EXPECT_EQ(pairs[1].per_domain.size(), 2u);
  EXPECT_EQ(parse_pairs(doc["pairs"]).size(), 2u);
  EXPECT_THROW((void)parse_pairs(nlohmann::json{{"x", 1}}), SchemaError);
  EXPECT_THROW((void)parse_pairs(nlohmann::json::array({{{"method", "a"}, {"map_h", 1}}})), SchemaError);
  EXPECT_THROW((void)parse_pairs(nlohmann::json::array({{{"map_h", 1}, {"map_r", 1}}})), SchemaError);
}

TEST(ParseTest, PublishedFixtureLoads) {
  const auto doc = read_json_file(std::filesystem::path(HOIROBUST_FIXTURE_DIR) / "published_rrm_pairs.json");
  const auto pairs = parse_pairs(doc);
  EXPECT_EQ(pairs.size(), 29u);
  for (const auto& p : pairs) EXPECT_TRUE(p.printed_rrm_pp.has_value()) << p.method;
  const auto j = to_json(fleet_report(pairs, 0.68));
  EXPECT_EQ(j["methods"].size(), 29u);
  EXPECT_TRUE(j["methods"][0].contains("delta_pp"));
  EXPECT_EQ(j["mean_rr"], 0.68);
}

}  // namespace
}  // namespace hoirobust::robustness
