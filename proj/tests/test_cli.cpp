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


#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include "hoirobust/cli.hpp"
#include "hoirobust/error_analysis.hpp"
#include "hoirobust/image.hpp"
#include "hoirobust/json_io.hpp"
#include "hoirobust/svg.hpp"
#include "support/fixtures.hpp"

namespace fs = std::filesystem;

namespace hoirobust::cli {
namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("hoirobust_cli_" + std::to_string(::getpid()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    const auto fx = testing::error_fixture();
    write_json_file(dir_ / "dataset.json", to_json(fx.dataset));
    write_json_file(dir_ / "dets.json", to_json(fx.dets));
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run_cli(std::vector<std::string> args) {
    out_.str("");
    err_.str("");
    return run(args, out_, err_);
  }
  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
  std::ostringstream out_;
  std::ostringstream err_;
};

TEST_F(CliTest, VersionAndUsage) {
  EXPECT_EQ(run_cli({"--version"}), kOk);
  EXPECT_NE(out_.str().find("1.0.0"), std::string::npos);
  EXPECT_EQ(run_cli({}), kConfigError);
  EXPECT_EQ(run_cli({"frobnicate"}), kConfigError);
  EXPECT_EQ(run_cli({"evaluate", "--dataset", p("dataset.json")}), kConfigError);
  EXPECT_EQ(run_cli({"--log-level", "loud", "f4m-check", "--out", p("x.json")}), kConfigError);
}

TEST_F(CliTest, EvaluateWritesDeterministicReports) {
  ASSERT_EQ(run_cli({"--workers", "2", "evaluate", "--dataset", p("dataset.json"), "--detections", p("dets.json"),
                     "--out", p("a/eval.json")}),
            kOk)
      << err_.str();
  EXPECT_NE(out_.str().find("mAP (full)"), std::string::npos);
  const auto j = read_json_file(p("a/eval.json"));
  EXPECT_EQ(j["schema_version"], kSchemaVersion);
  EXPECT_EQ(j["tool_version"], kToolVersion);
  EXPECT_EQ(j["config"]["subcommand"], "evaluate");
  EXPECT_FALSE(j.dump().find("generated_at") != std::string::npos);
  EXPECT_TRUE(fs::exists(p("a/eval.csv")));
  const auto meta = read_json_file(p("a/eval.meta.json"));
  EXPECT_TRUE(meta.contains("generated_at"));

  const auto first_json = slurp(p("a/eval.json"));
  const auto first_csv = slurp(p("a/eval.csv"));
  ASSERT_EQ(run_cli({"--workers", "2", "evaluate", "--dataset", p("dataset.json"), "--detections", p("dets.json"),
                     "--out", p("a/eval.json")}),
            kOk);
  EXPECT_EQ(first_json, slurp(p("a/eval.json")));
  EXPECT_EQ(first_csv, slurp(p("a/eval.csv")));
}

TEST_F(CliTest, DataErrorsExitTwo) {
  {
    std::ofstream bad(p("bad.json"));
    bad << "{ nope";
  }
  EXPECT_EQ(run_cli({"evaluate", "--dataset", p("bad.json"), "--detections", p("dets.json"), "--out", p("o.json")}),
            kDataError);
  EXPECT_NE(err_.str().find("data error"), std::string::npos);
  EXPECT_EQ(run_cli({"evaluate", "--dataset", p("dataset.json"), "--detections", p("dets.json"), "--setting", "odd",
                     "--out", p("o.json")}),
            kConfigError);
}

TEST_F(CliTest, Robustness) {
  const auto fixture = (fs::path(HOIROBUST_FIXTURE_DIR) / "published_rrm_pairs.json").string();
  ASSERT_EQ(run_cli({"robustness", "--pairs", fixture, "--mean-rr", "0.68", "--out", p("rr.json")}), kOk)
      << err_.str();
  const auto j = read_json_file(p("rr.json"));
  EXPECT_EQ(j["report"]["methods"].size(), 29u);
  EXPECT_NE(out_.str().find("mean RR 0.6800 (pinned)"), std::string::npos);
  const auto svg = slurp(p("rr.svg"));
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
}

TEST_F(CliTest, ErrorsWithCompare) {
  ASSERT_EQ(run_cli({"errors", "--dataset", p("dataset.json"), "--detections", p("dets.json"), "--out",
                     p("e1.json")}),
            kOk)
      << err_.str();
  const auto j = read_json_file(p("e1.json"));
  EXPECT_EQ(errors::breakdown_from_json(j["breakdown"]).total_fp, 6u);
  ASSERT_EQ(run_cli({"errors", "--dataset", p("dataset.json"), "--detections", p("dets.json"), "--compare",
                     p("e1.json"), "--out", p("e2.json")}),
            kOk)
      << err_.str();
  const auto k = read_json_file(p("e2.json"));
  EXPECT_EQ(k["delta"]["duplicate"], 0.0);
  EXPECT_TRUE(fs::exists(p("e2.svg")));
}

TEST_F(CliTest, Filter) {
  const auto fx = testing::filter_fixture();
  write_json_file(p("manifest.json"), to_json(fx.manifest));
  write_json_file(p("fds.json"), to_json(fx.dataset));
  nlohmann::json vl = {{"scores", nlohmann::json::array()}};
  for (const auto& [key, s] : *fx.scores.vl) vl["scores"].push_back({{"base", key.first}, {"domain", key.second}, {"score", s}});
  write_json_file(p("vl.json"), vl);
  std::string det_files;
  for (const auto* d : {"original", "rain", "snow"}) {
    nlohmann::json doc = {{"domain", d}, {"detections", nlohmann::json::array()}};
    for (const auto& [base, dets] : fx.scores.detections->at(d))
      for (const auto& o : dets)
        doc["detections"].push_back({{"base", base}, {"class", o.cls}, {"box", box_to_json(o.box)}, {"score", o.score}});
    write_json_file(p(std::string("det_") + d + ".json"), doc);
    det_files += (det_files.empty() ? "" : ",") + p(std::string("det_") + d + ".json");
  }
  {
    std::ofstream ex(p("exclude.txt"));
    ex << "s5\nghost\n";
  }
  ASSERT_EQ(run_cli({"filter", "--manifest", p("manifest.json"), "--dataset", p("fds.json"), "--vl-scores",
                     p("vl.json"), "--detections", det_files, "--exclude", p("exclude.txt"), "--out", p("f.json")}),
            kOk)
      << err_.str();
  const auto j = read_json_file(p("f.json"))["decision"];
  EXPECT_EQ(j["kept"], nlohmann::json::array({"s1"}));
  EXPECT_EQ(j["counts"]["by_reason"]["vl"], 1);
  EXPECT_EQ(j["counts"]["by_reason"]["consistency"], 1);
  EXPECT_EQ(j["counts"]["by_reason"]["small_object"], 1);
  EXPECT_EQ(j["counts"]["by_reason"]["manual"], 1);
  const auto m = load_manifest(p("f.manifest.json"));
  EXPECT_EQ(m.copies.size(), 2u);
}

TEST_F(CliTest, F4mCheck) {
  for (const char* type : {"1", "2", "3", "4"}) {
    EXPECT_EQ(run_cli({"f4m-check", "--query-type", type, "--out", p("f4m.json")}), kOk) << err_.str();
    EXPECT_TRUE(read_json_file(p("f4m.json"))["report"]["passed"].get<bool>());
  }
  EXPECT_EQ(run_cli({"f4m-check", "--training", "--num-vfms", "2", "--grid", "3x4", "--out", p("f4m.json")}), kOk);
  EXPECT_EQ(run_cli({"f4m-check", "--grid", "5x5", "--out", p("f4m.json")}), kConfigError);
  EXPECT_EQ(run_cli({"f4m-check", "--pi-f", "2", "--out", p("f4m.json")}), kConfigError);
}

TEST_F(CliTest, Augment) {
  DatasetIndex ds;
  ds.categories = {{"ride"}, {"bicycle"}, {{0, 0}}, {false}};
  fs::create_directories(dir_ / "img");
  for (int i = 0; i < 2; ++i) {
    ImageRecord rec{"im" + std::to_string(i), 24, 16, {{{1, 1, 8, 12}, {6, 3, 20, 15}, 0}}};
    write_png(dir_ / "img" / (rec.id + ".png"), Image(24, 16, static_cast<std::uint8_t>(60 + 40 * i)));
    ds.images.emplace(rec.id, rec);
  }
  write_json_file(p("ads.json"), to_json(ds));
  ASSERT_EQ(run_cli({"augment", "--dataset", p("ads.json"), "--images", p("img"), "--count", "3", "--severity", "2",
                     "--out", p("aug")}),
            kOk)
      << err_.str();
  EXPECT_EQ(load_dataset(p("aug/annotations.json")).images.size(), 3u);
  EXPECT_TRUE(fs::exists(p("aug/augment_report.json")));
  EXPECT_EQ(run_cli({"augment", "--dataset", p("ads.json"), "--images", p("img"), "--alpha", "0", "--out",
                     p("aug2")}),
            kConfigError);
}

TEST(BinaryTest, ExitCodes) {
  auto code = [](const std::string& args) {
    const int s = std::system((std::string(HOIROBUST_BINARY) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(code("--version"), 0);
  EXPECT_EQ(code("nonsense"), 1);
  EXPECT_EQ(code("robustness --pairs /dev/null --out /tmp/hoirobust_rr.json"), 2);
}

TEST(SvgTest, ScatterAndBars) {
  const auto s = svg::scatter({{"a<b", 30, 20}, {"c", 40, 28}}, {"t", "x", "y", 0.68});
  EXPECT_EQ(s.rfind("<svg", 0), 0u);
  EXPECT_NE(s.find("a&lt;b"), std::string::npos);
  EXPECT_EQ(s, svg::scatter({{"a<b", 30, 20}, {"c", 40, 28}}, {"t", "x", "y", 0.68}));
  const auto b = svg::bar_chart({"dup", "bg"}, {{"base", {10, 20}}, {"shift", {15, 5}}}, {"t", "%"});
  EXPECT_NE(b.find("</svg>"), std::string::npos);
  EXPECT_EQ(svg::escape("&\"<>"), "&amp;&quot;&lt;&gt;");
}

}  // namespace
}  // namespace hoirobust::cli
