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


#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <set>

#include <gtest/gtest.h>
#include <unistd.h>

#include "hoirobust/cma.hpp"
#include "hoirobust/corruptions.hpp"
#include "hoirobust/image.hpp"
#include "hoirobust/json_io.hpp"

namespace fs = std::filesystem;

namespace hoirobust::cma {
namespace {

Image noise_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> px(0, 255);
  Image img(w, h);
  for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(px(rng));
  return img;
}

Image gradient(int w, int h) {
  Image img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.at(x, y, 0) = static_cast<std::uint8_t>(x * 255 / std::max(1, w - 1));
      img.at(x, y, 1) = static_cast<std::uint8_t>(y * 255 / std::max(1, h - 1));
      img.at(x, y, 2) = 128;
    }
  return img;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag)
      : path_(fs::temp_directory_path() / ("hoirobust_" + tag + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

TEST(ImageTest, Construction) {
  EXPECT_THROW(Image(-1, 2), std::invalid_argument);
  EXPECT_THROW(Image(2, 2, std::vector<std::uint8_t>(5)), std::invalid_argument);
  EXPECT_TRUE(Image(0, 3).empty());
  EXPECT_EQ(to_u8(-3.0), 0);
  EXPECT_EQ(to_u8(300.0), 255);
  EXPECT_EQ(to_u8(1.5), 2);
  EXPECT_EQ(to_u8(NAN), 0);
}

TEST(ImageTest, ResizeIdentityAndConstant) {
  const Image img = noise_image(17, 9, 1);
  EXPECT_EQ(resize_bilinear(img, 17, 9), img);
  const Image flat(10, 10, 77);
  const Image big = resize_bilinear(flat, 23, 31);
  EXPECT_EQ(big.width(), 23);
  for (auto p : big.pixels()) EXPECT_EQ(p, 77);
}

TEST(ImageTest, PngRoundTrip) {
  TempDir dir("png");
  const Image img = noise_image(31, 13, 2);
  write_png(dir.path() / "a.png", img);
  EXPECT_EQ(read_image(dir.path() / "a.png"), img);
  EXPECT_THROW((void)read_image(dir.path() / "missing.png"), DataError);
}

TEST(ImageTest, JpegRoundTripIsClose) {
  const Image img = gradient(64, 48);
  const Image back = decode_jpeg(encode_jpeg(img, 95));
  ASSERT_EQ(back.width(), 64);
  double err = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i) err += std::abs(int(img.pixels()[i]) - int(back.pixels()[i]));
  EXPECT_LT(err / static_cast<double>(img.size()), 3.0);
}

TEST(CorruptionTest, RegistryNames) {
  EXPECT_EQ(corruption_registry().size(), 12u);
  std::set<std::string> names;
  for (auto k : corruption_registry()) {
    names.insert(to_string(k));
    EXPECT_EQ(parse_corruption(to_string(k)), k);
  }
  EXPECT_EQ(names.size(), 12u);
  EXPECT_EQ(parse_corruption("gaussian_noise"), CorruptionKind::kGaussianNoise);
  EXPECT_THROW((void)parse_corruption("sunburn"), ConfigError);
  EXPECT_EQ((CorruptionSpec{CorruptionKind::kFrost, 4}.label()), "frost-s4");
  EXPECT_EQ(default_specs(2).size(), 12u);
}

TEST(CorruptionTest, EveryKindKeepsShapeAndIsSeeded) {
  const Image img = gradient(40, 30);
  for (auto k : corruption_registry()) {
    for (int s = 1; s <= kMaxSeverity; ++s) {
      const Image a = corrupt(img, {k, s}, 11);
      EXPECT_EQ(a.width(), 40) << to_string(k);
      EXPECT_EQ(a.height(), 30) << to_string(k);
      EXPECT_EQ(a, corrupt(img, {k, s}, 11)) << to_string(k);
    }
    EXPECT_EQ(corrupt(img, {k, 0}, 11), img);
  }
}

TEST(CorruptionTest, SeverityBoundsAndEmpty) {
  const Image img = gradient(8, 8);
  EXPECT_THROW((void)corrupt(img, {CorruptionKind::kBrightness, 6}, 1), ConfigError);
  EXPECT_THROW((void)corrupt(img, {CorruptionKind::kBrightness, -1}, 1), ConfigError);
  EXPECT_THROW((void)corrupt(Image(), {CorruptionKind::kBrightness, 1}, 1), DataError);
}

TEST(CorruptionTest, NoiseGrowsWithSeverity) {
  const Image img(48, 48, 128);
  double prev = -1.0;
  for (int s = 1; s <= 5; ++s) {
    const Image out = corrupt(img, {CorruptionKind::kGaussianNoise, s}, 3);
    double dev = 0.0;
    for (auto p : out.pixels()) dev += std::abs(int(p) - 128);
    EXPECT_GT(dev, prev);
    prev = dev;
  }
  EXPECT_NE(corrupt(img, {CorruptionKind::kGaussianNoise, 3}, 3), corrupt(img, {CorruptionKind::kGaussianNoise, 3}, 4));
}

TEST(CorruptionTest, BlurPreservesConstantPlane) {
  Plane p{9, 7, std::vector<double>(63, 5.0)};
  const Plane out = gaussian_blur(p, 1.7);
  for (double v : out.data) EXPECT_NEAR(v, 5.0, 1e-12);
}

TEST(MixupTest, ConfigValidation) {
  MixupConfig c;
  EXPECT_NO_THROW(c.validate());
  c.alpha = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.pi_c = 1.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.patch_size = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(MixupTest, BetaRangeAndSymmetry) {
  Rng rng(1);
  double below = 0;
  for (int i = 0; i < 20000; ++i) {
    const double x = sample_beta(1.5, rng);
    ASSERT_GE(x, 0.0);
    ASSERT_LE(x, 1.0);
    below += x < 0.5 ? 1 : 0;
  }
  EXPECT_NEAR(below / 20000.0, 0.5, 0.02);
}

TEST(MixupTest, DeriveSeedSpreads) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(7, i));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(derive_seed(7, 0), derive_seed(8, 0));
}

TEST(DropoutTest, GridCoversEdges) {
  Rng rng(1);
  const auto g = dropout_grid(33, 17, {}, 0.0, 8, rng);
  EXPECT_EQ(g.cols, 5);
  EXPECT_EQ(g.rows, 3);
  EXPECT_EQ(g.dropped(), 0u);
  Rng rng2(1);
  const auto all = dropout_grid(33, 17, {}, 1.0, 8, rng2);
  EXPECT_EQ(all.dropped(), 15u);
  const Image out = apply_grid(Image(33, 17, 9), all);
  for (auto p : out.pixels()) EXPECT_EQ(p, 0);
}

TEST(DropoutTest, CoveredPatchesNeverDrop) {
  const std::vector<BoundingBox> boxes{{8, 8, 16.5, 16}};
  Rng rng(3);
  const auto g = dropout_grid(32, 32, boxes, 1.0, 8, rng);
  EXPECT_EQ(g.at(1, 1), PatchState::kCovered);
  EXPECT_EQ(g.at(2, 1), PatchState::kCovered);
  EXPECT_EQ(g.at(0, 0), PatchState::kDropped);
  EXPECT_EQ(g.eligible(), 14u);
  EXPECT_THROW((void)dropout_grid(8, 8, {}, 0.5, 0, rng), ConfigError);
}

TEST(DropoutTest, Seeded) {
  const Image img = noise_image(64, 64, 4);
  EXPECT_EQ(patch_dropout(img, {}, 0.3, 8, 5), patch_dropout(img, {}, 0.3, 8, 5));
  EXPECT_NE(patch_dropout(img, {}, 0.3, 8, 5), patch_dropout(img, {}, 0.3, 8, 6));
}

TEST(SampleMixTest, AnnotationUnionAndProvenance) {
  AugmentedSample a{"a", noise_image(40, 20, 1), {{{0, 0, 10, 10}, {5, 5, 20, 20}, 0}}, {}};
  AugmentedSample b{"b", noise_image(20, 10, 2), {{{2, 2, 10, 8}, {0, 0, 20, 10}, 1}}, {{"b0"}, {"frost-s3"}, {}}};
  MixupConfig cfg;
  Rng rng(2);
  const auto m = sample_mix_with_ratio(a, b, 0.25, cfg, rng);
  EXPECT_EQ(m.image.width(), 40);
  ASSERT_EQ(m.gts.size(), 2u);
  EXPECT_EQ(m.gts[1].human, (BoundingBox{4, 4, 20, 16}));
  EXPECT_EQ(m.gts[1].object, (BoundingBox{0, 0, 40, 20}));
  EXPECT_EQ(m.provenance.sources, (std::vector<ImageId>{"a", "b0"}));
  EXPECT_EQ(m.provenance.domains, (std::vector<std::string>{"original", "frost-s3"}));
  EXPECT_EQ(*m.provenance.mu, 0.25);
  EXPECT_THROW((void)sample_mix_with_ratio(a, b, 1.5, cfg, rng), ConfigError);
  EXPECT_THROW((void)sample_mix_with_ratio(a, AugmentedSample{}, 0.5, cfg, rng), DataError);
}

TEST(SampleMixTest, BoxInteriorsKeepBlendOfSources) {
  AugmentedSample a{"a", noise_image(64, 64, 5), {{{10, 10, 30, 30}, {20, 20, 50, 40}, 0}}, {}};
  AugmentedSample b{"b", noise_image(64, 64, 6), {}, {}};
  MixupConfig cfg;
  cfg.pi_c = 1.0;
  cfg.patch_size = 4;
  Rng rng(1);
  const auto m = sample_mix_with_ratio(a, b, 0.5, cfg, rng);
  for (int y = 10; y < 30; ++y)
    for (int x = 10; x < 30; ++x) {
      const int want = (a.image.at(x, y, 0) + b.image.at(x, y, 0) + 1) / 2;
      ASSERT_EQ(m.image.at(x, y, 0), want);
    }
  // Outside every box, a's contribution is gone.
  EXPECT_EQ(m.image.at(60, 2, 1), (b.image.at(60, 2, 1) + 1) / 2);
}

TEST(PairingTest, Names) {
  for (auto p : {PairingPolicy::kOriginalSynthetic, PairingPolicy::kCrossSynthetic, PairingPolicy::kBoth})
    EXPECT_EQ(parse_pairing(to_string(p)), p);
  EXPECT_THROW((void)parse_pairing("random"), ConfigError);
}

TEST(SpecsTest, Parse) {
  const auto all = parse_specs(nlohmann::json{{"specs", {{"severity", 2}}}});
  EXPECT_EQ(all.size(), 12u);
  EXPECT_EQ(all[0].severity, 2);
  const auto two = parse_specs(nlohmann::json::array({{{"kind", "frost"}, {"severity", 5}}, {{"kind", "pixelate"}}}));
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[1].severity, 3);
  EXPECT_THROW((void)parse_specs(nlohmann::json::array({{{"kind", "frost"}, {"severity", 9}}})), ConfigError);
  EXPECT_THROW((void)parse_specs(nlohmann::json::array({{{"severity", 1}}})), SchemaError);
}

class AugmentTest : public ::testing::Test {
 protected:
  void SetUp() override {
    ds_.categories = {{"ride"}, {"bicycle"}, {{0, 0}}, {false}};
    fs::create_directories(dir_.path() / "src");
    for (int i = 0; i < 3; ++i) {
      ImageRecord rec{"im" + std::to_string(i), 32, 24, {{{1, 1, 10, 20}, {8, 4, 30, 22}, 0}}};
      write_png(dir_.path() / "src" / (rec.id + ".png"), noise_image(32, 24, i));
      ds_.images.emplace(rec.id, rec);
    }
  }
  DatasetIndex ds_;
  TempDir dir_{"augment"};
};

TEST_F(AugmentTest, SynthesisOnly) {
  AugmentOptions opt;
  opt.mix = false;
  const std::vector<CorruptionSpec> specs{{CorruptionKind::kFrost, 2}, {CorruptionKind::kPixelate, 3}};
  const auto s = build_augmented_dataset(ds_, dir_.path() / "src", specs, {}, opt, dir_.path() / "out");
  EXPECT_EQ(s.emitted, 6u);
  EXPECT_TRUE(s.failures.empty());
  const auto ann = load_dataset(dir_.path() / "out" / "annotations.json");
  EXPECT_EQ(ann.images.size(), 6u);
  EXPECT_TRUE(fs::exists(dir_.path() / "out" / "images" / "im0__frost-s2.png"));
}

TEST_F(AugmentTest, MixedOutputsAreValid) {
  AugmentOptions opt;
  opt.count = 5;
  opt.workers = 2;
  const auto s = build_augmented_dataset(ds_, dir_.path() / "src", default_specs(1), {}, opt, dir_.path() / "out");
  EXPECT_EQ(s.emitted, 5u);
  const auto ann = load_dataset(dir_.path() / "out" / "annotations.json");
  for (const auto& [id, rec] : ann.images) {
    EXPECT_EQ(rec.gts.size(), 2u);
    EXPECT_EQ(read_image(dir_.path() / "out" / "images" / (id + ".png")).width(), 32);
  }
  EXPECT_EQ(s.provenance["samples"].size(), 5u);
}

TEST_F(AugmentTest, MissingImageIsReported) {
  fs::remove(dir_.path() / "src" / "im1.png");
  AugmentOptions opt;
  opt.mix = false;
  const auto s = build_augmented_dataset(ds_, dir_.path() / "src", {{CorruptionKind::kBrightness, 1}}, {}, opt,
                                         dir_.path() / "out");
  EXPECT_EQ(s.emitted, 2u);
  EXPECT_EQ(s.failures.size(), 1u);
}

TEST_F(AugmentTest, CrossPairingNeedsTwoSpecs) {
  AugmentOptions opt;
  opt.pairing = PairingPolicy::kCrossSynthetic;
  EXPECT_THROW((void)build_augmented_dataset(ds_, dir_.path() / "src", {{CorruptionKind::kBrightness, 1}}, {}, opt,
                                             dir_.path() / "out"),
               ConfigError);
}

}  // namespace
}  // namespace hoirobust::cma
