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

// Cross-domain mixup augmentation.
//
// Samples are synthesised with parameter-free corruptions, then pairs are
// blended: image A loses background patches (patches that touch no GT box)
// with probability pi_c, the partner B is resized onto A's canvas, and
//
//   I_mix = mu * I_A + (1 - mu) * I_B,   mu ~ Beta(alpha, alpha)
//
// with the two annotation lists concatenated unweighted.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hoirobust/core.hpp"
#include "hoirobust/corruptions.hpp"
#include "hoirobust/image.hpp"

namespace hoirobust::cma {

using Rng = std::mt19937_64;

/// Independent stream seed for item `index` of a run seeded with `seed`.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

struct MixupConfig {
  double alpha = 1.5;
  double pi_c = 0.3;
  int patch_size = 32;
  std::uint64_t seed = 7;

  /// Throws ConfigError when alpha <= 0, pi_c outside [0,1] or patch_size < 1.
  void validate() const;
};

/// Draws from Beta(alpha, alpha) as X / (X + Y) with X, Y ~ Gamma(alpha, 1).
[[nodiscard]] double sample_beta(double alpha, Rng& rng);

enum class PatchState : std::uint8_t { kCovered, kKept, kDropped };

struct PatchGrid {
  int cols = 0;
  int rows = 0;
  int patch_size = 1;
  std::vector<PatchState> state;

  [[nodiscard]] PatchState at(int col, int row) const { return state[static_cast<std::size_t>(row) * cols + col]; }
  [[nodiscard]] std::size_t eligible() const;
  [[nodiscard]] std::size_t dropped() const;
};

/// Splits a width x height canvas into patch_size squares (the last row and
/// column may be partial). A patch is eligible iff it overlaps no box; every
/// eligible patch, in row-major order, is dropped with probability pi_c.
[[nodiscard]] PatchGrid dropout_grid(int width, int height, std::span<const BoundingBox> boxes, double pi_c,
                                     int patch_size, Rng& rng);

[[nodiscard]] Image apply_grid(const Image& image, const PatchGrid& grid);

[[nodiscard]] Image patch_dropout(const Image& image, std::span<const BoundingBox> boxes, double pi_c,
                                  int patch_size, std::uint64_t seed);

struct Provenance {
  std::vector<ImageId> sources;
  std::vector<std::string> domains;
  std::optional<double> mu;
};

struct AugmentedSample {
  ImageId id;
  Image image;
  std::vector<GroundTruthInstance> gts;
  Provenance provenance;
};

/// Every human and object box of `gts`.
[[nodiscard]] std::vector<BoundingBox> gt_boxes(std::span<const GroundTruthInstance> gts);

/// Blend with a fixed ratio. Patch dropout uses `rng`.
[[nodiscard]] AugmentedSample sample_mix_with_ratio(const AugmentedSample& a, const AugmentedSample& b, double mu,
                                                    const MixupConfig& cfg, Rng& rng);

/// Draws mu from Beta(alpha, alpha) first, then runs the patch dropout, both
/// from `rng`.
[[nodiscard]] AugmentedSample sample_mix(const AugmentedSample& a, const AugmentedSample& b, const MixupConfig& cfg,
                                         Rng& rng);

/// Convenience overload seeded from cfg.seed.
[[nodiscard]] AugmentedSample sample_mix(const AugmentedSample& a, const AugmentedSample& b, const MixupConfig& cfg);

enum class PairingPolicy {
  kOriginalSynthetic,
  kCrossSynthetic,
  /// Each output picks one of the two modes with equal probability.
  kBoth,
};

[[nodiscard]] PairingPolicy parse_pairing(const std::string& s);
[[nodiscard]] std::string to_string(PairingPolicy p);

struct AugmentOptions {
  bool mix = true;
  PairingPolicy pairing = PairingPolicy::kBoth;
  /// Number of mixed samples; 0 means one per source image.
  std::size_t count = 0;
  unsigned workers = 1;
};

struct AugmentSummary {
  std::size_t emitted = 0;
  std::vector<std::string> failures;
  nlohmann::json annotations;
  nlohmann::json provenance;
};

/// Resolves `<root>/<id>`, `<root>/<id>.png`, `.jpg` or `.jpeg`.
[[nodiscard]] std::filesystem::path resolve_image_path(const std::filesystem::path& root, const ImageId& id);

/// Writes images/<id>.png, annotations.json and provenance.json under
/// `out_dir`. Per-file I/O failures are collected and the run continues.
AugmentSummary build_augmented_dataset(const DatasetIndex& dataset, const std::filesystem::path& image_root,
                                       const std::vector<CorruptionSpec>& specs, const MixupConfig& cfg,
                                       const AugmentOptions& options, const std::filesystem::path& out_dir);

/// specs.json: an array of {"kind": str, "severity": int}, or
/// {"severity": int} / {} objects meaning every registered kind.
[[nodiscard]] std::vector<CorruptionSpec> parse_specs(const nlohmann::json& doc);

}  // namespace hoirobust::cma
