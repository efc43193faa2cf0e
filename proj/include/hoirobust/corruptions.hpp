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

// Parameter-free image corruptions used for cross-domain sample synthesis.
// Severity parameters follow the common-corruptions benchmark family; motion
// blur, snow and fog are left out because they overlap with the evaluation
// domains.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hoirobust/image.hpp"

namespace hoirobust::cma {

enum class CorruptionKind {
  kGaussianNoise,
  kShotNoise,
  kImpulseNoise,
  kDefocusBlur,
  kGlassBlur,
  kZoomBlur,
  kFrost,
  kBrightness,
  kContrast,
  kElasticTransform,
  kPixelate,
  kJpegCompression,
};

inline constexpr int kMaxSeverity = 5;

[[nodiscard]] const char* to_string(CorruptionKind kind) noexcept;
/// Throws ConfigError for names outside the registry.
[[nodiscard]] CorruptionKind parse_corruption(const std::string& name);
[[nodiscard]] const std::vector<CorruptionKind>& corruption_registry();

struct CorruptionSpec {
  CorruptionKind kind = CorruptionKind::kGaussianNoise;
  /// 1..5; 0 is accepted as the identity.
  int severity = 1;

  [[nodiscard]] std::string label() const;
  friend bool operator==(const CorruptionSpec&, const CorruptionSpec&) = default;
};

/// Deterministic for a fixed (image, spec, seed). Output has the input's
/// dimensions. Throws ConfigError for a severity outside 0..5.
[[nodiscard]] Image corrupt(const Image& image, const CorruptionSpec& spec, std::uint64_t seed);

/// All twelve kinds at `severity`.
[[nodiscard]] std::vector<CorruptionSpec> default_specs(int severity = 3);

// Float-plane helpers shared with the augmentation code and tests.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> data;
  [[nodiscard]] double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  [[nodiscard]] double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// Separable Gaussian blur with reflected borders.
[[nodiscard]] Plane gaussian_blur(const Plane& src, double sigma);

}  // namespace hoirobust::cma
