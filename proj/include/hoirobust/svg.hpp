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

// Minimal deterministic SVG plots.

#pragma once

#include <optional>
#include <string>
#include <vector>

namespace hoirobust::svg {

struct Point {
  std::string label;
  double x = 0.0;
  double y = 0.0;
};

struct ScatterOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  /// Draws y = slope * x when set.
  std::optional<double> reference_slope;
};

[[nodiscard]] std::string scatter(const std::vector<Point>& points, const ScatterOptions& options);

struct Series {
  std::string name;
  std::vector<double> values;
};

struct BarOptions {
  std::string title;
  std::string y_label;
};

/// Grouped bars: one group per category, one bar per series.
[[nodiscard]] std::string bar_chart(const std::vector<std::string>& categories, const std::vector<Series>& series,
                                    const BarOptions& options);

[[nodiscard]] std::string escape(const std::string& text);

}  // namespace hoirobust::svg
