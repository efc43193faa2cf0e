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

#include "hoirobust/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace hoirobust::svg {
namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 480;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 90;

constexpr std::array<const char*, 6> kPalette{"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

double nice_ceiling(double v) {
  if (v <= 0) return 1.0;
  const double mag = std::pow(10.0, std::floor(std::log10(v)));
  for (const double step : {1.0, 2.0, 2.5, 5.0, 10.0}) {
    if (step * mag >= v) return step * mag;
  }
  return 10.0 * mag;
}

void header(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << num(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
     << "</text>\n";
}

struct Frame {
  double x_max;
  double y_min;
  double y_max;
  [[nodiscard]] double px(double x) const { return kLeft + x / x_max * (kWidth - kLeft - kRight); }
  [[nodiscard]] double py(double y) const {
    return kHeight - kBottom - (y - y_min) / (y_max - y_min) * (kHeight - kTop - kBottom);
  }
};

void y_axis(std::ostringstream& os, const Frame& f, const std::string& label) {
  for (int i = 0; i <= 5; ++i) {
    const double v = f.y_min + (f.y_max - f.y_min) * i / 5.0;
    os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(f.py(v)) << "\" x2=\"" << num(kWidth - kRight)
       << "\" y2=\"" << num(f.py(v)) << "\" stroke=\"#dddddd\"/>\n";
    os << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(f.py(v) + 4) << "\" text-anchor=\"end\">" << num(v)
       << "</text>\n";
  }
  os << "<text transform=\"translate(18," << num((kTop + kHeight - kBottom) / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(label) << "</text>\n";
  os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft) << "\" y2=\""
     << num(kHeight - kBottom) << "\" stroke=\"black\"/>\n";
}

}  // namespace

std::string escape(const std::string& text) {
  std::string out;
  for (const char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string scatter(const std::vector<Point>& points, const ScatterOptions& options) {
  double hi = 0.0;
  for (const auto& p : points) hi = std::max({hi, p.x, p.y});
  const double top = nice_ceiling(hi);
  const Frame f{top, 0.0, top};
  std::ostringstream os;
  header(os, options.title);
  y_axis(os, f, options.y_label);
  for (int i = 0; i <= 5; ++i) {
    const double v = top * i / 5.0;
    os << "<text x=\"" << num(f.px(v)) << "\" y=\"" << num(kHeight - kBottom + 16) << "\" text-anchor=\"middle\">"
       << num(v) << "</text>\n";
  }
  os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kHeight - kBottom) << "\" x2=\"" << num(kWidth - kRight)
     << "\" y2=\"" << num(kHeight - kBottom) << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << num((kLeft + kWidth - kRight) / 2) << "\" y=\"" << num(kHeight - kBottom + 36)
     << "\" text-anchor=\"middle\">" << escape(options.x_label) << "</text>\n";
  if (options.reference_slope) {
    const double s = *options.reference_slope;
    const double x_end = s > 1.0 ? top / s : top;
    os << "<line x1=\"" << num(f.px(0)) << "\" y1=\"" << num(f.py(0)) << "\" x2=\"" << num(f.px(x_end))
       << "\" y2=\"" << num(f.py(s * x_end)) << "\" stroke=\"#888888\" stroke-dasharray=\"4 3\"/>\n";
  }
  for (const auto& p : points) {
    os << "<circle cx=\"" << num(f.px(p.x)) << "\" cy=\"" << num(f.py(p.y)) << "\" r=\"4\" fill=\"" << kPalette[0]
       << "\"><title>" << escape(p.label) << "</title></circle>\n";
    os << "<text x=\"" << num(f.px(p.x) + 6) << "\" y=\"" << num(f.py(p.y) - 4) << "\" font-size=\"8\">"
       << escape(p.label) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::string bar_chart(const std::vector<std::string>& categories, const std::vector<Series>& series,
                      const BarOptions& options) {
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& s : series)
    for (const double v : s.values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  const Frame f{1.0, lo < 0 ? -nice_ceiling(-lo) : 0.0, nice_ceiling(hi)};
  std::ostringstream os;
  header(os, options.title);
  y_axis(os, f, options.y_label);
  const double plot_w = kWidth - kLeft - kRight;
  const double group_w = categories.empty() ? plot_w : plot_w / static_cast<double>(categories.size());
  const double bar_w = group_w * 0.8 / static_cast<double>(std::max<std::size_t>(series.size(), 1));
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double gx = kLeft + group_w * static_cast<double>(c) + group_w * 0.1;
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double v = c < series[s].values.size() ? series[s].values[c] : 0.0;
      const double y0 = f.py(0.0);
      const double y1 = f.py(v);
      os << "<rect x=\"" << num(gx + bar_w * static_cast<double>(s)) << "\" y=\"" << num(std::min(y0, y1))
         << "\" width=\"" << num(bar_w) << "\" height=\"" << num(std::abs(y1 - y0)) << "\" fill=\""
         << kPalette[s % kPalette.size()] << "\"><title>" << escape(series[s].name) << ": " << num(v)
         << "</title></rect>\n";
    }
    const double cx = gx + group_w * 0.4;
    os << "<text transform=\"translate(" << num(cx) << "," << num(kHeight - kBottom + 12)
       << ") rotate(30)\" font-size=\"10\">" << escape(categories[c]) << "</text>\n";
  }
  os << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(f.py(0)) << "\" x2=\"" << num(kWidth - kRight) << "\" y2=\""
     << num(f.py(0)) << "\" stroke=\"black\"/>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const double lx = kWidth - kRight - 150;
    const double ly = kTop + 14.0 * static_cast<double>(s);
    os << "<rect x=\"" << num(lx) << "\" y=\"" << num(ly - 8) << "\" width=\"10\" height=\"10\" fill=\""
       << kPalette[s % kPalette.size()] << "\"/>\n";
    os << "<text x=\"" << num(lx + 14) << "\" y=\"" << num(ly + 1) << "\">" << escape(series[s].name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace hoirobust::svg
