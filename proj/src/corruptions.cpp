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

#include "hoirobust/corruptions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "hoirobust/core.hpp"

namespace hoirobust::cma {
namespace {

using Rng = std::mt19937_64;

struct NamedKind {
  CorruptionKind kind;
  const char* name;
};

constexpr std::array<NamedKind, 12> kKinds = {{
    {CorruptionKind::kGaussianNoise, "gaussian-noise"},
    {CorruptionKind::kShotNoise, "shot-noise"},
    {CorruptionKind::kImpulseNoise, "impulse-noise"},
    {CorruptionKind::kDefocusBlur, "defocus-blur"},
    {CorruptionKind::kGlassBlur, "glass-blur"},
    {CorruptionKind::kZoomBlur, "zoom-blur"},
    {CorruptionKind::kFrost, "frost"},
    {CorruptionKind::kBrightness, "brightness"},
    {CorruptionKind::kContrast, "contrast"},
    {CorruptionKind::kElasticTransform, "elastic-transform"},
    {CorruptionKind::kPixelate, "pixelate"},
    {CorruptionKind::kJpegCompression, "jpeg-compression"},
}};

int reflect(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
  }
  return i;
}

Plane channel_plane(const Image& img, int c) {
  Plane p{img.width(), img.height(), std::vector<double>(static_cast<std::size_t>(img.width()) * img.height())};
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) p.at(x, y) = img.at(x, y, c);
  return p;
}

void store_plane(Image& img, const Plane& p, int c) {
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) img.at(x, y, c) = to_u8(p.at(x, y));
}

/// Normalised 2-D convolution with reflected borders.
Plane convolve(const Plane& src, const std::vector<double>& kernel, int radius) {
  const int k = 2 * radius + 1;
  Plane out{src.width, src.height, std::vector<double>(src.data.size())};
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      double acc = 0.0;
      for (int dy = -radius; dy <= radius; ++dy) {
        const int yy = reflect(y + dy, src.height);
        for (int dx = -radius; dx <= radius; ++dx) {
          const double w = kernel[static_cast<std::size_t>(dy + radius) * k + (dx + radius)];
          if (w != 0.0) acc += w * src.at(reflect(x + dx, src.width), yy);
        }
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

double sample_bilinear(const Plane& p, double fx, double fy) {
  fx = std::clamp(fx, 0.0, static_cast<double>(p.width - 1));
  fy = std::clamp(fy, 0.0, static_cast<double>(p.height - 1));
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const int x1 = std::min(x0 + 1, p.width - 1);
  const int y1 = std::min(y0 + 1, p.height - 1);
  const double wx = fx - x0;
  const double wy = fy - y0;
  return (p.at(x0, y0) * (1 - wx) + p.at(x1, y0) * wx) * (1 - wy) + (p.at(x0, y1) * (1 - wx) + p.at(x1, y1) * wx) * wy;
}

template <typename Fn>
Image map_planes(const Image& img, Fn&& fn) {
  Image out(img.width(), img.height());
  for (int c = 0; c < Image::kChannels; ++c) store_plane(out, fn(channel_plane(img, c)), c);
  return out;
}

Image gaussian_noise(const Image& img, int s, Rng& rng) {
  constexpr std::array<double, 5> kSigma = {0.08, 0.12, 0.18, 0.26, 0.38};
  std::normal_distribution<double> noise(0.0, kSigma[s - 1] * 255.0);
  Image out = img;
  for (auto& v : out.pixels()) v = to_u8(v + noise(rng));
  return out;
}

Image shot_noise(const Image& img, int s, Rng& rng) {
  constexpr std::array<double, 5> kPhotons = {60, 25, 12, 5, 3};
  const double c = kPhotons[s - 1];
  Image out = img;
  for (auto& v : out.pixels()) {
    const double mean = v / 255.0 * c;
    const double draw = mean > 0.0 ? static_cast<double>(std::poisson_distribution<long>(mean)(rng)) : 0.0;
    v = to_u8(draw / c * 255.0);
  }
  return out;
}

Image impulse_noise(const Image& img, int s, Rng& rng) {
  constexpr std::array<double, 5> kAmount = {0.03, 0.06, 0.09, 0.17, 0.27};
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Image out = img;
  for (auto& v : out.pixels()) {
    if (u(rng) < kAmount[s - 1]) v = u(rng) < 0.5 ? 0 : 255;
  }
  return out;
}

std::vector<double> gaussian_kernel_1d(double sigma, int& radius) {
  radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (auto& v : k) v /= sum;
  return k;
}

Image defocus_blur(const Image& img, int s) {
  constexpr std::array<std::pair<int, double>, 5> kParams = {{{3, 0.1}, {4, 0.5}, {6, 0.5}, {8, 0.5}, {10, 0.5}}};
  const auto [radius, alias] = kParams[s - 1];
  const int k = 2 * radius + 1;
  std::vector<double> disk(static_cast<std::size_t>(k) * k, 0.0);
  double sum = 0.0;
  for (int y = -radius; y <= radius; ++y)
    for (int x = -radius; x <= radius; ++x)
      if (x * x + y * y <= radius * radius) {
        disk[static_cast<std::size_t>(y + radius) * k + (x + radius)] = 1.0;
        sum += 1.0;
      }
  for (auto& v : disk) v /= sum;
  return map_planes(img, [&](const Plane& p) { return gaussian_blur(convolve(p, disk, radius), alias); });
}

Image glass_blur(const Image& img, int s, Rng& rng) {
  struct Params {
    double sigma;
    int max_delta;
    int iterations;
  };
  constexpr std::array<Params, 5> kParams = {{{0.7, 1, 2}, {0.9, 2, 1}, {1.0, 2, 3}, {1.1, 3, 2}, {1.5, 4, 2}}};
  const auto p = kParams[s - 1];
  Image out = map_planes(img, [&](const Plane& pl) { return gaussian_blur(pl, p.sigma); });
  std::uniform_int_distribution<int> delta(-p.max_delta, p.max_delta);
  const int w = out.width();
  const int h = out.height();
  for (int it = 0; it < p.iterations; ++it) {
    for (int y = h - p.max_delta - 1; y >= p.max_delta; --y) {
      for (int x = w - p.max_delta - 1; x >= p.max_delta; --x) {
        const int dx = delta(rng);
        const int dy = delta(rng);
        for (int c = 0; c < Image::kChannels; ++c) std::swap(out.at(x, y, c), out.at(x + dx, y + dy, c));
      }
    }
  }
  return map_planes(out, [&](const Plane& pl) { return gaussian_blur(pl, p.sigma); });
}

Image zoom_blur(const Image& img, int s) {
  constexpr std::array<std::pair<double, double>, 5> kRanges = {
      {{1.11, 0.01}, {1.16, 0.01}, {1.21, 0.02}, {1.26, 0.02}, {1.31, 0.03}}};
  const auto [stop, step] = kRanges[s - 1];
  std::vector<double> zooms;
  for (int i = 0;; ++i) {
    const double z = 1.0 + i * step;
    if (z >= stop - 1e-9) break;
    zooms.push_back(z);
  }
  return map_planes(img, [&](const Plane& p) {
    Plane acc = p;
    const double cx = (p.width - 1) / 2.0;
    const double cy = (p.height - 1) / 2.0;
    for (double z : zooms) {
      for (int y = 0; y < p.height; ++y)
        for (int x = 0; x < p.width; ++x) acc.at(x, y) += sample_bilinear(p, cx + (x - cx) / z, cy + (y - cy) / z);
    }
    for (auto& v : acc.data) v /= static_cast<double>(zooms.size() + 1);
    return acc;
  });
}

/// Procedural ice texture in [0,1]: octave value noise plus crystal streaks.
Plane frost_texture(int w, int h, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Plane tex{w, h, std::vector<double>(static_cast<std::size_t>(w) * h, 0.0)};
  double amp = 0.5;
  double total = 0.0;
  for (int cell = std::max(2, std::min(w, h) / 4); cell >= 2; cell /= 2) {
    const int gw = w / cell + 2;
    const int gh = h / cell + 2;
    Plane grid{gw, gh, std::vector<double>(static_cast<std::size_t>(gw) * gh)};
    for (auto& v : grid.data) v = u(rng);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) tex.at(x, y) += amp * sample_bilinear(grid, static_cast<double>(x) / cell, static_cast<double>(y) / cell);
    total += amp;
    amp *= 0.5;
  }
  for (auto& v : tex.data) v /= total;
  const int streaks = std::max(4, (w * h) / 400);
  for (int i = 0; i < streaks; ++i) {
    double x = u(rng) * w;
    double y = u(rng) * h;
    const double angle = u(rng) * 6.283185307179586;
    const int len = 3 + static_cast<int>(u(rng) * std::max(4, std::min(w, h) / 6));
    for (int t = 0; t < len; ++t) {
      const int xi = static_cast<int>(x);
      const int yi = static_cast<int>(y);
      if (xi >= 0 && yi >= 0 && xi < w && yi < h) tex.at(xi, yi) = std::min(1.0, tex.at(xi, yi) + 0.35);
      x += std::cos(angle);
      y += std::sin(angle);
    }
  }
  return gaussian_blur(tex, 0.6);
}

Image frost(const Image& img, int s, Rng& rng) {
  constexpr std::array<std::pair<double, double>, 5> kMix = {{{1.0, 0.4}, {0.8, 0.6}, {0.7, 0.7}, {0.65, 0.7}, {0.6, 0.75}}};
  constexpr std::array<double, 3> kTint = {0.86, 0.93, 1.0};
  const auto [keep, add] = kMix[s - 1];
  const Plane tex = frost_texture(img.width(), img.height(), rng);
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < Image::kChannels; ++c)
        out.at(x, y, c) = to_u8(keep * img.at(x, y, c) + add * 255.0 * kTint[c] * tex.at(x, y));
  return out;
}

Image brightness(const Image& img, int s) {
  constexpr std::array<double, 5> kShift = {0.1, 0.2, 0.3, 0.4, 0.5};
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double r = img.at(x, y, 0) / 255.0;
      const double g = img.at(x, y, 1) / 255.0;
      const double b = img.at(x, y, 2) / 255.0;
      const double v = std::max({r, g, b});
      const double mn = std::min({r, g, b});
      const double sat = v > 0.0 ? (v - mn) / v : 0.0;
      double hue = 0.0;
      if (v > mn) {
        const double d = v - mn;
        if (v == r) hue = std::fmod((g - b) / d + 6.0, 6.0);
        else if (v == g) hue = (b - r) / d + 2.0;
        else hue = (r - g) / d + 4.0;
      }
      const double nv = std::min(1.0, v + kShift[s - 1]);
      // HSV back to RGB with the shifted value.
      const double chroma = nv * sat;
      const double xh = chroma * (1.0 - std::fabs(std::fmod(hue, 2.0) - 1.0));
      double rgb[3] = {0, 0, 0};
      const int sector = static_cast<int>(hue) % 6;
      switch (sector) {
        case 0: rgb[0] = chroma; rgb[1] = xh; break;
        case 1: rgb[0] = xh; rgb[1] = chroma; break;
        case 2: rgb[1] = chroma; rgb[2] = xh; break;
        case 3: rgb[1] = xh; rgb[2] = chroma; break;
        case 4: rgb[0] = xh; rgb[2] = chroma; break;
        default: rgb[0] = chroma; rgb[2] = xh; break;
      }
      const double m = nv - chroma;
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = to_u8((rgb[c] + m) * 255.0);
    }
  }
  return out;
}

Image contrast(const Image& img, int s) {
  constexpr std::array<double, 5> kFactor = {0.4, 0.3, 0.2, 0.1, 0.05};
  const double f = kFactor[s - 1];
  Image out(img.width(), img.height());
  const double n = static_cast<double>(img.width()) * img.height();
  for (int c = 0; c < Image::kChannels; ++c) {
    double sum = 0.0;
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) sum += img.at(x, y, c);
    const double mean = sum / n;
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) out.at(x, y, c) = to_u8((img.at(x, y, c) - mean) * f + mean);
  }
  return out;
}

Image elastic_transform(const Image& img, int s, Rng& rng) {
  // Max displacement and smoothing, both as fractions of the shorter side.
  constexpr std::array<std::pair<double, double>, 5> kParams = {
      {{0.010, 0.08}, {0.018, 0.07}, {0.026, 0.06}, {0.034, 0.05}, {0.042, 0.04}}};
  const double side = std::min(img.width(), img.height());
  const auto [alpha_frac, sigma_frac] = kParams[s - 1];
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto field = [&] {
    Plane f{img.width(), img.height(), std::vector<double>(static_cast<std::size_t>(img.width()) * img.height())};
    for (auto& v : f.data) v = u(rng);
    f = gaussian_blur(f, std::max(0.5, sigma_frac * side));
    double peak = 0.0;
    for (double v : f.data) peak = std::max(peak, std::fabs(v));
    if (peak > 0.0)
      for (auto& v : f.data) v *= alpha_frac * side / peak;
    return f;
  };
  const Plane dx = field();
  const Plane dy = field();
  return map_planes(img, [&](const Plane& p) {
    Plane out{p.width, p.height, std::vector<double>(p.data.size())};
    for (int y = 0; y < p.height; ++y)
      for (int x = 0; x < p.width; ++x) out.at(x, y) = sample_bilinear(p, x + dx.at(x, y), y + dy.at(x, y));
    return out;
  });
}

Image pixelate(const Image& img, int s) {
  constexpr std::array<double, 5> kScale = {0.6, 0.5, 0.4, 0.3, 0.25};
  const int sw = std::max(1, static_cast<int>(img.width() * kScale[s - 1]));
  const int sh = std::max(1, static_cast<int>(img.height() * kScale[s - 1]));
  // Box-average down, nearest up.
  Image small(sw, sh);
  for (int y = 0; y < sh; ++y) {
    const int y0 = y * img.height() / sh;
    const int y1 = std::max(y0 + 1, (y + 1) * img.height() / sh);
    for (int x = 0; x < sw; ++x) {
      const int x0 = x * img.width() / sw;
      const int x1 = std::max(x0 + 1, (x + 1) * img.width() / sw);
      for (int c = 0; c < Image::kChannels; ++c) {
        double sum = 0.0;
        for (int yy = y0; yy < y1; ++yy)
          for (int xx = x0; xx < x1; ++xx) sum += img.at(xx, yy, c);
        small.at(x, y, c) = to_u8(sum / ((y1 - y0) * (x1 - x0)));
      }
    }
  }
  Image out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < Image::kChannels; ++c)
        out.at(x, y, c) = small.at(x * sw / img.width(), y * sh / img.height(), c);
  return out;
}

Image jpeg_compression(const Image& img, int s) {
  constexpr std::array<int, 5> kQuality = {25, 18, 15, 10, 7};
  return decode_jpeg(encode_jpeg(img, kQuality[s - 1]));
}

}  // namespace

const char* to_string(CorruptionKind kind) noexcept {
  for (const auto& k : kKinds)
    if (k.kind == kind) return k.name;
  return "unknown";
}

CorruptionKind parse_corruption(const std::string& name) {
  std::string norm = name;
  std::replace(norm.begin(), norm.end(), '_', '-');
  for (const auto& k : kKinds)
    if (norm == k.name) return k.kind;
  throw ConfigError("unknown corruption kind '" + name + "'");
}

const std::vector<CorruptionKind>& corruption_registry() {
  static const std::vector<CorruptionKind> kRegistry = [] {
    std::vector<CorruptionKind> v;
    for (const auto& k : kKinds) v.push_back(k.kind);
    return v;
  }();
  return kRegistry;
}

std::string CorruptionSpec::label() const { return std::string(to_string(kind)) + "-s" + std::to_string(severity); }

std::vector<CorruptionSpec> default_specs(int severity) {
  std::vector<CorruptionSpec> out;
  for (auto k : corruption_registry()) out.push_back({k, severity});
  return out;
}

Plane gaussian_blur(const Plane& src, double sigma) {
  if (sigma <= 0.0) return src;
  int radius = 0;
  const auto k = gaussian_kernel_1d(sigma, radius);
  Plane tmp{src.width, src.height, std::vector<double>(src.data.size())};
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * src.at(reflect(x + i, src.width), y);
      tmp.at(x, y) = acc;
    }
  Plane out{src.width, src.height, std::vector<double>(src.data.size())};
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x) {
      double acc = 0.0;
      for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * tmp.at(x, reflect(y + i, src.height));
      out.at(x, y) = acc;
    }
  return out;
}

Image corrupt(const Image& image, const CorruptionSpec& spec, std::uint64_t seed) {
  if (spec.severity < 0 || spec.severity > kMaxSeverity) {
    throw ConfigError("corruption severity " + std::to_string(spec.severity) + " outside 0..5");
  }
  if (image.empty()) throw DataError("cannot corrupt an empty image");
  if (spec.severity == 0) return image;
  Rng rng(seed);
  const int s = spec.severity;
  switch (spec.kind) {
    case CorruptionKind::kGaussianNoise: return gaussian_noise(image, s, rng);
    case CorruptionKind::kShotNoise: return shot_noise(image, s, rng);
    case CorruptionKind::kImpulseNoise: return impulse_noise(image, s, rng);
    case CorruptionKind::kDefocusBlur: return defocus_blur(image, s);
    case CorruptionKind::kGlassBlur: return glass_blur(image, s, rng);
    case CorruptionKind::kZoomBlur: return zoom_blur(image, s);
    case CorruptionKind::kFrost: return frost(image, s, rng);
    case CorruptionKind::kBrightness: return brightness(image, s);
    case CorruptionKind::kContrast: return contrast(image, s);
    case CorruptionKind::kElasticTransform: return elastic_transform(image, s, rng);
    case CorruptionKind::kPixelate: return pixelate(image, s);
    case CorruptionKind::kJpegCompression: return jpeg_compression(image, s);
  }
  throw ConfigError("unknown corruption kind");
}

}  // namespace hoirobust::cma
