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

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace hoirobust {

/// Interleaved 8-bit RGB pixel buffer, row-major.
class Image {
 public:
  static constexpr int kChannels = 3;

  Image() = default;
  Image(int width, int height, std::uint8_t fill = 0);
  Image(int width, int height, std::vector<std::uint8_t> data);

  [[nodiscard]] int width() const noexcept { return width_; }
  [[nodiscard]] int height() const noexcept { return height_; }
  [[nodiscard]] bool empty() const noexcept { return width_ == 0 || height_ == 0; }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

  [[nodiscard]] std::uint8_t& at(int x, int y, int c) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
  }
  [[nodiscard]] std::uint8_t at(int x, int y, int c) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
  }

  [[nodiscard]] std::span<std::uint8_t> pixels() noexcept { return data_; }
  [[nodiscard]] std::span<const std::uint8_t> pixels() const noexcept { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Saturating conversion used by every float-space image operation.
[[nodiscard]] inline std::uint8_t to_u8(double v) noexcept {
  if (!(v > 0.0)) return 0;
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(v + 0.5);
}

/// Bilinear resize with half-pixel centers.
[[nodiscard]] Image resize_bilinear(const Image& src, int width, int height);

// PNG and JPEG codecs (libpng / libjpeg). Failures throw DataError.
[[nodiscard]] Image read_image(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image& image);
[[nodiscard]] std::vector<std::uint8_t> encode_png(const Image& image);
[[nodiscard]] std::vector<std::uint8_t> encode_jpeg(const Image& image, int quality);
[[nodiscard]] Image decode_jpeg(std::span<const std::uint8_t> bytes);

}  // namespace hoirobust
