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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hoirobust/core.hpp"

namespace hoirobust::f4m {

class ShapeError : public InvariantError {
 public:
  using InvariantError::InvariantError;
};

/// Dense row-major double tensor.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  [[nodiscard]] const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  [[nodiscard]] std::size_t rank() const noexcept { return shape_.size(); }
  [[nodiscard]] std::size_t dim(std::size_t i) const { return shape_.at(i); }
  [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
  [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

  [[nodiscard]] std::span<double> data() noexcept { return data_; }
  [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

  [[nodiscard]] double& at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  [[nodiscard]] double at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  [[nodiscard]] double& at(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  [[nodiscard]] double at(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  /// Row `i` of a rank-2 tensor.
  [[nodiscard]] std::span<const double> row(std::size_t i) const;

  [[nodiscard]] Tensor reshaped(std::vector<std::size_t> shape) const;
  [[nodiscard]] bool all_finite() const noexcept;
  [[nodiscard]] std::string shape_string() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

/// [n,k] x [k,m] -> [n,m].
[[nodiscard]] Tensor matmul(const Tensor& a, const Tensor& b);
[[nodiscard]] Tensor transpose(const Tensor& a);
/// Stacks rank-2 tensors with equal column counts.
[[nodiscard]] Tensor concat_rows(std::span<const Tensor> parts);
[[nodiscard]] Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end);
[[nodiscard]] Tensor add(const Tensor& a, const Tensor& b);
[[nodiscard]] double mean(const Tensor& a) noexcept;

}  // namespace hoirobust::f4m
