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

#include "hoirobust/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>

namespace hoirobust::f4m {
namespace {

std::size_t product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void require_rank(const Tensor& t, std::size_t rank, const char* op) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " + t.shape_string());
  }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill) : shape_(std::move(shape)), data_(product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != product(shape_)) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape " + shape_string());
  }
  if (!all_finite()) throw ShapeError("tensor holds a non-finite value");
}

std::span<const double> Tensor::row(std::size_t i) const {
  require_rank(*this, 2, "row");
  return std::span<const double>(data_).subspan(i * shape_[1], shape_[1]);
}

Tensor Tensor::reshaped(std::vector<std::size_t> shape) const { return Tensor(std::move(shape), data_); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Tensor::shape_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape_[i]);
  }
  return s + "]";
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  if (a.dim(1) != b.dim(0)) throw ShapeError("matmul: " + a.shape_string() + " x " + b.shape_string());
  const std::size_t n = a.dim(0);
  const std::size_t k = a.dim(1);
  const std::size_t m = b.dim(1);
  Tensor out({n, m});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a.at(i, p);
      for (std::size_t j = 0; j < m; ++j) out.at(i, j) += av * b.at(p, j);
    }
  return out;
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  Tensor out({a.dim(1), a.dim(0)});
  for (std::size_t i = 0; i < a.dim(0); ++i)
    for (std::size_t j = 0; j < a.dim(1); ++j) out.at(j, i) = a.at(i, j);
  return out;
}

Tensor concat_rows(std::span<const Tensor> parts) {
  std::size_t rows = 0;
  std::optional<std::size_t> cols;
  for (const auto& p : parts) {
    require_rank(p, 2, "concat_rows");
    if (cols && p.dim(1) != *cols) throw ShapeError("concat_rows: column mismatch " + p.shape_string());
    cols = p.dim(1);
    rows += p.dim(0);
  }
  std::vector<double> data;
  data.reserve(rows * cols.value_or(0));
  for (const auto& p : parts) data.insert(data.end(), p.data().begin(), p.data().end());
  return Tensor({rows, cols.value_or(0)}, std::move(data));
}

Tensor slice_rows(const Tensor& a, std::size_t begin, std::size_t end) {
  require_rank(a, 2, "slice_rows");
  if (begin > end || end > a.dim(0)) throw ShapeError("slice_rows: range out of bounds");
  const std::size_t cols = a.dim(1);
  std::vector<double> data(a.data().begin() + static_cast<std::ptrdiff_t>(begin * cols),
                           a.data().begin() + static_cast<std::ptrdiff_t>(end * cols));
  return Tensor({end - begin, cols}, std::move(data));
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) throw ShapeError("add: " + a.shape_string() + " vs " + b.shape_string());
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
  return out;
}

double mean(const Tensor& a) noexcept {
  if (a.empty()) return 0.0;
  return std::accumulate(a.data().begin(), a.data().end(), 0.0) / static_cast<double>(a.size());
}

}  // namespace hoirobust::f4m
