// Copyright 2026 The fedsim Authors
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

#include "fedsim/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>

#include "fedsim/error.hpp"

namespace fedsim {

namespace {

std::size_t extent_product(const std::vector<std::size_t>& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values, Check check)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_.empty()) throw ShapeError("tensor shape must have at least one extent");
  if (extent_product(shape_) != values_.size()) {
    throw ShapeError("tensor shape covers " + std::to_string(extent_product(shape_)) +
                     " values but " + std::to_string(values_.size()) + " were given");
  }
  if (check == Check::kFinite && !all_finite()) {
    throw NumericError("tensor contains non-finite values");
  }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  const std::size_t n = shape.empty() ? 0 : extent_product(shape);
  return Tensor(std::move(shape), std::vector<double>(n, 0.0), Check::kNone);
}

std::size_t Tensor::cols() const noexcept {
  if (shape_.empty()) return 0;
  std::size_t c = 1;
  for (std::size_t i = 1; i < shape_.size(); ++i) c *= shape_[i];
  return c;
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

Tensor gather_rows(const Tensor& source, std::span<const std::size_t> rows) {
  const std::size_t width = source.cols();
  std::vector<double> out;
  out.reserve(rows.size() * width);
  for (std::size_t r : rows) {
    if (r >= source.rows()) throw ShapeError("row index " + std::to_string(r) + " out of range");
    auto src = source.row(r);
    out.insert(out.end(), src.begin(), src.end());
  }
  return Tensor({rows.size(), width}, std::move(out), Check::kNone);
}

}  // namespace fedsim
