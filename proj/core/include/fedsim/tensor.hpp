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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fedsim {

enum class Check { kFinite, kNone };

// Dense row-major array of doubles. Batches are rank-2 (rows = samples).
class Tensor {
 public:
  Tensor() = default;
  // Throws ShapeError when the extents do not cover `values` exactly and,
  // with Check::kFinite, NumericError on NaN/Inf.
  Tensor(std::vector<std::size_t> shape, std::vector<double> values,
         Check check = Check::kFinite);

  static Tensor zeros(std::vector<std::size_t> shape);
  static Tensor matrix(std::size_t rows, std::size_t cols) { return zeros({rows, cols}); }

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  // Leading extent and the flattened width of everything after it.
  std::size_t rows() const noexcept { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const noexcept;

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {values_.data() + i * cols(), cols()};
  }
  std::span<double> row(std::size_t i) noexcept { return {values_.data() + i * cols(), cols()}; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * cols() + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return values_[i * cols() + j];
  }

  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

// Copies the listed rows of `source` into a new rank-2 tensor.
Tensor gather_rows(const Tensor& source, std::span<const std::size_t> rows);

}  // namespace fedsim
