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
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "fedsim/tensor.hpp"

namespace fedsim::nn {

enum class Activation { kRelu, kIdentity };

Activation parse_activation(std::string_view name);
std::string_view to_string(Activation a) noexcept;

// Fully connected layer. `weight` is out_dim x in_dim, row-major.
struct DenseLayer {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::vector<double> weight;
  std::vector<double> bias;
  Activation activation = Activation::kIdentity;

  std::size_t param_count() const noexcept { return weight.size() + bias.size(); }
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Flat parameter (or gradient) storage split at the model's split index:
// `low` holds layers [0, s), `high` holds layers [s, L), each layer laid out
// as weight then bias.
struct BlockVector {
  std::vector<double> low;
  std::vector<double> high;

  std::size_t size() const noexcept { return low.size() + high.size(); }
  double squared_norm() const noexcept;
  BlockVector& operator+=(const BlockVector& other);
  BlockVector& operator-=(const BlockVector& other);
  BlockVector& operator*=(double s) noexcept;
  // this += s * other
  BlockVector& axpy(double s, const BlockVector& other);

  friend bool operator==(const BlockVector&, const BlockVector&) = default;
};

using GradientVector = BlockVector;
using ParameterVector = BlockVector;

// Where a layer's parameters live inside a BlockVector.
struct LayerSlice {
  bool high = false;
  std::size_t offset = 0;
  std::size_t count = 0;
};

class SplitModel {
 public:
  // Validates that dimensions compose and 0 < split_index < layers.size().
  SplitModel(std::vector<DenseLayer> layers, std::size_t split_index);

  // Seeded init, uniform in [-1/sqrt(in_dim), 1/sqrt(in_dim)] for weights and
  // biases. `layer_sizes` = {input, hidden..., classes}; hidden layers use
  // `hidden_activation`, the output layer is identity.
  static SplitModel init(std::span<const std::size_t> layer_sizes, std::size_t split_index,
                         Activation hidden_activation, std::uint64_t seed);

  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }
  std::vector<DenseLayer>& mutable_layers() noexcept { return layers_; }
  std::size_t split_index() const noexcept { return split_; }
  std::size_t num_layers() const noexcept { return layers_.size(); }
  std::size_t input_dim() const noexcept { return layers_.front().in_dim; }
  std::size_t feature_dim() const noexcept { return layers_[split_ - 1].out_dim; }
  std::size_t num_classes() const noexcept { return layers_.back().out_dim; }
  std::size_t low_param_count() const noexcept;
  std::size_t high_param_count() const noexcept;
  std::size_t param_count() const noexcept { return low_param_count() + high_param_count(); }
  std::vector<std::size_t> layer_sizes() const;

  std::vector<LayerSlice> layer_slices() const;

  ParameterVector parameters() const;
  void set_parameters(const ParameterVector& params);
  // Zero vector shaped like this model's partition.
  BlockVector zeros_like() const;

  friend bool operator==(const SplitModel&, const SplitModel&) = default;

 private:
  std::vector<DenseLayer> layers_;
  std::size_t split_ = 1;
};

struct ForwardResult {
  Tensor features;  // output of layer split_index - 1, post-activation
  Tensor logits;
};

ForwardResult forward_full(const SplitModel& model, const Tensor& x);
Tensor forward_high(const SplitModel& model, const Tensor& h);

enum class Entry { kRaw, kFeature };

struct LossAndGrad {
  double loss = 0.0;
  GradientVector grad;
  // Split-layer features of the batch; filled for Entry::kRaw only.
  Tensor features;
};

// Mean softmax cross-entropy and its exact gradient. With Entry::kFeature the
// inputs are split-layer features and `grad.low` is all zeros.
LossAndGrad loss_and_grad(const SplitModel& model, const Tensor& inputs,
                          std::span<const int> labels, Entry entry);

// theta -= lr * grad on both blocks. lr must be finite and >= 0.
void apply_update(SplitModel& model, const GradientVector& grad, double lr);

}  // namespace fedsim::nn
