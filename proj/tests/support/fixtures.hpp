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

#include <cstdint>
#include <random>
#include <vector>

#include "fedsim/data.hpp"
#include "fedsim/nn.hpp"
#include "fedsim/tensor.hpp"

namespace fedsim::testing {

inline Tensor random_batch(std::uint64_t seed, std::size_t rows, std::size_t cols) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(rows * cols);
  for (double& x : v) x = g(rng);
  return Tensor({rows, cols}, std::move(v));
}

inline std::vector<int> random_labels(std::uint64_t seed, std::size_t n, int classes) {
  std::mt19937_64 rng(seed ^ 0xabcdefULL);
  std::uniform_int_distribution<int> u(0, classes - 1);
  std::vector<int> y(n);
  for (int& v : y) v = u(rng);
  return y;
}

// A dense layer with explicit weights (row-major out x in).
inline nn::DenseLayer layer(std::size_t in, std::size_t out, std::vector<double> w,
                            std::vector<double> b, nn::Activation act = nn::Activation::kIdentity) {
  return {in, out, std::move(w), std::move(b), act};
}

// Hand-made labeled dataset from rows.
inline data::LabeledDataset dataset(std::vector<std::vector<double>> rows, std::vector<int> labels,
                                    int classes) {
  const std::size_t d = rows.front().size();
  std::vector<double> flat;
  for (const auto& r : rows) flat.insert(flat.end(), r.begin(), r.end());
  data::LabeledDataset ds;
  ds.features = Tensor({rows.size(), d}, std::move(flat));
  ds.labels = std::move(labels);
  ds.num_classes = classes;
  return ds;
}

}  // namespace fedsim::testing
