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
#include <optional>
#include <span>
#include <vector>

#include "fedsim/data.hpp"
#include "fedsim/nn.hpp"
#include "fedsim/record.hpp"

namespace fedsim::metrics {

enum class CgvMode { kPerClient, kPerSample };

struct ClientCgv {
  int client_id = 0;
  double low_sq = 0.0;
  double high_sq = 0.0;
  double total_sq = 0.0;
};

struct CgvReport {
  CgvMode mode = CgvMode::kPerClient;
  std::vector<ClientCgv> clients;
  // p_m-weighted averages of the per-client terms.
  double low_sq = 0.0;
  double high_sq = 0.0;
  double total_sq = 0.0;
};

// Distances of each gradient from their weighted mean. Weights are
// renormalized to sum to one.
CgvReport cgv_from_gradients(std::span<const nn::GradientVector> grads,
                             std::span<const double> weights,
                             std::span<const int> client_ids = {});

// per_client: full-batch gradient per shard against g_bar = sum p_m g_m.
// per_sample: mean over each shard's samples of ||grad f(x, y) - g_bar||^2.
CgvReport cgv(const nn::SplitModel& model, std::span<const data::ClientShard> shards,
              const data::LabeledDataset& dataset, CgvMode mode = CgvMode::kPerClient);

struct SharedFeatureBatch {
  Tensor features;
  std::vector<int> labels;
};

// CGV under the objective with shared features. Every client holds the same
// shared batch at n_hat_m = shared_ratio * n_m. A client's gradient keeps the
// raw low block and mixes the high block as
// (n_m * g_raw + n_hat_m * g_shared) / (n_m + n_hat_m); weights are
// (n_m + n_hat_m) / (N + N_hat).
CgvReport cgv_fedimpro(const nn::SplitModel& model, std::span<const data::ClientShard> shards,
                       const data::LabeledDataset& dataset, const SharedFeatureBatch& shared,
                       double shared_ratio);

struct ClientDivergence {
  double total = 0.0;
  double low = 0.0;
  double high = 0.0;
  std::vector<double> per_layer;
};

struct DivergenceReport {
  std::vector<ClientDivergence> clients;
  // Means over clients of the per-client norms.
  double total = 0.0;
  double low = 0.0;
  double high = 0.0;
  std::vector<double> per_layer;
};

DivergenceReport weight_divergence(const nn::SplitModel& global,
                                   std::span<const nn::SplitModel> locals);

enum class GroundMetric { kL2, kSquaredL2 };

struct TransportOptions {
  std::size_t max_points_per_class = 512;
  std::uint64_t seed = 0;
};

// Symmetric class-conditional OT distance between two labeled feature sets:
// 0.5 * sum_c P_A(c) W_c + 0.5 * sum_c P_B(c) W_c with W_c the exact OT cost
// between the uniform empirical measures of class c. Throws
// MissingClassError when a class appears on one side only.
double conditional_wasserstein(const data::LabeledDataset& a, const data::LabeledDataset& b,
                               GroundMetric metric = GroundMetric::kL2,
                               const TransportOptions& options = {});

// Argmax accuracy; ties go to the lowest class index.
double evaluate(const nn::SplitModel& model, const data::LabeledDataset& test);

std::optional<std::size_t> rounds_to_target(std::span<const RoundRecord> records,
                                            double target_accuracy);

}  // namespace fedsim::metrics
