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
#include <vector>

#include "fedsim/tensor.hpp"

namespace fedsim::data {

struct LabeledDataset {
  Tensor features;  // num_samples x D
  std::vector<int> labels;
  int num_classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.cols(); }
  // Row counts match, labels lie in [0, C), nonempty. Throws otherwise.
  void validate() const;
  std::vector<std::size_t> class_counts() const;
};

LabeledDataset subset(const LabeledDataset& dataset, std::span<const std::size_t> indices);

struct SynthParams {
  int num_classes = 10;
  std::size_t dim = 32;
  std::size_t per_class_n = 100;
  double class_mean_scale = 4.0;
  std::uint64_t seed = 0;
};

// Class c ~ N(mu_c, I) with mu_c a seeded random direction of norm
// class_mean_scale. Samples are class-major.
LabeledDataset synth_dataset(const SynthParams& params);

struct SynthSplit {
  LabeledDataset train;
  LabeledDataset test;
};

// Train set identical to synth_dataset(params); the test set shares the class
// means and continues the same stream.
SynthSplit synth_train_test(const SynthParams& params, std::size_t test_per_class_n);

struct ClientShard {
  int client_id = 0;
  std::vector<std::size_t> indices;  // into the parent dataset, sorted
  std::size_t n = 0;                 // n_m
  double weight = 0.0;               // p_m = n_m / N
};

struct PartitionManifest {
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::size_t min_per_client = 0;
  int num_classes = 0;
  std::size_t num_samples = 0;
  std::vector<std::vector<std::size_t>> client_indices;
  std::vector<std::vector<std::size_t>> class_counts;  // [client][class]

  std::size_t num_clients() const noexcept { return client_indices.size(); }
  std::vector<ClientShard> shards() const;
  // Disjoint cover of [0, num_samples) with counts consistent with labels.
  void validate(const LabeledDataset& dataset) const;
};

struct PartitionOptions {
  std::size_t min_per_client = 2;
  int max_retries = 100;
};

// For each class draws Dirichlet(alpha * 1_M) proportions over clients and
// deals that class's (shuffled) samples accordingly. Redraws the whole
// partition until every client holds >= min_per_client samples; throws
// InfeasibleError once the retry budget is spent.
PartitionManifest dirichlet_partition(const LabeledDataset& dataset, std::size_t num_clients,
                                      double alpha, std::uint64_t seed,
                                      const PartitionOptions& options = {});

// Mean over clients of the Shannon entropy (nats) of its class proportions.
double mean_label_entropy(const PartitionManifest& manifest);

struct Batch {
  std::vector<std::size_t> indices;
  Tensor x;
  std::vector<int> y;
};

// Seeded per-epoch shuffle of the shard, cut into batches; the final short
// batch is kept. Order is a function of (seed, epoch, client_id) only.
std::vector<Batch> batches(const ClientShard& shard, const LabeledDataset& dataset,
                           std::size_t batch_size, std::uint64_t seed, std::uint64_t epoch);

}  // namespace fedsim::data
