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
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "fedsim/data.hpp"
#include "fedsim/featstats.hpp"
#include "fedsim/nn.hpp"
#include "fedsim/record.hpp"

namespace fedsim::sim {

enum class Algorithm { kFedAvg, kFedProx, kFedImpro };

Algorithm parse_algorithm(std::string_view name);
std::string_view to_string(Algorithm a) noexcept;

struct FeatureSharing {
  double beta_m = 0.9;
  double beta_g = 0.5;
  double sigma_eps = 0.01;
  // n_hat_m / n_m; 1 pairs one sampled feature with every real sample.
  double shared_ratio = 1.0;
  // Clients keep their estimators across rounds; otherwise they re-sync to
  // the broadcast global estimator at the start of every round.
  bool stats_warm_start = true;
  std::uint64_t noise_seed = 0;
};

struct FedConfig {
  std::size_t num_clients = 10;
  std::size_t clients_per_round = 5;
  std::size_t rounds = 100;
  std::size_t local_epochs = 1;
  // Cap on local SGD steps per round; 0 means no cap (run all epochs).
  std::size_t local_iters = 0;
  double lr = 0.05;
  std::size_t batch_size = 32;
  Algorithm algorithm = Algorithm::kFedAvg;
  double prox_mu = 0.0;
  FeatureSharing sharing;
  // Drives client sampling, local shuffles and feature sampling streams.
  std::uint64_t seed = 0;
  std::size_t eval_cadence = 5;
  bool measure_cgv = false;
  // Simulate the selected clients of a round on separate threads.
  bool parallel_clients = false;

  void validate(const nn::SplitModel& model) const;
};

struct ClientResult {
  nn::SplitModel model;
  featstats::ClassFeatureStats stats;
  std::size_t steps = 0;
};

// Local training of one client for one round. `local_stats` is the client's
// estimator at the start of the round (warm or re-synced by the caller).
ClientResult client_update(const nn::SplitModel& global_model,
                           const featstats::ClassFeatureStats& global_stats,
                           featstats::ClassFeatureStats local_stats,
                           const data::ClientShard& shard, const data::LabeledDataset& dataset,
                           const FedConfig& config, std::size_t round);

// Parameter-wise weighted average; weights are renormalized to sum to one.
nn::SplitModel aggregate(std::span<const nn::SplitModel> local_models,
                         std::span<const double> weights);

// Uniform sample of k of num_clients without replacement, sorted.
std::vector<std::size_t> sample_clients(std::size_t num_clients, std::size_t k, std::uint64_t seed,
                                        std::size_t round);

nn::GradientVector pseudo_gradient(const nn::SplitModel& before, const nn::SplitModel& after);

featstats::ClassFeatureStats initial_global_stats(const nn::SplitModel& model,
                                                  const FedConfig& config);

struct RunHooks {
  // Called after every round with the freshly aggregated global model.
  std::function<void(std::size_t round, const nn::SplitModel&)> on_round;
  // Called for each emitted record (eval cadence and the final round).
  std::function<void(const RoundRecord&)> on_record;
};

struct RunResult {
  std::vector<RoundRecord> records;
  nn::SplitModel model;
  featstats::ClassFeatureStats global_stats;
  std::size_t rounds_completed = 0;
};

RunResult run(const FedConfig& config, nn::SplitModel initial_model,
              const data::LabeledDataset& train, const data::LabeledDataset& test,
              const data::PartitionManifest& manifest, const RunHooks& hooks = {});

}  // namespace fedsim::sim
