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

#include "fedsim/sim.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <numeric>
#include <optional>
#include <string>

#include "fedsim/error.hpp"
#include "fedsim/metrics.hpp"
#include "fedsim/rng.hpp"

namespace fedsim::sim {

Algorithm parse_algorithm(std::string_view name) {
  if (name == "fedavg") return Algorithm::kFedAvg;
  if (name == "fedprox") return Algorithm::kFedProx;
  if (name == "fedimpro") return Algorithm::kFedImpro;
  throw ArgumentError("unknown algorithm '" + std::string(name) + "'");
}

std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::kFedAvg:
      return "fedavg";
    case Algorithm::kFedProx:
      return "fedprox";
    case Algorithm::kFedImpro:
      return "fedimpro";
  }
  return "unknown";
}

void FedConfig::validate(const nn::SplitModel& model) const {
  if (num_clients < 1) throw ArgumentError("num_clients must be >= 1");
  if (clients_per_round < 1 || clients_per_round > num_clients) {
    throw ArgumentError("clients_per_round must lie in [1, num_clients]");
  }
  if (local_epochs < 1) throw ArgumentError("local_epochs must be >= 1");
  if (!std::isfinite(lr) || lr < 0.0) throw ArgumentError("lr must be finite and >= 0");
  if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  if (!std::isfinite(prox_mu) || prox_mu < 0.0) throw ArgumentError("prox_mu must be >= 0");
  if (eval_cadence < 1) throw ArgumentError("eval_cadence must be >= 1");
  if (!(sharing.shared_ratio >= 0.0) || !std::isfinite(sharing.shared_ratio)) {
    throw ArgumentError("shared_ratio must be finite and >= 0");
  }
  if (!(sharing.sigma_eps >= 0.0) || !std::isfinite(sharing.sigma_eps)) {
    throw ArgumentError("sigma_eps must be finite and >= 0");
  }
  for (double b : {sharing.beta_m, sharing.beta_g}) {
    if (!(b >= 0.0 && b <= 1.0)) throw ArgumentError("momentum coefficients must lie in [0, 1]");
  }
  if (model.split_index() == 0 || model.split_index() >= model.num_layers()) {
    throw ArgumentError("split index is not valid for the model");
  }
}

ClientResult client_update(const nn::SplitModel& global_model,
                           const featstats::ClassFeatureStats& global_stats,
                           featstats::ClassFeatureStats local_stats,
                           const data::ClientShard& shard, const data::LabeledDataset& dataset,
                           const FedConfig& config, std::size_t round) {
  const bool impro = config.algorithm == Algorithm::kFedImpro;
  const bool prox = config.algorithm == Algorithm::kFedProx && config.prox_mu > 0.0;
  if (impro && (global_stats.dim() != global_model.feature_dim() ||
                local_stats.dim() != global_model.feature_dim())) {
    throw ShapeError("feature stats do not match the model's split-layer width");
  }

  ClientResult result{global_model, std::move(local_stats), 0};
  result.stats.begin_round();
  nn::ParameterVector anchor;
  if (prox) anchor = global_model.parameters();
  Engine feature_rng = make_engine(config.seed, Stream::kFeatureSampling,
                                   {round, static_cast<std::uint64_t>(shard.client_id)});

  for (std::size_t e = 0; e < config.local_epochs; ++e) {
    const std::uint64_t epoch = round * config.local_epochs + e;
    for (const auto& batch : data::batches(shard, dataset, config.batch_size, config.seed, epoch)) {
      if (config.local_iters > 0 && result.steps >= config.local_iters) return result;
      auto raw = nn::loss_and_grad(result.model, batch.x, batch.y, nn::Entry::kRaw);
      nn::GradientVector grad = std::move(raw.grad);

      if (impro) {
        featstats::client_update(result.stats, raw.features, batch.y);
        const std::size_t n = batch.y.size();
        const auto n_hat = static_cast<std::size_t>(
            std::llround(config.sharing.shared_ratio * static_cast<double>(n)));
        if (n_hat > 0) {
          std::vector<int> labels(n_hat);
          for (std::size_t k = 0; k < n_hat; ++k) labels[k] = batch.y[k % n];
          const Tensor h_hat = featstats::sample_features(global_stats, labels, feature_rng);
          const auto shared = nn::loss_and_grad(result.model, h_hat, labels, nn::Entry::kFeature);
          // Loss is (1/n) * [sum of raw terms + sum of shared terms].
          const double scale = static_cast<double>(n_hat) / static_cast<double>(n);
          for (std::size_t k = 0; k < grad.high.size(); ++k) grad.high[k] += scale * shared.grad.high[k];
        }
      }
      if (prox) {
        nn::ParameterVector drift = result.model.parameters();
        drift -= anchor;
        grad.axpy(config.prox_mu, drift);
      }
      nn::apply_update(result.model, grad, config.lr);
      ++result.steps;
    }
  }
  return result;
}

nn::SplitModel aggregate(std::span<const nn::SplitModel> local_models,
                         std::span<const double> weights) {
  if (local_models.empty()) throw ArgumentError("aggregate needs at least one model");
  if (weights.size() != local_models.size()) throw ShapeError("one weight per model required");
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(sum > 0.0) || !std::isfinite(sum)) throw ArgumentError("aggregation weights must sum to > 0");
  const auto& first = local_models.front();
  nn::ParameterVector acc = first.zeros_like();
  for (std::size_t i = 0; i < local_models.size(); ++i) {
    const auto& m = local_models[i];
    if (m.layer_sizes() != first.layer_sizes() || m.split_index() != first.split_index()) {
      throw ShapeError("models to aggregate have different shapes");
    }
    acc.axpy(weights[i] / sum, m.parameters());
  }
  nn::SplitModel out = first;
  out.set_parameters(acc);
  return out;
}

std::vector<std::size_t> sample_clients(std::size_t num_clients, std::size_t k, std::uint64_t seed,
                                        std::size_t round) {
  if (k > num_clients) throw ArgumentError("cannot sample more clients than exist");
  std::vector<std::size_t> ids(num_clients);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  Engine rng = make_engine(seed, Stream::kClientSampling, {round});
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, num_clients - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  ids.resize(k);
  std::sort(ids.begin(), ids.end());
  return ids;
}

nn::GradientVector pseudo_gradient(const nn::SplitModel& before, const nn::SplitModel& after) {
  if (before.layer_sizes() != after.layer_sizes() || before.split_index() != after.split_index()) {
    throw ShapeError("pseudo_gradient needs models of the same shape");
  }
  nn::GradientVector delta = after.parameters();
  delta -= before.parameters();
  return delta;
}

featstats::ClassFeatureStats initial_global_stats(const nn::SplitModel& model,
                                                  const FedConfig& config) {
  return {static_cast<int>(model.num_classes()), model.feature_dim(), config.sharing.beta_g};
}

RunResult run(const FedConfig& config, nn::SplitModel initial_model,
              const data::LabeledDataset& train, const data::LabeledDataset& test,
              const data::PartitionManifest& manifest, const RunHooks& hooks) {
  config.validate(initial_model);
  manifest.validate(train);
  if (manifest.num_clients() != config.num_clients) {
    throw ArgumentError("manifest has " + std::to_string(manifest.num_clients()) +
                        " clients but the config asks for " + std::to_string(config.num_clients));
  }
  const auto shards = manifest.shards();
  const bool impro = config.algorithm == Algorithm::kFedImpro;

  RunResult result{{}, std::move(initial_model), {}, 0};
  result.global_stats = initial_global_stats(result.model, config);
  std::vector<featstats::ClassFeatureStats> client_stats(
      config.num_clients,
      featstats::ClassFeatureStats(static_cast<int>(result.model.num_classes()),
                                   result.model.feature_dim(), config.sharing.beta_m));

  for (std::size_t r = 0; r < config.rounds; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto selected = sample_clients(config.num_clients, config.clients_per_round, config.seed, r);

    auto start_stats = [&](std::size_t m) {
      if (config.sharing.stats_warm_start) return client_stats[m];
      auto s = result.global_stats;
      s.set_beta(config.sharing.beta_m);
      return s;
    };
    std::vector<std::optional<ClientResult>> outcomes(selected.size());
    if (config.parallel_clients && selected.size() > 1) {
      std::vector<std::future<ClientResult>> futures;
      for (std::size_t m : selected) {
        futures.push_back(std::async(std::launch::async, [&, m, s = start_stats(m)]() mutable {
          return client_update(result.model, result.global_stats, std::move(s), shards[m], train,
                               config, r);
        }));
      }
      for (std::size_t i = 0; i < futures.size(); ++i) outcomes[i] = futures[i].get();
    } else {
      for (std::size_t i = 0; i < selected.size(); ++i) {
        const std::size_t m = selected[i];
        outcomes[i] = client_update(result.model, result.global_stats, start_stats(m), shards[m],
                                    train, config, r);
      }
    }

    std::vector<nn::SplitModel> locals;
    std::vector<double> weights;
    std::vector<featstats::ClassFeatureStats> round_stats;
    for (std::size_t i = 0; i < selected.size(); ++i) {
      locals.push_back(std::move(outcomes[i]->model));
      weights.push_back(shards[selected[i]].weight);
      if (impro) {
        client_stats[selected[i]] = outcomes[i]->stats;
        round_stats.push_back(std::move(outcomes[i]->stats));
      }
    }
    nn::SplitModel next = aggregate(locals, weights);
    if (impro) {
      result.global_stats = featstats::server_aggregate(
          round_stats, result.global_stats,
          featstats::NoiseSpec{config.sharing.sigma_eps, config.sharing.noise_seed}, r);
    }
    const auto divergence = metrics::weight_divergence(next, locals);
    result.model = std::move(next);
    result.rounds_completed = r + 1;
    if (hooks.on_round) hooks.on_round(r, result.model);

    if ((r + 1) % config.eval_cadence == 0 || r + 1 == config.rounds) {
      RoundRecord rec;
      rec.round = r;
      rec.accuracy = metrics::evaluate(result.model, test);
      rec.divergence_total = divergence.total;
      rec.divergence_low = divergence.low;
      rec.divergence_high = divergence.high;
      rec.divergence_per_layer = divergence.per_layer;
      if (config.measure_cgv && shards.size() >= 2) {
        const auto report = metrics::cgv(result.model, shards, train, metrics::CgvMode::kPerClient);
        rec.cgv_low = report.low_sq;
        rec.cgv_high = report.high_sq;
      }
      rec.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      result.records.push_back(rec);
      if (hooks.on_record) hooks.on_record(result.records.back());
    }
  }
  return result;
}

}  // namespace fedsim::sim
