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

#include <nlohmann/json.hpp>

#include "fedsim/rng.hpp"
#include "fedsim/tensor.hpp"

namespace fedsim::featstats {

// Per-class diagonal Gaussian over split-layer features with moving-average
// updates. Fresh estimators start at mean 0, variance 1.
class ClassFeatureStats {
 public:
  ClassFeatureStats() = default;
  ClassFeatureStats(int num_classes, std::size_t dim, double beta);

  int num_classes() const noexcept { return static_cast<int>(mean_.size()); }
  std::size_t dim() const noexcept { return dim_; }
  double beta() const noexcept { return beta_; }
  void set_beta(double beta);

  std::span<const double> mean(int c) const { return mean_.at(static_cast<std::size_t>(c)); }
  std::span<const double> var(int c) const { return var_.at(static_cast<std::size_t>(c)); }
  std::span<double> mutable_mean(int c) { return mean_.at(static_cast<std::size_t>(c)); }
  std::span<double> mutable_var(int c) { return var_.at(static_cast<std::size_t>(c)); }

  // Batches (client) or aggregations (server) that touched class c since
  // construction or reset().
  std::size_t update_count(int c) const { return count_.at(static_cast<std::size_t>(c)); }
  void set_update_count(int c, std::size_t n) { count_.at(static_cast<std::size_t>(c)) = n; }
  // Updates since the last begin_round(); a client contributes class c to the
  // server aggregate only when this is nonzero.
  std::size_t round_updates(int c) const { return round_.at(static_cast<std::size_t>(c)); }
  void begin_round() noexcept;
  void reset();

  friend bool operator==(const ClassFeatureStats&, const ClassFeatureStats&) = default;

 private:
  friend void client_update(ClassFeatureStats&, const Tensor&, std::span<const int>);
  friend ClassFeatureStats server_aggregate(std::span<const ClassFeatureStats>,
                                            const ClassFeatureStats&, double, Engine&);

  std::size_t dim_ = 0;
  double beta_ = 0.0;
  std::vector<std::vector<double>> mean_;
  std::vector<std::vector<double>> var_;
  std::vector<std::size_t> count_;
  std::vector<std::size_t> round_;
};

// Moving-average update from one batch of features `h` with labels `y`.
// Present classes blend toward the batch mean/population variance with weight
// (1 - beta); the first update of a class copies the batch statistics.
void client_update(ClassFeatureStats& stats, const Tensor& h, std::span<const int> y);

struct NoiseSpec {
  double sigma_eps = 0.0;
  std::uint64_t seed = 0;
};

// global <- beta_g * global + (1 - beta_g) * mean_i(client_i + eps_i) per
// class, over clients with round_updates(c) > 0. eps is drawn fresh per
// client, class, dimension, separately for mean and variance. Variances are
// clamped at 0. Classes nobody contributed are left as they were.
ClassFeatureStats server_aggregate(std::span<const ClassFeatureStats> clients,
                                   const ClassFeatureStats& global, double sigma_eps, Engine& rng);
// Same, drawing noise from the (noise.seed, round) stream.
ClassFeatureStats server_aggregate(std::span<const ClassFeatureStats> clients,
                                   const ClassFeatureStats& global, const NoiseSpec& noise,
                                   std::uint64_t round);

// One row per label drawn from N(mean[y], diag(var[y])).
Tensor sample_features(const ClassFeatureStats& stats, std::span<const int> labels, Engine& rng);

// {"<class>": {"mean": [...], "var": [...], "count": n}, ...}
nlohmann::json to_json(const ClassFeatureStats& stats);
ClassFeatureStats stats_from_json(const nlohmann::json& j, double beta);

}  // namespace fedsim::featstats
