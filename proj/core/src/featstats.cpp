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

#include "fedsim/featstats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fedsim/error.hpp"

namespace fedsim::featstats {

ClassFeatureStats::ClassFeatureStats(int num_classes, std::size_t dim, double beta) : dim_(dim) {
  if (num_classes < 1) throw ArgumentError("feature stats need at least one class");
  if (dim == 0) throw ShapeError("feature stats need a positive feature dimension");
  set_beta(beta);
  mean_.assign(static_cast<std::size_t>(num_classes), std::vector<double>(dim, 0.0));
  var_.assign(static_cast<std::size_t>(num_classes), std::vector<double>(dim, 1.0));
  count_.assign(static_cast<std::size_t>(num_classes), 0);
  round_.assign(static_cast<std::size_t>(num_classes), 0);
}

void ClassFeatureStats::set_beta(double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw ArgumentError("momentum beta must lie in [0, 1]");
  beta_ = beta;
}

void ClassFeatureStats::begin_round() noexcept { std::fill(round_.begin(), round_.end(), 0); }

void ClassFeatureStats::reset() {
  for (auto& m : mean_) std::fill(m.begin(), m.end(), 0.0);
  for (auto& v : var_) std::fill(v.begin(), v.end(), 1.0);
  std::fill(count_.begin(), count_.end(), 0);
  begin_round();
}

void client_update(ClassFeatureStats& stats, const Tensor& h, std::span<const int> y) {
  if (h.rank() != 2 || h.rows() != y.size()) throw ShapeError("feature rows do not align with labels");
  if (h.cols() != stats.dim()) {
    throw ShapeError("feature width " + std::to_string(h.cols()) + " != stats dim " +
                     std::to_string(stats.dim()));
  }
  const int classes = stats.num_classes();
  for (int label : y) {
    if (label < 0 || label >= classes) throw LabelError("label " + std::to_string(label) + " out of range");
  }
  const std::size_t dim = stats.dim();
  std::vector<std::size_t> n(static_cast<std::size_t>(classes), 0);
  for (int label : y) ++n[static_cast<std::size_t>(label)];

  for (int c = 0; c < classes; ++c) {
    const std::size_t nc = n[static_cast<std::size_t>(c)];
    if (nc == 0) continue;
    std::vector<double> mu(dim, 0.0);
    std::vector<double> var(dim, 0.0);
    for (std::size_t r = 0; r < y.size(); ++r) {
      if (y[r] != c) continue;
      auto row = h.row(r);
      for (std::size_t d = 0; d < dim; ++d) mu[d] += row[d];
    }
    for (double& v : mu) v /= static_cast<double>(nc);
    for (std::size_t r = 0; r < y.size(); ++r) {
      if (y[r] != c) continue;
      auto row = h.row(r);
      for (std::size_t d = 0; d < dim; ++d) {
        const double e = row[d] - mu[d];
        var[d] += e * e;
      }
    }
    for (double& v : var) v /= static_cast<double>(nc);

    const auto ci = static_cast<std::size_t>(c);
    auto& m = stats.mean_[ci];
    auto& s = stats.var_[ci];
    if (stats.count_[ci] == 0) {
      m = mu;
      s = var;
    } else {
      const double b = stats.beta_;
      for (std::size_t d = 0; d < dim; ++d) {
        m[d] = b * m[d] + (1.0 - b) * mu[d];
        s[d] = std::max(0.0, b * s[d] + (1.0 - b) * var[d]);
      }
    }
    ++stats.count_[ci];
    ++stats.round_[ci];
  }
}

ClassFeatureStats server_aggregate(std::span<const ClassFeatureStats> clients,
                                   const ClassFeatureStats& global, double sigma_eps, Engine& rng) {
  if (clients.empty()) throw ArgumentError("server_aggregate needs at least one client");
  if (!(sigma_eps >= 0.0) || !std::isfinite(sigma_eps)) throw ArgumentError("sigma_eps must be >= 0");
  for (const auto& c : clients) {
    if (c.num_classes() != global.num_classes() || c.dim() != global.dim()) {
      throw ShapeError("client stats do not match the global stats shape");
    }
  }
  ClassFeatureStats out = global;
  out.begin_round();
  const std::size_t dim = global.dim();
  std::normal_distribution<double> noise(0.0, 1.0);
  const double b = global.beta();

  for (int c = 0; c < global.num_classes(); ++c) {
    const auto ci = static_cast<std::size_t>(c);
    std::vector<double> mu_sum(dim, 0.0);
    std::vector<double> var_sum(dim, 0.0);
    std::size_t contributors = 0;
    for (const auto& client : clients) {
      if (client.round_updates(c) == 0) continue;
      ++contributors;
      for (std::size_t d = 0; d < dim; ++d) {
        const double eps = sigma_eps > 0.0 ? sigma_eps * noise(rng) : 0.0;
        mu_sum[d] += client.mean_[ci][d] + eps;
      }
      for (std::size_t d = 0; d < dim; ++d) {
        const double eps = sigma_eps > 0.0 ? sigma_eps * noise(rng) : 0.0;
        var_sum[d] += client.var_[ci][d] + eps;
      }
    }
    if (contributors == 0) continue;
    const double k = static_cast<double>(contributors);
    for (std::size_t d = 0; d < dim; ++d) {
      out.mean_[ci][d] = b * global.mean_[ci][d] + (1.0 - b) * (mu_sum[d] / k);
      out.var_[ci][d] = std::max(0.0, b * global.var_[ci][d] + (1.0 - b) * (var_sum[d] / k));
    }
    ++out.count_[ci];
    ++out.round_[ci];
  }
  return out;
}

ClassFeatureStats server_aggregate(std::span<const ClassFeatureStats> clients,
                                   const ClassFeatureStats& global, const NoiseSpec& noise,
                                   std::uint64_t round) {
  Engine rng = make_engine(noise.seed, Stream::kServerNoise, {round});
  return server_aggregate(clients, global, noise.sigma_eps, rng);
}

Tensor sample_features(const ClassFeatureStats& stats, std::span<const int> labels, Engine& rng) {
  const std::size_t dim = stats.dim();
  Tensor out = Tensor::matrix(labels.size(), dim);
  std::normal_distribution<double> g(0.0, 1.0);
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const int y = labels[r];
    if (y < 0 || y >= stats.num_classes()) throw LabelError("label " + std::to_string(y) + " out of range");
    auto mu = stats.mean(y);
    auto var = stats.var(y);
    auto row = out.row(r);
    for (std::size_t d = 0; d < dim; ++d) {
      const double sd = std::sqrt(var[d]);
      const double z = g(rng);
      row[d] = sd > 0.0 ? mu[d] + sd * z : mu[d];
    }
  }
  return out;
}

nlohmann::json to_json(const ClassFeatureStats& stats) {
  nlohmann::json j = nlohmann::json::object();
  for (int c = 0; c < stats.num_classes(); ++c) {
    auto mu = stats.mean(c);
    auto var = stats.var(c);
    j[std::to_string(c)] = {
        {"mean", std::vector<double>(mu.begin(), mu.end())},
        {"var", std::vector<double>(var.begin(), var.end())},
        {"count", stats.update_count(c)},
    };
  }
  return j;
}

ClassFeatureStats stats_from_json(const nlohmann::json& j, double beta) {
  if (!j.is_object() || j.empty()) throw ArgumentError("stats snapshot must be a nonempty object");
  const int classes = static_cast<int>(j.size());
  const std::size_t dim = j.at("0").at("mean").size();
  ClassFeatureStats stats(classes, dim, beta);
  for (int c = 0; c < classes; ++c) {
    const auto& entry = j.at(std::to_string(c));
    const auto mu = entry.at("mean").get<std::vector<double>>();
    const auto var = entry.at("var").get<std::vector<double>>();
    if (mu.size() != dim || var.size() != dim) throw ShapeError("stats snapshot has ragged dims");
    std::copy(mu.begin(), mu.end(), stats.mutable_mean(c).begin());
    std::copy(var.begin(), var.end(), stats.mutable_var(c).begin());
    stats.set_update_count(c, entry.at("count").get<std::size_t>());
  }
  return stats;
}

}  // namespace fedsim::featstats
