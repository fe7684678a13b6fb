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

#include "fedsim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "fedsim/error.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/transport.hpp"

namespace fedsim::metrics {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::vector<double> normalized(std::span<const double> weights) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(sum > 0.0)) throw ArgumentError("weights must sum to a positive value");
  std::vector<double> w(weights.begin(), weights.end());
  for (double& v : w) v /= sum;
  return w;
}

nn::GradientVector full_batch_gradient(const nn::SplitModel& model, const data::ClientShard& shard,
                                       const data::LabeledDataset& dataset) {
  if (shard.indices.empty()) {
    throw ArgumentError("client " + std::to_string(shard.client_id) + " has an empty shard");
  }
  const auto local = data::subset(dataset, shard.indices);
  return nn::loss_and_grad(model, local.features, local.labels, nn::Entry::kRaw).grad;
}

nn::GradientVector weighted_mean(std::span<const nn::GradientVector> grads,
                                 std::span<const double> w) {
  nn::GradientVector mean{std::vector<double>(grads.front().low.size(), 0.0),
                          std::vector<double>(grads.front().high.size(), 0.0)};
  for (std::size_t m = 0; m < grads.size(); ++m) mean.axpy(w[m], grads[m]);
  return mean;
}

void finish_weighted(CgvReport& report, std::span<const double> w) {
  report.low_sq = report.high_sq = report.total_sq = 0.0;
  for (std::size_t m = 0; m < report.clients.size(); ++m) {
    report.low_sq += w[m] * report.clients[m].low_sq;
    report.high_sq += w[m] * report.clients[m].high_sq;
    report.total_sq += w[m] * report.clients[m].total_sq;
  }
}

std::vector<double> shard_weights(std::span<const data::ClientShard> shards) {
  std::vector<double> w;
  for (const auto& s : shards) w.push_back(static_cast<double>(s.indices.size()));
  return w;
}

}  // namespace

CgvReport cgv_from_gradients(std::span<const nn::GradientVector> grads,
                             std::span<const double> weights, std::span<const int> client_ids) {
  if (grads.empty()) throw ArgumentError("cgv needs at least one gradient");
  if (weights.size() != grads.size()) throw ShapeError("one weight per gradient required");
  if (!client_ids.empty() && client_ids.size() != grads.size()) {
    throw ShapeError("one client id per gradient required");
  }
  for (const auto& g : grads) {
    if (g.low.size() != grads.front().low.size() || g.high.size() != grads.front().high.size()) {
      throw ShapeError("gradients have different partitions");
    }
  }
  const auto w = normalized(weights);
  const auto mean = weighted_mean(grads, w);
  CgvReport report;
  report.mode = CgvMode::kPerClient;
  for (std::size_t m = 0; m < grads.size(); ++m) {
    ClientCgv c;
    c.client_id = client_ids.empty() ? static_cast<int>(m) : client_ids[m];
    c.low_sq = squared_distance(grads[m].low, mean.low);
    c.high_sq = squared_distance(grads[m].high, mean.high);
    c.total_sq = c.low_sq + c.high_sq;
    report.clients.push_back(c);
  }
  finish_weighted(report, w);
  return report;
}

CgvReport cgv(const nn::SplitModel& model, std::span<const data::ClientShard> shards,
              const data::LabeledDataset& dataset, CgvMode mode) {
  if (shards.size() < 2) throw ArgumentError("cgv needs at least two clients");
  std::vector<nn::GradientVector> grads;
  std::vector<int> ids;
  for (const auto& s : shards) {
    grads.push_back(full_batch_gradient(model, s, dataset));
    ids.push_back(s.client_id);
  }
  const auto weights = shard_weights(shards);
  if (mode == CgvMode::kPerClient) return cgv_from_gradients(grads, weights, ids);

  const auto w = normalized(weights);
  const auto mean = weighted_mean(grads, w);
  CgvReport report;
  report.mode = CgvMode::kPerSample;
  for (const auto& s : shards) {
    ClientCgv c;
    c.client_id = s.client_id;
    for (std::size_t i : s.indices) {
      const std::size_t one[] = {i};
      const auto sample = data::subset(dataset, one);
      const auto g = nn::loss_and_grad(model, sample.features, sample.labels, nn::Entry::kRaw).grad;
      c.low_sq += squared_distance(g.low, mean.low);
      c.high_sq += squared_distance(g.high, mean.high);
    }
    const double n = static_cast<double>(s.indices.size());
    c.low_sq /= n;
    c.high_sq /= n;
    c.total_sq = c.low_sq + c.high_sq;
    report.clients.push_back(c);
  }
  finish_weighted(report, w);
  return report;
}

CgvReport cgv_fedimpro(const nn::SplitModel& model, std::span<const data::ClientShard> shards,
                       const data::LabeledDataset& dataset, const SharedFeatureBatch& shared,
                       double shared_ratio) {
  if (shards.size() < 2) throw ArgumentError("cgv needs at least two clients");
  if (!(shared_ratio >= 0.0) || !std::isfinite(shared_ratio)) {
    throw ArgumentError("shared_ratio must be finite and >= 0");
  }
  if (shared.features.rank() != 2 || shared.features.cols() != model.feature_dim()) {
    throw ShapeError("shared feature batch width does not match the split-layer dimension");
  }
  std::vector<nn::GradientVector> grads;
  std::vector<int> ids;
  std::vector<double> weights;
  for (const auto& s : shards) {
    grads.push_back(full_batch_gradient(model, s, dataset));
    ids.push_back(s.client_id);
  }
  if (shared_ratio == 0.0) {
    return cgv_from_gradients(grads, shard_weights(shards), ids);
  }

  const auto g_shared =
      nn::loss_and_grad(model, shared.features, shared.labels, nn::Entry::kFeature).grad;
  double total_n = 0.0;
  double total_hat = 0.0;
  for (const auto& s : shards) {
    total_n += static_cast<double>(s.indices.size());
    total_hat += shared_ratio * static_cast<double>(s.indices.size());
  }
  for (std::size_t m = 0; m < shards.size(); ++m) {
    const double n = static_cast<double>(shards[m].indices.size());
    const double n_hat = shared_ratio * n;
    auto& high = grads[m].high;
    for (std::size_t k = 0; k < high.size(); ++k) {
      high[k] = (n * high[k] + n_hat * g_shared.high[k]) / (n + n_hat);
    }
    weights.push_back((n + n_hat) / (total_n + total_hat));
  }
  return cgv_from_gradients(grads, weights, ids);
}

DivergenceReport weight_divergence(const nn::SplitModel& global,
                                   std::span<const nn::SplitModel> locals) {
  if (locals.empty()) throw ArgumentError("weight_divergence needs at least one local model");
  const auto theta_bar = global.parameters();
  const auto slices = global.layer_slices();
  DivergenceReport report;
  report.per_layer.assign(slices.size(), 0.0);
  for (const auto& local : locals) {
    if (local.layer_sizes() != global.layer_sizes() || local.split_index() != global.split_index()) {
      throw ShapeError("local model shape differs from the global model");
    }
    auto diff = theta_bar;
    diff -= local.parameters();
    ClientDivergence c;
    double low_sq = 0.0;
    double high_sq = 0.0;
    for (const auto& sl : slices) {
      const auto& block = sl.high ? diff.high : diff.low;
      double sq = 0.0;
      for (std::size_t k = sl.offset; k < sl.offset + sl.count; ++k) sq += block[k] * block[k];
      c.per_layer.push_back(std::sqrt(sq));
      (sl.high ? high_sq : low_sq) += sq;
    }
    c.low = std::sqrt(low_sq);
    c.high = std::sqrt(high_sq);
    c.total = std::sqrt(low_sq + high_sq);
    report.clients.push_back(std::move(c));
  }
  const double k = static_cast<double>(locals.size());
  for (const auto& c : report.clients) {
    report.total += c.total / k;
    report.low += c.low / k;
    report.high += c.high / k;
    for (std::size_t l = 0; l < slices.size(); ++l) report.per_layer[l] += c.per_layer[l] / k;
  }
  return report;
}

namespace {

std::map<int, std::vector<std::size_t>> rows_by_class(const data::LabeledDataset& d) {
  std::map<int, std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < d.labels.size(); ++i) out[d.labels[i]].push_back(i);
  return out;
}

std::vector<std::size_t> capped(std::vector<std::size_t> rows, const TransportOptions& opt,
                                int label, std::uint64_t side) {
  if (rows.size() <= opt.max_points_per_class) return rows;
  Engine rng = make_engine(opt.seed, Stream::kTransportSubsample,
                           {static_cast<std::uint64_t>(label), side});
  std::shuffle(rows.begin(), rows.end(), rng);
  rows.resize(opt.max_points_per_class);
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

double conditional_wasserstein(const data::LabeledDataset& a, const data::LabeledDataset& b,
                               GroundMetric metric, const TransportOptions& options) {
  if (a.labels.empty() || b.labels.empty()) throw ArgumentError("both feature sets must be nonempty");
  if (a.features.rows() != a.labels.size() || b.features.rows() != b.labels.size()) {
    throw ShapeError("feature rows do not match labels");
  }
  if (a.features.cols() != b.features.cols()) throw ShapeError("feature sets differ in width");
  if (options.max_points_per_class == 0) throw ArgumentError("max_points_per_class must be positive");

  const auto ca = rows_by_class(a);
  const auto cb = rows_by_class(b);
  for (const auto& [label, rows] : ca) {
    if (!cb.contains(label)) throw MissingClassError(label, "the second set");
  }
  for (const auto& [label, rows] : cb) {
    if (!ca.contains(label)) throw MissingClassError(label, "the first set");
  }

  const double na = static_cast<double>(a.labels.size());
  const double nb = static_cast<double>(b.labels.size());
  double total = 0.0;
  for (const auto& [label, rows_a_all] : ca) {
    const auto& rows_b_all = cb.at(label);
    const auto rows_a = capped(rows_a_all, options, label, 0);
    const auto rows_b = capped(rows_b_all, options, label, 1);
    std::vector<double> cost(rows_a.size() * rows_b.size());
    for (std::size_t i = 0; i < rows_a.size(); ++i) {
      for (std::size_t j = 0; j < rows_b.size(); ++j) {
        const double sq = squared_distance(a.features.row(rows_a[i]), b.features.row(rows_b[j]));
        cost[i * rows_b.size() + j] = metric == GroundMetric::kL2 ? std::sqrt(sq) : sq;
      }
    }
    const double w = transport::uniform_transport_cost(cost, rows_a.size(), rows_b.size());
    const double pa = static_cast<double>(rows_a_all.size()) / na;
    const double pb = static_cast<double>(rows_b_all.size()) / nb;
    total += 0.5 * (pa + pb) * w;
  }
  return total;
}

double evaluate(const nn::SplitModel& model, const data::LabeledDataset& test) {
  if (test.labels.empty()) throw ArgumentError("test set is empty");
  const auto classes = static_cast<int>(model.num_classes());
  for (int y : test.labels) {
    if (y < 0 || y >= classes) throw LabelError("test label " + std::to_string(y) + " outside model classes");
  }
  const auto logits = nn::forward_full(model, test.features).logits;
  std::size_t correct = 0;
  for (std::size_t r = 0; r < test.labels.size(); ++r) {
    auto z = logits.row(r);
    std::size_t arg = 0;
    for (std::size_t c = 1; c < z.size(); ++c) {
      if (z[c] > z[arg]) arg = c;
    }
    if (static_cast<int>(arg) == test.labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.labels.size());
}

std::optional<std::size_t> rounds_to_target(std::span<const RoundRecord> records,
                                            double target_accuracy) {
  for (const auto& r : records) {
    if (r.accuracy >= target_accuracy) return r.round;
  }
  return std::nullopt;
}

}  // namespace fedsim::metrics
