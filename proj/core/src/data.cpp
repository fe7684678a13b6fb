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

#include "fedsim/data.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "fedsim/error.hpp"
#include "fedsim/rng.hpp"

namespace fedsim::data {

void LabeledDataset::validate() const {
  if (labels.empty()) throw ArgumentError("dataset is empty");
  if (features.rank() != 2 || features.rows() != labels.size()) {
    throw ShapeError("feature rows do not match label count");
  }
  if (num_classes < 1) throw ArgumentError("dataset needs at least one class");
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw LabelError("label " + std::to_string(y) + " outside [0, " +
                       std::to_string(num_classes) + ")");
    }
  }
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (int y : labels) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

LabeledDataset subset(const LabeledDataset& dataset, std::span<const std::size_t> indices) {
  LabeledDataset out;
  out.features = gather_rows(dataset.features, indices);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.labels.push_back(dataset.labels[i]);
  out.num_classes = dataset.num_classes;
  return out;
}

namespace {

void check_synth(const SynthParams& p) {
  if (p.num_classes < 2) throw ArgumentError("synthetic data needs C >= 2");
  if (p.dim < 2) throw ArgumentError("synthetic data needs D >= 2");
  if (p.per_class_n < 1) throw ArgumentError("synthetic data needs per_class_n >= 1");
  if (!(p.class_mean_scale >= 0.0) || !std::isfinite(p.class_mean_scale)) {
    throw ArgumentError("class_mean_scale must be finite and >= 0");
  }
}

LabeledDataset draw_samples(const std::vector<std::vector<double>>& means, std::size_t per_class,
                            Engine& rng) {
  const std::size_t classes = means.size();
  const std::size_t dim = means.front().size();
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> values;
  values.reserve(classes * per_class * dim);
  LabeledDataset ds;
  ds.num_classes = static_cast<int>(classes);
  for (std::size_t c = 0; c < classes; ++c) {
    for (std::size_t i = 0; i < per_class; ++i) {
      for (std::size_t d = 0; d < dim; ++d) values.push_back(means[c][d] + noise(rng));
      ds.labels.push_back(static_cast<int>(c));
    }
  }
  ds.features = Tensor({classes * per_class, dim}, std::move(values), Check::kNone);
  return ds;
}

std::vector<std::vector<double>> draw_means(const SynthParams& p, Engine& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<std::vector<double>> means(static_cast<std::size_t>(p.num_classes));
  for (auto& mu : means) {
    double norm = 0.0;
    do {
      mu.assign(p.dim, 0.0);
      norm = 0.0;
      for (double& v : mu) {
        v = g(rng);
        norm += v * v;
      }
    } while (norm == 0.0);
    const double s = p.class_mean_scale / std::sqrt(norm);
    for (double& v : mu) v *= s;
  }
  return means;
}

}  // namespace

LabeledDataset synth_dataset(const SynthParams& params) {
  check_synth(params);
  Engine rng = make_engine(params.seed, Stream::kSynthData);
  const auto means = draw_means(params, rng);
  return draw_samples(means, params.per_class_n, rng);
}

SynthSplit synth_train_test(const SynthParams& params, std::size_t test_per_class_n) {
  check_synth(params);
  if (test_per_class_n < 1) throw ArgumentError("test_per_class_n must be >= 1");
  Engine rng = make_engine(params.seed, Stream::kSynthData);
  const auto means = draw_means(params, rng);
  SynthSplit split;
  split.train = draw_samples(means, params.per_class_n, rng);
  split.test = draw_samples(means, test_per_class_n, rng);
  return split;
}

std::vector<ClientShard> PartitionManifest::shards() const {
  std::size_t total = 0;
  for (const auto& idx : client_indices) total += idx.size();
  std::vector<ClientShard> out;
  out.reserve(client_indices.size());
  for (std::size_t m = 0; m < client_indices.size(); ++m) {
    ClientShard s;
    s.client_id = static_cast<int>(m);
    s.indices = client_indices[m];
    s.n = s.indices.size();
    s.weight = total == 0 ? 0.0 : static_cast<double>(s.n) / static_cast<double>(total);
    out.push_back(std::move(s));
  }
  return out;
}

void PartitionManifest::validate(const LabeledDataset& dataset) const {
  if (num_samples != dataset.size()) throw ShapeError("manifest size does not match dataset");
  if (class_counts.size() != client_indices.size()) {
    throw ShapeError("manifest class_counts and client lists disagree in length");
  }
  std::vector<char> seen(num_samples, 0);
  for (std::size_t m = 0; m < client_indices.size(); ++m) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
    for (std::size_t i : client_indices[m]) {
      if (i >= num_samples) throw ShapeError("manifest index out of range");
      if (seen[i]) throw ShapeError("manifest index " + std::to_string(i) + " assigned twice");
      seen[i] = 1;
      ++counts[static_cast<std::size_t>(dataset.labels[i])];
    }
    if (counts != class_counts[m]) {
      throw ShapeError("manifest class counts inconsistent for client " + std::to_string(m));
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw ShapeError("manifest does not cover every sample");
  }
}

namespace {

// Dirichlet(alpha * 1_M) via Gamma(alpha) draws in log space:
// G(a) = G(a + 1) * U^(1/a), which stays finite for tiny alpha.
std::vector<double> dirichlet(std::size_t m, double alpha, Engine& rng) {
  std::gamma_distribution<double> gamma(alpha + 1.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> logs(m);
  for (double& l : logs) {
    double u = 0.0;
    while (u == 0.0) u = unif(rng);
    l = std::log(gamma(rng)) + std::log(u) / alpha;
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  double sum = 0.0;
  for (double& l : logs) {
    l = std::exp(l - top);
    sum += l;
  }
  for (double& l : logs) l /= sum;
  return logs;
}

}  // namespace

PartitionManifest dirichlet_partition(const LabeledDataset& dataset, std::size_t num_clients,
                                      double alpha, std::uint64_t seed,
                                      const PartitionOptions& options) {
  dataset.validate();
  if (num_clients < 2) throw ArgumentError("partition needs M >= 2 clients");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ArgumentError("alpha must be finite and > 0");
  if (options.max_retries < 1) throw ArgumentError("max_retries must be >= 1");

  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(dataset.num_classes));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    by_class[static_cast<std::size_t>(dataset.labels[i])].push_back(i);
  }

  Engine rng = make_engine(seed, Stream::kPartition);
  for (int attempt = 0; attempt < options.max_retries; ++attempt) {
    std::vector<std::vector<std::size_t>> lists(num_clients);
    for (auto members : by_class) {
      if (members.empty()) continue;
      std::shuffle(members.begin(), members.end(), rng);
      const auto props = dirichlet(num_clients, alpha, rng);
      // Cut points from the rounded cumulative proportions.
      double cum = 0.0;
      std::size_t start = 0;
      for (std::size_t m = 0; m < num_clients; ++m) {
        cum += props[m];
        std::size_t end = (m + 1 == num_clients)
                              ? members.size()
                              : std::min(members.size(), static_cast<std::size_t>(std::llround(
                                                             cum * static_cast<double>(members.size()))));
        end = std::max(end, start);
        lists[m].insert(lists[m].end(), members.begin() + static_cast<std::ptrdiff_t>(start),
                        members.begin() + static_cast<std::ptrdiff_t>(end));
        start = end;
      }
    }
    const bool ok = std::all_of(lists.begin(), lists.end(), [&](const auto& l) {
      return l.size() >= options.min_per_client;
    });
    if (!ok) continue;

    PartitionManifest manifest;
    manifest.alpha = alpha;
    manifest.seed = seed;
    manifest.min_per_client = options.min_per_client;
    manifest.num_classes = dataset.num_classes;
    manifest.num_samples = dataset.size();
    for (auto& l : lists) {
      std::sort(l.begin(), l.end());
      std::vector<std::size_t> counts(static_cast<std::size_t>(dataset.num_classes), 0);
      for (std::size_t i : l) ++counts[static_cast<std::size_t>(dataset.labels[i])];
      manifest.class_counts.push_back(std::move(counts));
      manifest.client_indices.push_back(std::move(l));
    }
    return manifest;
  }
  throw InfeasibleError("could not give every one of " + std::to_string(num_clients) +
                        " clients at least " + std::to_string(options.min_per_client) +
                        " samples in " + std::to_string(options.max_retries) + " draws");
}

double mean_label_entropy(const PartitionManifest& manifest) {
  if (manifest.class_counts.empty()) return 0.0;
  double total = 0.0;
  for (const auto& counts : manifest.class_counts) {
    const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
    if (n == 0.0) continue;
    double h = 0.0;
    for (std::size_t c : counts) {
      if (c == 0) continue;
      const double p = static_cast<double>(c) / n;
      h -= p * std::log(p);
    }
    total += h;
  }
  return total / static_cast<double>(manifest.class_counts.size());
}

std::vector<Batch> batches(const ClientShard& shard, const LabeledDataset& dataset,
                           std::size_t batch_size, std::uint64_t seed, std::uint64_t epoch) {
  if (batch_size < 1) throw ArgumentError("batch_size must be >= 1");
  if (shard.indices.empty()) {
    throw ArgumentError("client " + std::to_string(shard.client_id) + " has an empty shard");
  }
  std::vector<std::size_t> order = shard.indices;
  Engine rng = make_engine(seed, Stream::kBatchShuffle,
                           {epoch, static_cast<std::uint64_t>(shard.client_id)});
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Batch> out;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    Batch b;
    b.indices.assign(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end));
    b.x = gather_rows(dataset.features, b.indices);
    b.y.reserve(b.indices.size());
    for (std::size_t i : b.indices) b.y.push_back(dataset.labels[i]);
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace fedsim::data
