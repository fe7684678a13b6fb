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
#include <numeric>
#include <set>

#include <gtest/gtest.h>

#include "fedsim/error.hpp"
#include "oracles.hpp"

namespace fedsim::data {
namespace {

SynthParams params(int c, std::size_t d, std::size_t n, double scale, std::uint64_t seed) {
  return {c, d, n, scale, seed};
}

TEST(SynthTest, CountsPerClass) {
  const auto ds = synth_dataset(params(2, 4, 10, 3.0, 1));
  EXPECT_EQ(ds.size(), 20u);
  EXPECT_EQ(ds.class_counts(), (std::vector<std::size_t>{10, 10}));
  EXPECT_NO_THROW(ds.validate());
}

TEST(SynthTest, SameSeedSameData) {
  EXPECT_EQ(synth_dataset(params(3, 5, 7, 2.0, 9)).features,
            synth_dataset(params(3, 5, 7, 2.0, 9)).features);
  EXPECT_NE(synth_dataset(params(3, 5, 7, 2.0, 9)).features,
            synth_dataset(params(3, 5, 7, 2.0, 10)).features);
}

TEST(SynthTest, TrainSplitMatchesSynthDataset) {
  const auto p = params(4, 6, 12, 2.0, 5);
  const auto split = synth_train_test(p, 3);
  EXPECT_EQ(split.train.features, synth_dataset(p).features);
  EXPECT_EQ(split.test.size(), 12u);
}

TEST(SynthTest, ScaleFourIsLinearlySeparable) {
  const auto ds = synth_dataset(params(2, 8, 200, 4.0, 3));
  EXPECT_GE(testing::least_squares_accuracy(ds), 0.99);
}

TEST(SynthTest, RejectsInvalidSizes) {
  EXPECT_THROW(synth_dataset(params(1, 4, 10, 1.0, 0)), ArgumentError);
  EXPECT_THROW(synth_dataset(params(2, 1, 10, 1.0, 0)), ArgumentError);
  EXPECT_THROW(synth_dataset(params(2, 4, 0, 1.0, 0)), ArgumentError);
}

std::vector<double> global_proportions(const LabeledDataset& d) {
  std::vector<double> p;
  for (std::size_t c : d.class_counts()) p.push_back(static_cast<double>(c) / static_cast<double>(d.size()));
  return p;
}

TEST(PartitionTest, DisjointCoverAndWeights) {
  const auto ds = synth_dataset(params(5, 3, 40, 1.0, 2));
  for (double alpha : {0.05, 0.5, 10.0}) {
    const auto m = dirichlet_partition(ds, 7, alpha, 21);
    EXPECT_NO_THROW(m.validate(ds));
    std::vector<std::size_t> all;
    for (const auto& l : m.client_indices) all.insert(all.end(), l.begin(), l.end());
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> expect(ds.size());
    std::iota(expect.begin(), expect.end(), std::size_t{0});
    EXPECT_EQ(all, expect);
    const auto shards = m.shards();
    double sum = 0.0;
    for (const auto& s : shards) {
      sum += s.weight;
      EXPECT_GE(s.n, 2u);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(PartitionTest, HugeAlphaApproachesGlobalProportions) {
  const auto ds = synth_dataset(params(4, 2, 1000, 1.0, 4));
  const auto m = dirichlet_partition(ds, 10, 1e4, 8);
  const auto global = global_proportions(ds);
  for (const auto& counts : m.class_counts) {
    const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
    for (std::size_t c = 0; c < counts.size(); ++c) {
      EXPECT_NEAR(static_cast<double>(counts[c]) / n, global[c], 0.05);
    }
  }
}

TEST(PartitionTest, TinyAlphaProducesDominantClass) {
  const auto ds = synth_dataset(params(10, 2, 100, 1.0, 4));
  const auto m = dirichlet_partition(ds, 10, 0.05, 3);
  double best = 0.0;
  for (const auto& counts : m.class_counts) {
    const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
    best = std::max(best, static_cast<double>(*std::max_element(counts.begin(), counts.end())) / n);
  }
  EXPECT_GE(best, 0.8);
}

TEST(PartitionTest, EntropyIsMonotoneInAlpha) {
  const auto ds = synth_dataset(params(10, 2, 100, 1.0, 4));
  double h[3] = {0, 0, 0};
  const double alphas[3] = {0.05, 0.1, 100.0};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (int k = 0; k < 3; ++k) h[k] += mean_label_entropy(dirichlet_partition(ds, 10, alphas[k], seed)) / 10.0;
  }
  EXPECT_LT(h[0], h[1]);
  EXPECT_LT(h[1], h[2]);
}

TEST(PartitionTest, SameSeedSameManifest) {
  const auto ds = synth_dataset(params(3, 2, 30, 1.0, 4));
  EXPECT_EQ(dirichlet_partition(ds, 4, 0.3, 5).client_indices,
            dirichlet_partition(ds, 4, 0.3, 5).client_indices);
}

TEST(PartitionTest, InfeasibleMinimumIsReported) {
  const auto ds = synth_dataset(params(2, 2, 5, 1.0, 4));
  EXPECT_THROW(dirichlet_partition(ds, 4, 1.0, 1, {.min_per_client = 3, .max_retries = 100}),
               InfeasibleError);
}

TEST(PartitionTest, RejectsBadArguments) {
  const auto ds = synth_dataset(params(2, 2, 5, 1.0, 4));
  EXPECT_THROW(dirichlet_partition(ds, 1, 1.0, 1), ArgumentError);
  EXPECT_THROW(dirichlet_partition(ds, 3, 0.0, 1), ArgumentError);
}

TEST(PartitionTest, ValidateCatchesDuplicatesAndGaps) {
  const auto ds = synth_dataset(params(2, 2, 5, 1.0, 4));
  auto m = dirichlet_partition(ds, 2, 1.0, 1);
  auto dup = m;
  dup.client_indices[0].push_back(dup.client_indices[1].front());
  EXPECT_THROW(dup.validate(ds), ShapeError);
  auto gap = m;
  gap.client_indices[1].pop_back();
  EXPECT_THROW(gap.validate(ds), ShapeError);
}

ClientShard shard_of(std::size_t n, int id = 0) {
  ClientShard s;
  s.client_id = id;
  s.indices.resize(n);
  std::iota(s.indices.begin(), s.indices.end(), std::size_t{0});
  s.n = n;
  s.weight = 1.0;
  return s;
}

TEST(BatchesTest, KeepsShortFinalBatch) {
  const auto ds = synth_dataset(params(2, 2, 5, 1.0, 4));
  const auto b = batches(shard_of(10), ds, 4, 1, 0);
  ASSERT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0].y.size(), 4u);
  EXPECT_EQ(b[1].y.size(), 4u);
  EXPECT_EQ(b[2].y.size(), 2u);
}

TEST(BatchesTest, DeterministicAndCovering) {
  const auto ds = synth_dataset(params(2, 2, 5, 1.0, 4));
  const auto s = shard_of(10, 3);
  const auto a = batches(s, ds, 3, 7, 2);
  const auto b = batches(s, ds, 3, 7, 2);
  std::vector<std::size_t> ia, ib;
  for (const auto& x : a) ia.insert(ia.end(), x.indices.begin(), x.indices.end());
  for (const auto& x : b) ib.insert(ib.end(), x.indices.begin(), x.indices.end());
  EXPECT_EQ(ia, ib);
  auto sorted = ia;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(sorted, s.indices);
  std::vector<std::size_t> ic;
  for (const auto& x : batches(s, ds, 3, 7, 3)) ic.insert(ic.end(), x.indices.begin(), x.indices.end());
  EXPECT_NE(ia, ic);
  for (std::size_t k = 0; k < a[0].y.size(); ++k) EXPECT_EQ(a[0].y[k], ds.labels[a[0].indices[k]]);
}

TEST(BatchesTest, EmptyShardAndZeroBatchSizeAreErrors) {
  const auto ds = synth_dataset(params(2, 2, 5, 1.0, 4));
  EXPECT_THROW(batches(shard_of(0), ds, 4, 1, 0), ArgumentError);
  EXPECT_THROW(batches(shard_of(3), ds, 0, 1, 0), ArgumentError);
}

}  // namespace
}  // namespace fedsim::data
