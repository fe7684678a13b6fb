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

#include "fedsim/nn.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "fedsim/error.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace fedsim::nn {
namespace {

using testing::layer;
using testing::random_batch;
using testing::random_labels;

SplitModel identity_model() {
  return SplitModel({layer(2, 2, {1, 0, 0, 1}, {0, 0}), layer(2, 2, {1, 0, 0, 1}, {0, 0})}, 1);
}

TEST(TensorTest, RejectsShapeMismatchAndNonFinite) {
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), ShapeError);
  EXPECT_THROW(Tensor({1, 2}, {1.0, std::nan("")}), NumericError);
  EXPECT_NO_THROW(Tensor({1, 2}, {1.0, INFINITY}, Check::kNone));
  Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(t(1, 2), 6.0);
}

TEST(SplitModelTest, ValidatesCompositionAndSplit) {
  EXPECT_THROW(SplitModel({layer(2, 3, std::vector<double>(6), {0, 0, 0}),
                           layer(2, 2, std::vector<double>(4), {0, 0})},
                          1),
               ShapeError);
  EXPECT_THROW(SplitModel({layer(2, 2, std::vector<double>(4), {0, 0}),
                           layer(2, 2, std::vector<double>(4), {0, 0})},
                          2),
               ShapeError);
  EXPECT_THROW(SplitModel({layer(2, 2, std::vector<double>(4), {0, 0}),
                           layer(2, 2, std::vector<double>(4), {0, 0})},
                          0),
               ShapeError);
}

TEST(SplitModelTest, BlockSizesSumToParameterCount) {
  const std::size_t sizes[] = {5, 7, 6, 3};
  for (std::size_t s = 1; s < 3; ++s) {
    auto m = SplitModel::init(sizes, s, Activation::kRelu, 3);
    EXPECT_EQ(m.low_param_count() + m.high_param_count(), 5 * 7 + 7 + 7 * 6 + 6 + 6 * 3 + 3);
    EXPECT_EQ(m.parameters().size(), m.param_count());
    EXPECT_EQ(m.feature_dim(), sizes[s]);
  }
}

TEST(SplitModelTest, InitIsSeededAndBounded) {
  const std::size_t sizes[] = {16, 8, 4};
  auto a = SplitModel::init(sizes, 1, Activation::kRelu, 11);
  auto b = SplitModel::init(sizes, 1, Activation::kRelu, 11);
  auto c = SplitModel::init(sizes, 1, Activation::kRelu, 12);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  for (double w : a.layers()[0].weight) EXPECT_LE(std::abs(w), 0.25);
  for (double w : a.layers()[1].weight) EXPECT_LE(std::abs(w), 1.0 / std::sqrt(8.0));
  EXPECT_EQ(a.layers()[1].activation, Activation::kIdentity);
}

TEST(ForwardTest, IdentityModelPassesInputThrough) {
  const auto m = identity_model();
  Tensor x({2, 2}, {1.5, -2.0, 0.25, 4.0});
  const auto out = forward_full(m, x);
  EXPECT_EQ(out.features, x);
  EXPECT_EQ(out.logits, x);
}

TEST(ForwardTest, HandLinearAlgebra) {
  SplitModel m({layer(2, 2, {2, 0, 0, 3}, {0, 0}), layer(2, 2, {1, 0, 0, 1}, {0, 0})}, 1);
  const auto out = forward_full(m, Tensor({1, 2}, {1, 0}));
  EXPECT_EQ(out.features.values()[0], 2.0);
  EXPECT_EQ(out.features.values()[1], 0.0);
}

TEST(ForwardTest, MatchesStraightLineOracleBitForBit) {
  const std::size_t sizes[] = {6, 10, 7, 4};
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = SplitModel::init(sizes, 2, Activation::kRelu, seed);
    const auto x = random_batch(seed + 100, 4, 6);
    const auto out = forward_full(m, x);
    for (std::size_t r = 0; r < 4; ++r) {
      const auto ref = testing::reference_logits(m, x.row(r));
      for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(out.logits(r, c), ref[c]);
    }
  }
}

TEST(ForwardTest, HighPartComposesExactly) {
  const std::size_t sizes[] = {5, 9, 8, 3};
  for (std::size_t split = 1; split < 3; ++split) {
    const auto m = SplitModel::init(sizes, split, Activation::kRelu, 7);
    const auto x = random_batch(1, 6, 5);
    const auto out = forward_full(m, x);
    EXPECT_EQ(forward_high(m, out.features), out.logits);
  }
}

TEST(ForwardTest, ZeroFeatureWithZeroBiasGivesZeroLogits) {
  const std::size_t sizes[] = {4, 3, 2};
  auto m = SplitModel::init(sizes, 1, Activation::kRelu, 1);
  for (double& b : m.mutable_layers()[1].bias) b = 0.0;
  const auto logits = forward_high(m, Tensor::matrix(3, 3));
  for (double v : logits.values()) EXPECT_EQ(v, 0.0);
}

TEST(ForwardTest, DimensionMismatchIsShapeError) {
  const auto m = identity_model();
  EXPECT_THROW(forward_full(m, Tensor::matrix(2, 3)), ShapeError);
  EXPECT_THROW(forward_high(m, Tensor::matrix(2, 5)), ShapeError);
  EXPECT_THROW(forward_full(m, Tensor::matrix(0, 2)), ShapeError);
}

TEST(LossTest, UniformLogitsGiveLogTwo) {
  SplitModel m({layer(2, 2, {1, 0, 0, 1}, {0, 0}), layer(2, 2, {0, 0, 0, 0}, {0, 0})}, 1);
  const std::vector<int> y = {0, 1, 1};
  const auto r = loss_and_grad(m, random_batch(3, 3, 2), y, Entry::kRaw);
  EXPECT_NEAR(r.loss, std::log(2.0), 1e-15);
}

TEST(LossTest, RejectsBadLabels) {
  const auto m = identity_model();
  const std::vector<int> bad = {0, 2};
  EXPECT_THROW(loss_and_grad(m, Tensor::matrix(2, 2), bad, Entry::kRaw), LabelError);
  const std::vector<int> neg = {-1, 0};
  EXPECT_THROW(loss_and_grad(m, Tensor::matrix(2, 2), neg, Entry::kRaw), LabelError);
  const std::vector<int> short_labels = {0};
  EXPECT_THROW(loss_and_grad(m, Tensor::matrix(2, 2), short_labels, Entry::kRaw), ShapeError);
}

TEST(LossTest, FiniteDifferenceOn2_16_8_2) {
  const std::size_t sizes[] = {2, 16, 8, 2};
  const auto m = SplitModel::init(sizes, 2, Activation::kRelu, 2024);
  const auto x = random_batch(5, 8, 2);
  const auto y = random_labels(5, 8, 2);
  const auto analytic = loss_and_grad(m, x, y, Entry::kRaw).grad;
  const auto numeric = testing::finite_difference_gradient(m, x, y, 1e-5);
  EXPECT_LT(testing::max_relative_error(analytic, numeric), 1e-6);
  EXPECT_NEAR(loss_and_grad(m, x, y, Entry::kRaw).loss, testing::reference_loss(m, x, y), 1e-13);
}

TEST(LossTest, FiniteDifferencePropertyOverSeeds) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    const std::size_t in = 2 + rng() % 5, h1 = 3 + rng() % 8, h2 = 2 + rng() % 6, c = 2 + rng() % 3;
    const std::size_t sizes[] = {in, h1, h2, c};
    const auto act = seed % 3 == 0 ? Activation::kIdentity : Activation::kRelu;
    const auto m = SplitModel::init(sizes, 1 + seed % 2, act, seed);
    const auto x = random_batch(seed + 50, 1 + seed % 8, in);
    const auto y = random_labels(seed + 50, x.rows(), static_cast<int>(c));
    const auto analytic = loss_and_grad(m, x, y, Entry::kRaw).grad;
    const auto numeric = testing::finite_difference_gradient(m, x, y, 1e-5);
    EXPECT_LT(testing::max_relative_error(analytic, numeric), 1e-6) << "seed " << seed;
  }
}

TEST(LossTest, FeatureEntryMatchesRawHighBlock) {
  const std::size_t sizes[] = {6, 12, 9, 4};
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = SplitModel::init(sizes, 1 + seed % 2, Activation::kRelu, seed);
    const auto x = random_batch(seed, 7, 6);
    const auto y = random_labels(seed, 7, 4);
    const auto raw = loss_and_grad(m, x, y, Entry::kRaw);
    const auto feat = loss_and_grad(m, raw.features, y, Entry::kFeature);
    ASSERT_EQ(raw.grad.high.size(), feat.grad.high.size());
    for (std::size_t k = 0; k < raw.grad.high.size(); ++k) EXPECT_EQ(raw.grad.high[k], feat.grad.high[k]);
    for (double v : feat.grad.low) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(raw.loss, feat.loss);
  }
}

TEST(UpdateTest, ZeroGradientLeavesModelUnchanged) {
  const std::size_t sizes[] = {3, 4, 2};
  const auto m = SplitModel::init(sizes, 1, Activation::kRelu, 4);
  auto u = m;
  apply_update(u, m.zeros_like(), 0.3);
  EXPECT_EQ(u, m);
}

TEST(UpdateTest, UnitStepOnOwnParametersZeroesModel) {
  const std::size_t sizes[] = {3, 4, 2};
  auto m = SplitModel::init(sizes, 1, Activation::kRelu, 4);
  apply_update(m, m.parameters(), 1.0);
  EXPECT_EQ(m.parameters(), m.zeros_like());
}

TEST(UpdateTest, SequentialUpdatesAddForIdentityActivation) {
  const std::size_t sizes[] = {3, 4, 2};
  const auto m = SplitModel::init(sizes, 1, Activation::kIdentity, 9);
  const auto x = random_batch(2, 5, 3);
  const auto y = random_labels(2, 5, 2);
  const auto g1 = loss_and_grad(m, x, y, Entry::kRaw).grad;
  auto g2 = g1;
  g2 *= -0.5;
  g2.high[0] += 0.125;
  auto twice = m;
  apply_update(twice, g1, 0.25);
  apply_update(twice, g2, 0.25);
  auto once = m;
  auto sum = g1;
  sum += g2;
  apply_update(once, sum, 0.25);
  const auto a = twice.parameters();
  const auto b = once.parameters();
  for (std::size_t k = 0; k < a.low.size(); ++k) EXPECT_NEAR(a.low[k], b.low[k], 1e-15);
  for (std::size_t k = 0; k < a.high.size(); ++k) EXPECT_NEAR(a.high[k], b.high[k], 1e-15);
}

TEST(UpdateTest, RejectsNegativeRateAndWrongShape) {
  const std::size_t sizes[] = {3, 4, 2};
  auto m = SplitModel::init(sizes, 1, Activation::kRelu, 4);
  EXPECT_THROW(apply_update(m, m.zeros_like(), -1.0), ArgumentError);
  GradientVector wrong{{1.0}, {2.0}};
  EXPECT_THROW(apply_update(m, wrong, 0.1), ShapeError);
}

TEST(DeterminismTest, RepeatedEvaluationIsIdentical) {
  const std::size_t sizes[] = {4, 8, 8, 3};
  const auto m = SplitModel::init(sizes, 2, Activation::kRelu, 77);
  const auto x = random_batch(8, 16, 4);
  const auto y = random_labels(8, 16, 3);
  const auto a = loss_and_grad(m, x, y, Entry::kRaw);
  const auto b = loss_and_grad(m, x, y, Entry::kRaw);
  EXPECT_EQ(a.loss, b.loss);
  EXPECT_EQ(a.grad, b.grad);
}

}  // namespace
}  // namespace fedsim::nn
