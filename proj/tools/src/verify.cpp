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

#include "fedsim/cli/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "fedsim/data.hpp"
#include "fedsim/error.hpp"
#include "fedsim/featstats.hpp"
#include "fedsim/metrics.hpp"
#include "fedsim/nn.hpp"
#include "fedsim/rng.hpp"

namespace fedsim::cli {
namespace {

Check within(std::string name, double measured, double expected, double tolerance) {
  Check c{std::move(name), Check::kWithin, measured, expected, tolerance, false};
  c.passed = std::abs(measured - expected) <= tolerance;
  return c;
}

Check below(std::string name, double measured, double bound) {
  Check c{std::move(name), Check::kAtMost, measured, 0.0, bound, false};
  c.passed = measured <= bound;
  return c;
}

Check above(std::string name, double measured, double bound) {
  Check c{std::move(name), Check::kAtLeast, measured, 0.0, bound, false};
  c.passed = measured >= bound;
  return c;
}

Tensor gaussian(Engine& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> v(rows * cols);
  for (double& x : v) x = g(rng);
  return Tensor({rows, cols}, std::move(v));
}

std::vector<int> uniform_labels(Engine& rng, std::size_t n, int classes) {
  std::uniform_int_distribution<int> u(0, classes - 1);
  std::vector<int> y(n);
  for (int& v : y) v = u(rng);
  return y;
}

double max_relative(std::span<const double> a, std::span<const double> b) {
  double diff = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  return scale == 0.0 ? diff : diff / scale;
}

nn::SplitModel random_model(Engine& rng, std::size_t max_dim, std::uint64_t seed) {
  std::uniform_int_distribution<std::size_t> layers(3, 4);
  std::uniform_int_distribution<std::size_t> width(2, max_dim);
  std::vector<std::size_t> sizes(layers(rng) + 1);
  for (auto& s : sizes) s = width(rng);
  std::uniform_int_distribution<std::size_t> split(1, sizes.size() - 2);
  return nn::SplitModel::init(sizes, split(rng), nn::Activation::kRelu, seed);
}

std::vector<double> flatten(const nn::BlockVector& v) {
  std::vector<double> out = v.low;
  out.insert(out.end(), v.high.begin(), v.high.end());
  return out;
}

}  // namespace

std::vector<Check> verify_grad() {
  std::vector<Check> out;
  Engine rng = make_engine(2024, Stream::kModelInit, {1});
  double identity = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto model = random_model(rng, 64, s);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 32)(rng);
    const Tensor x = gaussian(rng, n, model.layer_sizes().front());
    const auto y = uniform_labels(rng, n, static_cast<int>(model.num_classes()));
    const auto raw = nn::loss_and_grad(model, x, y, nn::Entry::kRaw);
    const auto feat = nn::loss_and_grad(model, raw.features, y, nn::Entry::kFeature);
    identity = std::max(identity, max_relative(raw.grad.high, feat.grad.high));
  }
  out.push_back(below("grad.high_block_identity.max_rel_error", identity, 1e-12));

  const double step = 1e-5;
  double fd = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto model = random_model(rng, 8, 100 + s);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
    const Tensor x = gaussian(rng, n, model.layer_sizes().front());
    const auto y = uniform_labels(rng, n, static_cast<int>(model.num_classes()));
    const auto analytic = flatten(nn::loss_and_grad(model, x, y, nn::Entry::kRaw).grad);
    const auto base = model.parameters();
    std::vector<double> numeric(analytic.size());
    for (std::size_t i = 0; i < analytic.size(); ++i) {
      auto probe = [&](double delta) {
        auto p = base;
        (i < p.low.size() ? p.low[i] : p.high[i - p.low.size()]) += delta;
        model.set_parameters(p);
        return nn::loss_and_grad(model, x, y, nn::Entry::kRaw).loss;
      };
      numeric[i] = (probe(step) - probe(-step)) / (2.0 * step);
    }
    model.set_parameters(base);
    fd = std::max(fd, max_relative(analytic, numeric));
  }
  out.push_back(below("grad.finite_difference.max_rel_error", fd, 1e-6));
  return out;
}

std::vector<Check> verify_theorem2() {
  std::vector<Check> out;
  const std::size_t sizes[] = {6, 12, 8, 4};
  for (std::size_t clients : {2u, 5u}) {
    const auto model = nn::SplitModel::init(sizes, 2, nn::Activation::kRelu, 31);
    const auto ds = data::synth_dataset({4, 6, 40, 2.0, 31});
    const auto shards = data::dirichlet_partition(ds, clients, 0.3, 31).shards();
    Engine rng = make_engine(31, Stream::kFeatureSampling, {clients});
    metrics::SharedFeatureBatch shared{gaussian(rng, 16, 8), uniform_labels(rng, 16, 4)};
    const auto plain = metrics::cgv(model, shards, ds);
    for (double ratio : {1.0, 3.0}) {
      const auto impro = metrics::cgv_fedimpro(model, shards, ds, shared, ratio);
      const double expected = 1.0 / ((1.0 + ratio) * (1.0 + ratio));
      const std::string tag = "theorem2.clients=" + std::to_string(clients) +
                              ".ratio=" + std::to_string(static_cast<int>(ratio));
      out.push_back(within(tag + ".high_factor", impro.high_sq / plain.high_sq, expected,
                           1e-8 * expected));
      out.push_back(below(tag + ".low_rel_change",
                          std::abs(impro.low_sq - plain.low_sq) / plain.low_sq, 1e-12));
    }
  }
  return out;
}

std::vector<Check> verify_ot() {
  std::vector<Check> out;
  auto line = [](std::vector<double> xs) {
    data::LabeledDataset d;
    const std::size_t n = xs.size();
    d.features = Tensor({n, 1}, std::move(xs));
    d.labels.assign(d.features.rows(), 0);
    d.num_classes = 1;
    return d;
  };
  const auto a = data::synth_dataset({3, 4, 6, 2.0, 5});
  const auto b = data::synth_dataset({3, 4, 5, 2.0, 6});
  out.push_back(within("ot.identical_sets", metrics::conditional_wasserstein(a, a), 0.0, 0.0));
  out.push_back(within("ot.point_masses", metrics::conditional_wasserstein(line({0}), line({2})),
                       2.0, 0.0));
  out.push_back(within("ot.two_point_line",
                       metrics::conditional_wasserstein(line({0, 1}), line({1, 2})), 1.0, 0.0));
  out.push_back(below("ot.symmetry",
                      std::abs(metrics::conditional_wasserstein(a, b) -
                               metrics::conditional_wasserstein(b, a)),
                      1e-10));

  // Equal-size uniform marginals have a permutation among their optimal plans.
  Engine rng = make_engine(5, Stream::kTransportSubsample, {0});
  double worst = 0.0;
  for (std::size_t n = 1; n <= 6; ++n) {
    const Tensor xa = gaussian(rng, n, 2), xb = gaussian(rng, n, 2);
    data::LabeledDataset da{xa, std::vector<int>(n, 0), 1}, db{xb, std::vector<int>(n, 0), 1};
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    double best = std::numeric_limits<double>::infinity();
    do {
      double cost = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cost += std::hypot(xa(i, 0) - xb(perm[i], 0), xa(i, 1) - xb(perm[i], 1));
      }
      best = std::min(best, cost / static_cast<double>(n));
    } while (std::next_permutation(perm.begin(), perm.end()));
    worst = std::max(worst, std::abs(metrics::conditional_wasserstein(da, db) - best));
  }
  out.push_back(below("ot.permutation_oracle.max_abs_error", worst, 1e-10));
  return out;
}

std::vector<Check> verify_stats() {
  std::vector<Check> out;
  Engine rng = make_engine(77, Stream::kFeatureSampling, {0});
  const int classes = 3;
  const std::size_t dim = 5;
  const Tensor h1 = gaussian(rng, 12, dim), h2 = gaussian(rng, 12, dim);
  const auto y = uniform_labels(rng, 12, classes);

  featstats::ClassFeatureStats frozen(classes, dim, 1.0);
  featstats::client_update(frozen, h1, y);
  auto after = frozen;
  featstats::client_update(after, h2, y);
  double drift = 0.0;
  for (int c = 0; c < classes; ++c) {
    for (std::size_t d = 0; d < dim; ++d) {
      drift = std::max({drift, std::abs(after.mean(c)[d] - frozen.mean(c)[d]),
                        std::abs(after.var(c)[d] - frozen.var(c)[d])});
    }
  }
  out.push_back(within("stats.beta_one_fixed_point", drift, 0.0, 0.0));

  featstats::ClassFeatureStats follow(classes, dim, 0.0), fresh(classes, dim, 0.0);
  featstats::client_update(follow, h1, y);
  featstats::client_update(follow, h2, y);
  featstats::client_update(fresh, h2, y);
  double gap = 0.0;
  for (int c = 0; c < classes; ++c) {
    if (fresh.update_count(c) == 0) continue;
    for (std::size_t d = 0; d < dim; ++d) {
      gap = std::max({gap, std::abs(follow.mean(c)[d] - fresh.mean(c)[d]),
                      std::abs(follow.var(c)[d] - fresh.var(c)[d])});
    }
  }
  out.push_back(within("stats.beta_zero_tracks_batch", gap, 0.0, 0.0));

  std::vector<featstats::ClassFeatureStats> clients;
  for (int i = 0; i < 4; ++i) {
    featstats::ClassFeatureStats s(classes, dim, 0.5);
    featstats::client_update(s, gaussian(rng, 30, dim), uniform_labels(rng, 30, classes));
    clients.push_back(s);
  }
  featstats::ClassFeatureStats global(classes, dim, 0.0);
  Engine quiet = make_engine(1, Stream::kServerNoise, {0});
  const auto agg = featstats::server_aggregate(clients, global, 0.0, quiet);
  double mean_gap = 0.0;
  for (int c = 0; c < classes; ++c) {
    for (std::size_t d = 0; d < dim; ++d) {
      double m = 0.0, v = 0.0;
      std::size_t k = 0;
      for (const auto& s : clients) {
        if (s.round_updates(c) == 0) continue;
        m += s.mean(c)[d];
        v += s.var(c)[d];
        ++k;
      }
      if (k == 0) continue;
      mean_gap = std::max({mean_gap, std::abs(agg.mean(c)[d] - m / static_cast<double>(k)),
                           std::abs(agg.var(c)[d] - v / static_cast<double>(k))});
    }
  }
  out.push_back(within("stats.noiseless_aggregate_is_mean", mean_gap, 0.0, 0.0));

  double min_var = std::numeric_limits<double>::infinity();
  Engine noisy = make_engine(3, Stream::kServerNoise, {1});
  auto g = featstats::ClassFeatureStats(classes, dim, 0.5);
  for (int t = 0; t < 10000; ++t) {
    g = featstats::server_aggregate(clients, g, 0.5, noisy);
    for (int c = 0; c < classes; ++c) {
      for (double v : g.var(c)) min_var = std::min(min_var, v);
    }
  }
  out.push_back(above("stats.noisy_min_variance", min_var, 0.0));
  return out;
}

std::vector<Check> run_suite(std::string_view suite) {
  if (suite == "grad") return verify_grad();
  if (suite == "theorem2") return verify_theorem2();
  if (suite == "ot") return verify_ot();
  if (suite == "stats") return verify_stats();
  throw ArgumentError("unknown verify suite '" + std::string(suite) + "'");
}

void print_checks(const std::vector<Check>& checks, std::ostream& out) {
  char buf[512];
  for (const auto& c : checks) {
    const char* status = c.passed ? "PASS" : "FAIL";
    if (c.kind == Check::kAtMost) {
      std::snprintf(buf, sizeof buf, "[%s] %s measured %.3e <= %.1e", status, c.name.c_str(),
                    c.measured, c.bound);
    } else if (c.kind == Check::kAtLeast) {
      std::snprintf(buf, sizeof buf, "[%s] %s measured %.6e >= %.1e", status, c.name.c_str(),
                    c.measured, c.bound);
    } else {
      std::snprintf(buf, sizeof buf, "[%s] %s measured %.8f expected %.10g tol %.1e", status,
                    c.name.c_str(), c.measured, c.expected, c.bound);
    }
    out << buf << '\n';
  }
}

}  // namespace fedsim::cli
