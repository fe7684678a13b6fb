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

#include "fedsim/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "fedsim/error.hpp"

namespace fedsim::transport {

double uniform_transport_cost(std::span<const double> cost, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw ArgumentError("transport needs points on both sides");
  if (cost.size() != rows * cols) throw ShapeError("cost matrix does not match rows x cols");
  for (double c : cost) {
    if (!std::isfinite(c) || c < 0.0) throw NumericError("transport costs must be finite and >= 0");
  }

  const auto inf = std::numeric_limits<double>::infinity();
  // Nodes: sources [0, rows), sinks [rows, rows + cols).
  const std::size_t n = rows + cols;
  std::vector<std::int64_t> supply(rows, static_cast<std::int64_t>(cols));
  std::vector<std::int64_t> demand(cols, static_cast<std::int64_t>(rows));
  std::vector<std::int64_t> flow(rows * cols, 0);
  std::vector<double> potential(n, 0.0);
  std::vector<double> dist(n);
  std::vector<std::size_t> parent(n);
  std::vector<char> done(n);
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  std::int64_t remaining = static_cast<std::int64_t>(rows) * static_cast<std::int64_t>(cols);
  while (remaining > 0) {
    std::fill(dist.begin(), dist.end(), inf);
    std::fill(parent.begin(), parent.end(), kNone);
    std::fill(done.begin(), done.end(), 0);
    for (std::size_t i = 0; i < rows; ++i) {
      if (supply[i] > 0) dist[i] = 0.0;
    }
    // Dense Dijkstra. Forward arcs source->sink always exist; backward arcs
    // sink->source exist where flow is positive.
    for (;;) {
      std::size_t u = kNone;
      double best = inf;
      for (std::size_t v = 0; v < n; ++v) {
        if (!done[v] && dist[v] < best) {
          best = dist[v];
          u = v;
        }
      }
      if (u == kNone) break;
      done[u] = 1;
      if (u < rows) {
        for (std::size_t j = 0; j < cols; ++j) {
          const std::size_t v = rows + j;
          if (done[v]) continue;
          const double reduced = cost[u * cols + j] + potential[u] - potential[v];
          const double nd = dist[u] + std::max(0.0, reduced);
          if (nd < dist[v]) {
            dist[v] = nd;
            parent[v] = u;
          }
        }
      } else {
        const std::size_t j = u - rows;
        for (std::size_t i = 0; i < rows; ++i) {
          if (done[i] || flow[i * cols + j] == 0) continue;
          const double reduced = -cost[i * cols + j] + potential[u] - potential[i];
          const double nd = dist[u] + std::max(0.0, reduced);
          if (nd < dist[i]) {
            dist[i] = nd;
            parent[i] = u;
          }
        }
      }
    }

    std::size_t sink = kNone;
    for (std::size_t j = 0; j < cols; ++j) {
      const std::size_t v = rows + j;
      if (demand[j] > 0 && dist[v] < inf && (sink == kNone || dist[v] < dist[sink])) sink = v;
    }
    if (sink == kNone) throw NumericError("transport solver found no augmenting path");

    // Walk back to a source with supply, collecting the bottleneck.
    std::int64_t push = demand[sink - rows];
    std::size_t v = sink;
    while (parent[v] != kNone) {
      const std::size_t u = parent[v];
      if (u >= rows) push = std::min(push, flow[v * cols + (u - rows)]);
      v = u;
    }
    push = std::min(push, supply[v]);
    const std::size_t origin = v;

    v = sink;
    while (parent[v] != kNone) {
      const std::size_t u = parent[v];
      if (u < rows) {
        flow[u * cols + (v - rows)] += push;
      } else {
        flow[v * cols + (u - rows)] -= push;
      }
      v = u;
    }
    supply[origin] -= push;
    demand[sink - rows] -= push;
    remaining -= push;

    const double cap = dist[sink];
    for (std::size_t u = 0; u < n; ++u) potential[u] += std::min(dist[u], cap);
  }

  double total = 0.0;
  for (std::size_t k = 0; k < flow.size(); ++k) {
    if (flow[k] != 0) total += static_cast<double>(flow[k]) * cost[k];
  }
  return total / (static_cast<double>(rows) * static_cast<double>(cols));
}

}  // namespace fedsim::transport
