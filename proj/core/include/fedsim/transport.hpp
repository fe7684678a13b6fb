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
#include <span>

namespace fedsim::transport {

// Exact optimal transport cost between uniform measures on `rows` and `cols`
// points for a dense row-major cost matrix (rows x cols, entries >= 0).
//
// The problem is scaled to integer supplies (cols per source, rows per sink)
// and solved as a min-cost flow with successive shortest paths on the
// bipartite residual graph (Dijkstra with potentials). The scaled problem
// has an integral optimum, so the returned value is the LP optimum up to
// floating-point summation.
double uniform_transport_cost(std::span<const double> cost, std::size_t rows, std::size_t cols);

}  // namespace fedsim::transport
