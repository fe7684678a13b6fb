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
#include <optional>
#include <vector>

namespace fedsim {

// Metrics captured after one communication round (at the eval cadence).
struct RoundRecord {
  std::size_t round = 0;  // 0-based index of the round just aggregated
  double accuracy = 0.0;
  double divergence_total = 0.0;
  double divergence_low = 0.0;
  double divergence_high = 0.0;
  std::vector<double> divergence_per_layer;
  std::optional<double> cgv_low;
  std::optional<double> cgv_high;
  double wall_time_s = 0.0;
};

}  // namespace fedsim
