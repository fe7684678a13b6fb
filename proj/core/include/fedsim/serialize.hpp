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

#include <nlohmann/json.hpp>

#include "fedsim/data.hpp"
#include "fedsim/featstats.hpp"
#include "fedsim/nn.hpp"

namespace fedsim {

// Portable JSON forms (plain number arrays, no binary payloads).
nlohmann::json model_to_json(const nn::SplitModel& model);
nn::SplitModel model_from_json(const nlohmann::json& j);

nlohmann::json manifest_to_json(const data::PartitionManifest& manifest);
data::PartitionManifest manifest_from_json(const nlohmann::json& j);

struct Checkpoint {
  std::size_t round = 0;  // rounds completed
  nn::SplitModel model;
  std::optional<featstats::ClassFeatureStats> global_stats;
};

nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const nlohmann::json& j, double beta_g);

}  // namespace fedsim
