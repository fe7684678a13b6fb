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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedsim/data.hpp"
#include "fedsim/nn.hpp"
#include "fedsim/sim.hpp"

namespace fedsim::cli {

struct SynthSource {
  data::SynthParams params;
  std::size_t test_per_class_n = 100;
};

// Relative paths are resolved against the config file's directory.
struct IdxSource {
  std::filesystem::path train_images;
  std::filesystem::path train_labels;
  std::filesystem::path test_images;
  std::filesystem::path test_labels;
  std::optional<int> num_classes;
};

struct PartitionSpec {
  double alpha = 0.5;
  std::uint64_t seed = 0;
  data::PartitionOptions options;
};

struct ModelSpec {
  std::vector<std::size_t> layer_sizes;
  std::size_t split_index = 1;
  nn::Activation activation = nn::Activation::kRelu;
  std::uint64_t init_seed = 0;
};

struct ExperimentConfig {
  std::variant<SynthSource, IdxSource> data;
  PartitionSpec partition;
  ModelSpec model;
  sim::FedConfig federation;
  std::optional<double> target_accuracy;
  std::filesystem::path output_dir = "out";
  // Fully populated form (defaults filled in); keys are sorted.
  nlohmann::json normalized;
};

// Validates the document against the schema. Unknown keys, wrong types,
// missing seeds and out-of-range values raise ConfigError with the field path.
ExperimentConfig parse_config(const nlohmann::json& document,
                              const std::filesystem::path& base_dir = {});

// Applies "path.to.seed=value" to the raw document. Only seed fields can
// be overridden.
void apply_seed_override(nlohmann::json& document, std::string_view assignment);

ExperimentConfig load_config(const std::filesystem::path& path,
                             std::span<const std::string> seed_overrides = {});

// FNV-1a over the canonical dump of everything except the output section,
// so the same experiment hashes the same wherever it writes.
std::string config_hash(const ExperimentConfig& config);

}  // namespace fedsim::cli
