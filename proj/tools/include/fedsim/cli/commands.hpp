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

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fedsim/cli/config.hpp"
#include "fedsim/data.hpp"
#include "fedsim/record.hpp"

namespace fedsim::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitRuntime = 3,
  kExitVerify = 4,
};

struct CommonOptions {
  std::filesystem::path config_path;
  std::optional<std::filesystem::path> out_dir;
  std::vector<std::string> seed_overrides;
};

struct RunOptions : CommonOptions {
  std::optional<std::filesystem::path> manifest_path;
  bool dump_stats = false;
};

struct LoadedData {
  data::LabeledDataset train;
  data::LabeledDataset test;
};

LoadedData load_data(const ExperimentConfig& config);
data::PartitionManifest make_manifest(const ExperimentConfig& config,
                                      const data::LabeledDataset& train);

// Per-client class counts with each client's dominant class share.
std::string partition_table(const data::PartitionManifest& manifest);

std::string csv_header();
std::string csv_row(const RoundRecord& record);

// Each returns a process exit code. Errors are reported on `err`.
int cmd_partition(const CommonOptions& options, std::ostream& out, std::ostream& err);
int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);
int cmd_verify(const std::string& suite, std::ostream& out, std::ostream& err);

}  // namespace fedsim::cli
