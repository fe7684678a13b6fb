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

#include <iostream>

#include <CLI11.hpp>

#include "fedsim/cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace fedsim::cli;
  CLI::App app{"Federated learning simulator with split-model feature sharing"};
  app.require_subcommand(1);

  CommonOptions partition;
  RunOptions run;
  std::string suite;

  auto add_common = [](CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("config", o.config_path, "Experiment config (JSON)")->required();
    cmd->add_option("--out-dir", o.out_dir, "Output directory (overrides output.dir)");
    cmd->add_option("--seed-override", o.seed_overrides,
                    "Replace a seed, e.g. partition.seed=3 (repeatable)")
        ->take_all();
  };

  auto* p = app.add_subcommand("partition", "Write the client partition manifest");
  add_common(p, partition);

  auto* r = app.add_subcommand("run", "Run a federated training experiment");
  add_common(r, run);
  r->add_option("--manifest", run.manifest_path, "Use an existing manifest instead of partitioning");
  r->add_flag("--dump-stats", run.dump_stats, "Also write the final global feature statistics");

  auto* v = app.add_subcommand("verify", "Run a built-in property suite");
  v->add_option("--suite", suite, "Suite name")
      ->required()
      ->check(CLI::IsMember({"grad", "theorem2", "ot", "stats"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (p->parsed()) return cmd_partition(partition, std::cout, std::cerr);
  if (r->parsed()) return cmd_run(run, std::cout, std::cerr);
  return cmd_verify(suite, std::cout, std::cerr);
}
