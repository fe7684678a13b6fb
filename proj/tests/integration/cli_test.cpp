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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "fedsim/cli/commands.hpp"
#include "fedsim/cli/config.hpp"
#include "fedsim/error.hpp"

namespace fedsim::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

json small_config() {
  return json::parse(R"({
    "data": {"source": "synth", "params": {"num_classes": 3, "dim": 4, "per_class_n": 30,
             "test_per_class_n": 10, "class_mean_scale": 3.0, "seed": 5}},
    "partition": {"alpha": 0.5, "seed": 6},
    "model": {"layer_sizes": [4, 8, 6, 3], "split_index": 2, "init_seed": 7},
    "federation": {"algorithm": "fedimpro", "num_clients": 4, "clients_per_round": 2,
                   "rounds": 6, "lr": 0.1, "batch_size": 8, "seed": 8},
    "fedimpro": {"noise_seed": 9},
    "eval": {"cadence": 2, "target_accuracy": 0.5, "cgv": true}
  })");
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("fedsim_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const json& j, const std::string& name = "config.json") {
    const auto p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
  }

  RunOptions run_options(const fs::path& cfg, const std::string& out) {
    RunOptions o;
    o.config_path = cfg;
    o.out_dir = dir_ / out;
    return o;
  }

  fs::path dir_;
};

void expect_config_error(const json& j, const std::string& path) {
  try {
    parse_config(j);
    ADD_FAILURE() << "expected a config error at " << path;
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.path(), path) << e.what();
  }
}

TEST(ConfigParseTest, FillsDefaults) {
  const auto cfg = parse_config(small_config());
  EXPECT_EQ(cfg.federation.local_epochs, 1u);
  EXPECT_EQ(cfg.federation.sharing.shared_ratio, 1.0);
  EXPECT_TRUE(cfg.federation.sharing.stats_warm_start);
  EXPECT_EQ(cfg.partition.options.min_per_client, 2u);
  EXPECT_EQ(cfg.normalized["fedimpro"]["beta_m"], 0.9);
  EXPECT_EQ(cfg.federation.eval_cadence, 2u);
  EXPECT_EQ(cfg.target_accuracy, 0.5);
}

TEST(ConfigParseTest, RejectsUnknownKeysWithPath) {
  auto j = small_config();
  j["federation"]["learning_rate"] = 0.1;
  expect_config_error(j, "federation.learning_rate");
  j = small_config();
  j["extra"] = 1;
  expect_config_error(j, "extra");
  j = small_config();
  j["data"]["params"]["noise"] = 1;
  expect_config_error(j, "data.params.noise");
}

TEST(ConfigParseTest, RequiresEverySeed) {
  for (const char* ptr : {"/data/params/seed", "/partition/seed", "/model/init_seed",
                          "/federation/seed", "/fedimpro/noise_seed"}) {
    auto j = small_config();
    const json::json_pointer p(ptr);
    j[p.parent_pointer()].erase(p.back());
    std::string dotted = std::string(ptr).substr(1);
    for (char& c : dotted) c = c == '/' ? '.' : c;
    expect_config_error(j, dotted);
  }
}

TEST(ConfigParseTest, TypeAndRangeErrors) {
  auto j = small_config();
  j["federation"]["lr"] = "fast";
  expect_config_error(j, "federation.lr");
  j = small_config();
  j["federation"]["clients_per_round"] = 9;
  expect_config_error(j, "federation.clients_per_round");
  j = small_config();
  j["model"]["split_index"] = 3;
  expect_config_error(j, "model.split_index");
  j = small_config();
  j["federation"]["rounds"] = -1;
  expect_config_error(j, "federation.rounds");
  j = small_config();
  j.erase("fedimpro");
  expect_config_error(j, "fedimpro");
  j = small_config();
  j["data"]["source"] = "csv";
  expect_config_error(j, "data.source");
}

TEST(ConfigParseTest, SeedOverrides) {
  auto j = small_config();
  apply_seed_override(j, "partition.seed=42");
  EXPECT_EQ(parse_config(j).partition.seed, 42u);
  EXPECT_THROW(apply_seed_override(j, "federation.lr=1"), ConfigError);
  EXPECT_THROW(apply_seed_override(j, "partition.seed=-3"), ConfigError);
  EXPECT_THROW(apply_seed_override(j, "partition.seed"), ConfigError);
}

TEST(ConfigParseTest, HashIgnoresOutputAndTracksContent) {
  auto a = small_config();
  auto b = small_config();
  b["output"] = {{"dir", "elsewhere"}};
  EXPECT_EQ(config_hash(parse_config(a)), config_hash(parse_config(b)));
  // Spelling out a default is the same experiment.
  b["federation"]["local_epochs"] = 1;
  EXPECT_EQ(config_hash(parse_config(a)), config_hash(parse_config(b)));
  b["federation"]["lr"] = 0.2;
  EXPECT_NE(config_hash(parse_config(a)), config_hash(parse_config(b)));
  EXPECT_EQ(config_hash(parse_config(a)).size(), 16u);
}

TEST_F(CliTest, PartitionIsByteStable) {
  const auto cfg = write_config(small_config());
  std::ostringstream out, err;
  CommonOptions o{cfg, dir_ / "p1", {}};
  ASSERT_EQ(cmd_partition(o, out, err), kExitOk) << err.str();
  o.out_dir = dir_ / "p2";
  ASSERT_EQ(cmd_partition(o, out, err), kExitOk) << err.str();
  EXPECT_EQ(slurp(dir_ / "p1" / "manifest.json"), slurp(dir_ / "p2" / "manifest.json"));
  const auto m = json::parse(slurp(dir_ / "p1" / "manifest.json"));
  std::size_t total = 0;
  for (const auto& c : m["clients"]) total += c["n"].get<std::size_t>();
  EXPECT_EQ(total, 90u);
  EXPECT_NE(out.str().find("dominant"), std::string::npos);
}

TEST_F(CliTest, RunWritesAllOutputs) {
  const auto cfg = write_config(small_config());
  auto o = run_options(cfg, "run");
  o.dump_stats = true;
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(o, out, err), kExitOk) << err.str();
  for (const char* f : {"metrics.csv", "summary.json", "checkpoint.json", "timing.json",
                        "stats.json", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(o.out_dir.value() / f)) << f;
  }
  std::istringstream csv(slurp(*o.out_dir / "metrics.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line + "\n", csv_header());
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), 6);
    EXPECT_NE(line.back(), ',');  // cgv columns are filled
  }
  EXPECT_EQ(rows, 3u);
  const auto summary = json::parse(slurp(*o.out_dir / "summary.json"));
  EXPECT_EQ(summary["status"], "ok");
  EXPECT_EQ(summary["config_hash"], config_hash(parse_config(small_config())));
  EXPECT_TRUE(summary["best_accuracy"].is_number());
  const auto ckpt = json::parse(slurp(*o.out_dir / "checkpoint.json"));
  EXPECT_EQ(ckpt["round"], 6);
  EXPECT_FALSE(ckpt["global_stats"].is_null());
}

TEST_F(CliTest, ZeroRoundsGivesHeaderOnlyCsv) {
  auto j = small_config();
  j["federation"]["rounds"] = 0;
  const auto cfg = write_config(j);
  auto o = run_options(cfg, "zero");
  std::ostringstream out, err;
  ASSERT_EQ(cmd_run(o, out, err), kExitOk) << err.str();
  EXPECT_EQ(slurp(*o.out_dir / "metrics.csv"), csv_header());
  const auto summary = json::parse(slurp(*o.out_dir / "summary.json"));
  EXPECT_TRUE(summary["best_accuracy"].is_null());
  EXPECT_TRUE(summary["rounds_to_target"].is_null());
}

TEST_F(CliTest, RunIsByteDeterministic) {
  const auto cfg = write_config(small_config());
  std::ostringstream out, err;
  auto a = run_options(cfg, "a");
  auto b = run_options(cfg, "b");
  ASSERT_EQ(cmd_run(a, out, err), kExitOk);
  ASSERT_EQ(cmd_run(b, out, err), kExitOk);
  for (const char* f : {"metrics.csv", "summary.json", "checkpoint.json", "manifest.json"}) {
    EXPECT_EQ(slurp(*a.out_dir / f), slurp(*b.out_dir / f)) << f;
  }
}

TEST_F(CliTest, ReusesManifestAndSeedOverrides) {
  const auto cfg = write_config(small_config());
  std::ostringstream out, err;
  CommonOptions p{cfg, dir_ / "part", {}};
  ASSERT_EQ(cmd_partition(p, out, err), kExitOk);
  auto inline_run = run_options(cfg, "inline");
  auto reuse = run_options(cfg, "reuse");
  reuse.manifest_path = dir_ / "part" / "manifest.json";
  ASSERT_EQ(cmd_run(inline_run, out, err), kExitOk);
  ASSERT_EQ(cmd_run(reuse, out, err), kExitOk) << err.str();
  EXPECT_EQ(slurp(*inline_run.out_dir / "metrics.csv"), slurp(*reuse.out_dir / "metrics.csv"));

  auto other = run_options(cfg, "other");
  other.seed_overrides = {"federation.seed=99"};
  ASSERT_EQ(cmd_run(other, out, err), kExitOk);
  EXPECT_NE(slurp(*inline_run.out_dir / "metrics.csv"), slurp(*other.out_dir / "metrics.csv"));
  EXPECT_NE(slurp(*inline_run.out_dir / "summary.json"), slurp(*other.out_dir / "summary.json"));
}

TEST_F(CliTest, ExitCodes) {
  std::ostringstream out, err;
  auto j = small_config();
  j["federation"]["bogus"] = true;
  auto o = run_options(write_config(j, "bad.json"), "bad");
  EXPECT_EQ(cmd_run(o, out, err), kExitConfig);
  EXPECT_NE(err.str().find("federation.bogus"), std::string::npos);

  o = run_options(dir_ / "missing.json", "missing");
  EXPECT_EQ(cmd_run(o, out, err), kExitConfig);

  j = small_config();
  j["model"]["layer_sizes"] = {5, 8, 6, 3};
  o = run_options(write_config(j, "shape.json"), "shape");
  EXPECT_EQ(cmd_run(o, out, err), kExitConfig);

  j = small_config();
  j["partition"]["alpha"] = 0.001;
  j["partition"]["min_per_client"] = 30;
  j["partition"]["max_retries"] = 2;
  o = run_options(write_config(j, "infeasible.json"), "infeasible");
  EXPECT_EQ(cmd_run(o, out, err), kExitRuntime);

  EXPECT_EQ(cmd_verify("ot", out, err), kExitOk);
  EXPECT_EQ(cmd_verify("nope", out, err), kExitConfig);
}

TEST_F(CliTest, FailedRunLeavesTruncationMarker) {
  std::ostringstream out, err;
  auto cfg = write_config(small_config());
  CommonOptions p{cfg, dir_ / "part", {}};
  ASSERT_EQ(cmd_partition(p, out, err), kExitOk);
  // A manifest that no longer matches the dataset fails inside the run.
  auto m = json::parse(slurp(dir_ / "part" / "manifest.json"));
  m["clients"][0]["indices"].push_back(0);
  std::ofstream(dir_ / "broken.json") << m.dump();
  auto o = run_options(cfg, "broken");
  o.manifest_path = dir_ / "broken.json";
  EXPECT_EQ(cmd_run(o, out, err), kExitRuntime);
  const std::string csv = slurp(*o.out_dir / "metrics.csv");
  EXPECT_NE(csv.find("truncated"), std::string::npos);
  EXPECT_EQ(json::parse(slurp(*o.out_dir / "summary.json"))["status"], "error");
}

}  // namespace
}  // namespace fedsim::cli
