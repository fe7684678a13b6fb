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

#include "fedsim/cli/commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fedsim/cli/verify.hpp"
#include "fedsim/error.hpp"
#include "fedsim/idx.hpp"
#include "fedsim/metrics.hpp"
#include "fedsim/serialize.hpp"
#include "fedsim/sim.hpp"

namespace fedsim::cli {
namespace {

using nlohmann::json;

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
  if (!f.flush()) throw Error("failed writing " + path.string());
}

void write_json(const std::filesystem::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path.string());
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

std::filesystem::path prepare_dir(const ExperimentConfig& cfg, const CommonOptions& opts) {
  const auto dir = opts.out_dir.value_or(cfg.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void check_model_fits(const ExperimentConfig& cfg, const data::LabeledDataset& train) {
  const auto& sizes = cfg.model.layer_sizes;
  if (sizes.front() != train.dim()) {
    throw ConfigError("model.layer_sizes", "first size must equal the data dimension " +
                                               std::to_string(train.dim()));
  }
  if (sizes.back() != static_cast<std::size_t>(train.num_classes)) {
    throw ConfigError("model.layer_sizes", "last size must equal the class count " +
                                               std::to_string(train.num_classes));
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

LoadedData load_data(const ExperimentConfig& config) {
  if (const auto* s = std::get_if<SynthSource>(&config.data)) {
    auto split = data::synth_train_test(s->params, s->test_per_class_n);
    return {std::move(split.train), std::move(split.test)};
  }
  const auto& idx = std::get<IdxSource>(config.data);
  LoadedData out{data::load_idx(idx.train_images, idx.train_labels, idx.num_classes), {}};
  out.test = data::load_idx(idx.test_images, idx.test_labels, out.train.num_classes);
  if (out.test.dim() != out.train.dim()) throw ShapeError("train and test images differ in size");
  return out;
}

data::PartitionManifest make_manifest(const ExperimentConfig& config,
                                      const data::LabeledDataset& train) {
  return data::dirichlet_partition(train, config.federation.num_clients, config.partition.alpha,
                                   config.partition.seed, config.partition.options);
}

std::string partition_table(const data::PartitionManifest& manifest) {
  std::ostringstream s;
  char buf[64];
  s << "client       n  dominant   share";
  for (int c = 0; c < manifest.num_classes; ++c) {
    std::snprintf(buf, sizeof buf, " %6s", ("c" + std::to_string(c)).c_str());
    s << buf;
  }
  s << '\n';
  for (std::size_t m = 0; m < manifest.num_clients(); ++m) {
    const auto& counts = manifest.class_counts[m];
    const std::size_t n = manifest.client_indices[m].size();
    std::size_t top = 0;
    for (std::size_t c = 1; c < counts.size(); ++c) {
      if (counts[c] > counts[top]) top = c;
    }
    const double share = n == 0 ? 0.0 : static_cast<double>(counts[top]) / static_cast<double>(n);
    std::snprintf(buf, sizeof buf, "%6zu %7zu %9zu %7.3f", m, n, top, share);
    s << buf;
    for (std::size_t c : counts) {
      std::snprintf(buf, sizeof buf, " %6zu", c);
      s << buf;
    }
    s << '\n';
  }
  std::snprintf(buf, sizeof buf, "mean label entropy: %.6f nats\n",
                data::mean_label_entropy(manifest));
  s << buf;
  return s.str();
}

std::string csv_header() {
  return "round,accuracy,divergence_total,divergence_low,divergence_high,cgv_low,cgv_high\n";
}

std::string csv_row(const RoundRecord& r) {
  std::string row = std::to_string(r.round) + "," + fmt(r.accuracy) + "," +
                    fmt(r.divergence_total) + "," + fmt(r.divergence_low) + "," +
                    fmt(r.divergence_high) + ",";
  if (r.cgv_low) row += fmt(*r.cgv_low);
  row += ",";
  if (r.cgv_high) row += fmt(*r.cgv_high);
  return row + "\n";
}

int cmd_partition(const CommonOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = load_config(options.config_path, options.seed_overrides);
    const auto dir = prepare_dir(cfg, options);
    const auto data = load_data(cfg);
    const auto manifest = make_manifest(cfg, data.train);
    json j = manifest_to_json(manifest);
    j["config_hash"] = config_hash(cfg);
    write_json(dir / "manifest.json", j);
    const std::string table = partition_table(manifest);
    write_text(dir / "partition_summary.txt", table);
    out << table << "wrote " << (dir / "manifest.json").string() << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto cfg = load_config(options.config_path, options.seed_overrides);
    const auto dir = prepare_dir(cfg, options);
    const auto data = load_data(cfg);
    check_model_fits(cfg, data.train);
    const std::string hash = config_hash(cfg);

    data::PartitionManifest manifest;
    if (options.manifest_path) {
      manifest = manifest_from_json(read_json(*options.manifest_path));
      if (manifest.num_clients() != cfg.federation.num_clients) {
        throw ConfigError("federation.num_clients", "manifest holds " +
                                                        std::to_string(manifest.num_clients()) +
                                                        " clients");
      }
    } else {
      manifest = make_manifest(cfg, data.train);
      json j = manifest_to_json(manifest);
      j["config_hash"] = hash;
      write_json(dir / "manifest.json", j);
    }

    const auto model = nn::SplitModel::init(cfg.model.layer_sizes, cfg.model.split_index,
                                            cfg.model.activation, cfg.model.init_seed);
    std::ofstream csv(dir / "metrics.csv", std::ios::binary | std::ios::trunc);
    if (!csv) throw Error("cannot write " + (dir / "metrics.csv").string());
    csv << csv_header() << std::flush;

    std::vector<RoundRecord> records;
    sim::RunHooks hooks;
    hooks.on_record = [&](const RoundRecord& r) {
      records.push_back(r);
      csv << csv_row(r) << std::flush;
    };

    json summary = {{"config_hash", hash},
                    {"algorithm", std::string(sim::to_string(cfg.federation.algorithm))},
                    {"rounds", cfg.federation.rounds},
                    {"target_accuracy",
                     cfg.target_accuracy ? json(*cfg.target_accuracy) : json(nullptr)}};
    const auto t0 = std::chrono::steady_clock::now();
    std::optional<sim::RunResult> run_result;
    try {
      run_result = sim::run(cfg.federation, model, data.train, data.test, manifest, hooks);
    } catch (const std::exception& e) {
      csv << "truncated,,,,,,\n" << std::flush;
      summary["status"] = "error";
      summary["error"] = e.what();
      summary["rounds_completed"] = records.empty() ? 0 : records.back().round + 1;
      write_json(dir / "summary.json", summary);
      throw;
    }
    const auto& result = *run_result;
    const double total_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    json best = nullptr, best_round = nullptr, final_acc = nullptr;
    for (const auto& r : records) {
      if (best.is_null() || r.accuracy > best.get<double>()) {
        best = r.accuracy;
        best_round = r.round;
      }
    }
    if (!records.empty()) final_acc = records.back().accuracy;
    json to_target = nullptr;
    if (cfg.target_accuracy) {
      if (auto r = metrics::rounds_to_target(records, *cfg.target_accuracy)) to_target = *r;
    }
    summary["status"] = "ok";
    summary["rounds_completed"] = result.rounds_completed;
    summary["best_accuracy"] = best;
    summary["best_round"] = best_round;
    summary["final_accuracy"] = final_acc;
    summary["rounds_to_target"] = to_target;
    write_json(dir / "summary.json", summary);

    const bool impro = cfg.federation.algorithm == sim::Algorithm::kFedImpro;
    Checkpoint ckpt{result.rounds_completed, result.model,
                    impro ? std::optional(result.global_stats) : std::nullopt};
    json cj = checkpoint_to_json(ckpt);
    cj["config_hash"] = hash;
    write_json(dir / "checkpoint.json", cj);

    json per_record = json::array();
    for (const auto& r : records) per_record.push_back({{"round", r.round}, {"wall_time_s", r.wall_time_s}});
    write_json(dir / "timing.json",
               {{"config_hash", hash}, {"total_s", total_s}, {"records", per_record}});

    if (options.dump_stats) {
      write_json(dir / "stats.json",
                 {{"config_hash", hash},
                  {"round", result.rounds_completed},
                  {"global_stats", impro ? featstats::to_json(result.global_stats) : json(nullptr)}});
    }
    out << "best accuracy: " << (best.is_null() ? std::string("n/a") : fmt(best.get<double>()))
        << " over " << result.rounds_completed << " rounds; outputs in " << dir.string() << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cmd_verify(const std::string& suite, std::ostream& out, std::ostream& err) {
  std::vector<Check> checks;
  try {
    checks = run_suite(suite);
  } catch (const ArgumentError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  print_checks(checks, out);
  for (const auto& c : checks) {
    if (!c.passed) {
      err << "verification failed: " << c.name << '\n';
      return kExitVerify;
    }
  }
  out << suite << ": " << checks.size() << " checks passed\n";
  return kExitOk;
}

}  // namespace fedsim::cli
