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

#include "fedsim/cli/config.hpp"

#include <charconv>
#include <cmath>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>

#include "fedsim/error.hpp"

namespace fedsim::cli {
namespace {

using nlohmann::json;

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  bool has(std::string_view key) const { return node_.contains(key); }

  Reader child(std::string_view key) {
    const json& v = require(key);
    return Reader(v, join(path_, key));
  }

  double number(std::string_view key) { return as_number(require(key), key); }
  double number(std::string_view key, double fallback) {
    const json* v = find(key);
    return v ? as_number(*v, key) : fallback;
  }

  std::uint64_t count(std::string_view key) { return as_count(require(key), key); }
  std::uint64_t count(std::string_view key, std::uint64_t fallback) {
    const json* v = find(key);
    return v ? as_count(*v, key) : fallback;
  }

  bool flag(std::string_view key, bool fallback) {
    const json* v = find(key);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ConfigError(join(path_, key), "expected a boolean");
    return v->get<bool>();
  }

  std::string text(std::string_view key) { return as_text(require(key), key); }
  std::string text(std::string_view key, std::string fallback) {
    const json* v = find(key);
    return v ? as_text(*v, key) : fallback;
  }

  std::optional<double> optional_number(std::string_view key) {
    const json* v = find(key);
    if (!v || v->is_null()) return std::nullopt;
    return as_number(*v, key);
  }

  std::vector<std::size_t> counts(std::string_view key) {
    const json& v = require(key);
    if (!v.is_array()) throw ConfigError(join(path_, key), "expected an array");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(as_count(v[i], std::string(key) + "[" + std::to_string(i) + "]"));
    }
    return out;
  }

  std::string path(std::string_view key) const { return join(path_, key); }

  // Every key must have been consumed by now.
  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) throw ConfigError(join(path_, key), "unknown key");
    }
  }

 private:
  const json* find(std::string_view key) {
    seen_.insert(std::string(key));
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  const json& require(std::string_view key) {
    const json* v = find(key);
    if (!v) throw ConfigError(join(path_, key), "required key is missing");
    return *v;
  }

  double as_number(const json& v, std::string_view key) const {
    if (!v.is_number()) throw ConfigError(join(path_, key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(join(path_, key), "expected a finite number");
    return d;
  }

  std::uint64_t as_count(const json& v, std::string_view key) const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    throw ConfigError(join(path_, key), "expected a non-negative integer");
  }

  std::string as_text(const json& v, std::string_view key) const {
    if (!v.is_string()) throw ConfigError(join(path_, key), "expected a string");
    return v.get<std::string>();
  }

  const json& node_;
  std::string path_;
  std::set<std::string, std::less<>> seen_;
};

void check(bool ok, const std::string& path, const std::string& message) {
  if (!ok) throw ConfigError(path, message);
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

void parse_data(Reader r, ExperimentConfig& cfg, json& norm, const std::filesystem::path& base) {
  const std::string source = r.text("source");
  Reader p = r.child("params");
  json np;
  if (source == "synth") {
    SynthSource s;
    s.params.num_classes = static_cast<int>(p.count("num_classes"));
    s.params.dim = p.count("dim");
    s.params.per_class_n = p.count("per_class_n");
    s.params.class_mean_scale = p.number("class_mean_scale", 4.0);
    s.params.seed = p.count("seed");
    s.test_per_class_n = p.count("test_per_class_n", 100);
    check(s.params.num_classes >= 2, p.path("num_classes"), "must be >= 2");
    check(s.params.dim >= 2, p.path("dim"), "must be >= 2");
    check(s.params.per_class_n >= 1, p.path("per_class_n"), "must be >= 1");
    check(s.params.class_mean_scale >= 0.0, p.path("class_mean_scale"), "must be >= 0");
    check(s.test_per_class_n >= 1, p.path("test_per_class_n"), "must be >= 1");
    np = {{"num_classes", s.params.num_classes},
          {"dim", s.params.dim},
          {"per_class_n", s.params.per_class_n},
          {"class_mean_scale", s.params.class_mean_scale},
          {"seed", s.params.seed},
          {"test_per_class_n", s.test_per_class_n}};
    cfg.data = s;
  } else if (source == "idx") {
    IdxSource s;
    const std::string ti = p.text("train_images"), tl = p.text("train_labels");
    const std::string vi = p.text("test_images"), vl = p.text("test_labels");
    s.train_images = resolve(base, ti);
    s.train_labels = resolve(base, tl);
    s.test_images = resolve(base, vi);
    s.test_labels = resolve(base, vl);
    np = {{"train_images", ti}, {"train_labels", tl}, {"test_images", vi}, {"test_labels", vl}};
    if (p.has("num_classes")) {
      s.num_classes = static_cast<int>(p.count("num_classes"));
      check(*s.num_classes >= 2, p.path("num_classes"), "must be >= 2");
      np["num_classes"] = *s.num_classes;
    }
    cfg.data = s;
  } else {
    throw ConfigError(r.path("source"), "expected \"synth\" or \"idx\"");
  }
  p.finish();
  r.finish();
  norm["data"] = {{"source", source}, {"params", np}};
}

void parse_partition(Reader r, ExperimentConfig& cfg, json& norm) {
  auto& p = cfg.partition;
  p.alpha = r.number("alpha");
  p.seed = r.count("seed");
  p.options.min_per_client = r.count("min_per_client", 2);
  p.options.max_retries = static_cast<int>(r.count("max_retries", 100));
  check(p.alpha > 0.0, r.path("alpha"), "must be > 0");
  check(p.options.max_retries >= 1, r.path("max_retries"), "must be >= 1");
  r.finish();
  norm["partition"] = {{"alpha", p.alpha},
                       {"seed", p.seed},
                       {"min_per_client", p.options.min_per_client},
                       {"max_retries", p.options.max_retries}};
}

void parse_model(Reader r, ExperimentConfig& cfg, json& norm) {
  auto& m = cfg.model;
  m.layer_sizes = r.counts("layer_sizes");
  m.split_index = r.count("split_index");
  const std::string act = r.text("activation", "relu");
  m.init_seed = r.count("init_seed");
  check(m.layer_sizes.size() >= 3, r.path("layer_sizes"), "need at least two layers");
  for (std::size_t s : m.layer_sizes) check(s >= 1, r.path("layer_sizes"), "sizes must be >= 1");
  check(m.split_index >= 1 && m.split_index < m.layer_sizes.size() - 1, r.path("split_index"),
        "must lie strictly between 0 and the number of layers");
  try {
    m.activation = nn::parse_activation(act);
  } catch (const Error& e) {
    throw ConfigError(r.path("activation"), e.what());
  }
  r.finish();
  norm["model"] = {{"layer_sizes", m.layer_sizes},
                   {"split_index", m.split_index},
                   {"activation", act},
                   {"init_seed", m.init_seed}};
}

void parse_federation(Reader r, ExperimentConfig& cfg, json& norm) {
  auto& f = cfg.federation;
  const std::string algo = r.text("algorithm");
  try {
    f.algorithm = sim::parse_algorithm(algo);
  } catch (const Error& e) {
    throw ConfigError(r.path("algorithm"), e.what());
  }
  f.num_clients = r.count("num_clients");
  f.clients_per_round = r.count("clients_per_round");
  f.rounds = r.count("rounds");
  f.local_epochs = r.count("local_epochs", 1);
  f.local_iters = r.count("local_iters", 0);
  f.lr = r.number("lr");
  f.batch_size = r.count("batch_size");
  f.prox_mu = r.number("prox_mu", 0.0);
  f.seed = r.count("seed");
  f.parallel_clients = r.flag("parallel_clients", false);
  check(f.num_clients >= 2, r.path("num_clients"), "must be >= 2");
  check(f.clients_per_round >= 1 && f.clients_per_round <= f.num_clients,
        r.path("clients_per_round"), "must lie in [1, num_clients]");
  check(f.local_epochs >= 1, r.path("local_epochs"), "must be >= 1");
  check(f.lr >= 0.0, r.path("lr"), "must be >= 0");
  check(f.batch_size >= 1, r.path("batch_size"), "must be >= 1");
  check(f.prox_mu >= 0.0, r.path("prox_mu"), "must be >= 0");
  r.finish();
  norm["federation"] = {{"algorithm", algo},
                        {"num_clients", f.num_clients},
                        {"clients_per_round", f.clients_per_round},
                        {"rounds", f.rounds},
                        {"local_epochs", f.local_epochs},
                        {"local_iters", f.local_iters},
                        {"lr", f.lr},
                        {"batch_size", f.batch_size},
                        {"prox_mu", f.prox_mu},
                        {"seed", f.seed},
                        {"parallel_clients", f.parallel_clients}};
}

void parse_fedimpro(Reader r, ExperimentConfig& cfg, json& norm) {
  auto& s = cfg.federation.sharing;
  s.beta_m = r.number("beta_m", s.beta_m);
  s.beta_g = r.number("beta_g", s.beta_g);
  s.sigma_eps = r.number("sigma_eps", s.sigma_eps);
  s.shared_ratio = r.number("shared_ratio", s.shared_ratio);
  s.stats_warm_start = r.flag("stats_warm_start", s.stats_warm_start);
  s.noise_seed = r.count("noise_seed");
  check(s.beta_m >= 0.0 && s.beta_m <= 1.0, r.path("beta_m"), "must lie in [0, 1]");
  check(s.beta_g >= 0.0 && s.beta_g <= 1.0, r.path("beta_g"), "must lie in [0, 1]");
  check(s.sigma_eps >= 0.0, r.path("sigma_eps"), "must be >= 0");
  check(s.shared_ratio >= 0.0, r.path("shared_ratio"), "must be >= 0");
  r.finish();
  norm["fedimpro"] = {{"beta_m", s.beta_m},
                      {"beta_g", s.beta_g},
                      {"sigma_eps", s.sigma_eps},
                      {"shared_ratio", s.shared_ratio},
                      {"stats_warm_start", s.stats_warm_start},
                      {"noise_seed", s.noise_seed}};
}

void parse_eval(Reader r, ExperimentConfig& cfg, json& norm) {
  cfg.federation.eval_cadence = r.count("cadence", 5);
  cfg.target_accuracy = r.optional_number("target_accuracy");
  cfg.federation.measure_cgv = r.flag("cgv", false);
  check(cfg.federation.eval_cadence >= 1, r.path("cadence"), "must be >= 1");
  if (cfg.target_accuracy) {
    check(*cfg.target_accuracy >= 0.0 && *cfg.target_accuracy <= 1.0, r.path("target_accuracy"),
          "must lie in [0, 1]");
  }
  r.finish();
  norm["eval"] = {{"cadence", cfg.federation.eval_cadence},
                  {"target_accuracy", cfg.target_accuracy ? json(*cfg.target_accuracy) : json()},
                  {"cgv", cfg.federation.measure_cgv}};
}

constexpr std::string_view kSeedPaths[] = {
    "data.params.seed", "partition.seed", "model.init_seed", "federation.seed",
    "fedimpro.noise_seed",
};

}  // namespace

ExperimentConfig parse_config(const json& document, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  json norm = json::object();
  Reader root(document, "");
  parse_data(root.child("data"), cfg, norm, base_dir);
  parse_partition(root.child("partition"), cfg, norm);
  parse_model(root.child("model"), cfg, norm);
  parse_federation(root.child("federation"), cfg, norm);
  if (root.has("fedimpro")) {
    parse_fedimpro(root.child("fedimpro"), cfg, norm);
  } else if (cfg.federation.algorithm == sim::Algorithm::kFedImpro) {
    throw ConfigError("fedimpro", "required when federation.algorithm is \"fedimpro\"");
  }
  if (root.has("eval")) {
    parse_eval(root.child("eval"), cfg, norm);
  } else {
    parse_eval(Reader(json::object(), "eval"), cfg, norm);
  }
  if (root.has("output")) {
    Reader out = root.child("output");
    cfg.output_dir = resolve(base_dir, out.text("dir", "out"));
    out.finish();
    norm["output"] = {{"dir", cfg.output_dir.generic_string()}};
  } else {
    cfg.output_dir = resolve(base_dir, "out");
  }
  root.finish();
  cfg.normalized = std::move(norm);
  return cfg;
}

void apply_seed_override(json& document, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("--seed-override", "expected key=value, got '" + std::string(assignment) + "'");
  }
  const std::string_view key = assignment.substr(0, eq);
  const std::string_view value = assignment.substr(eq + 1);
  bool known = false;
  for (auto p : kSeedPaths) known = known || p == key;
  if (!known) throw ConfigError(std::string(key), "not an overridable seed");
  std::uint64_t seed = 0;
  const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), seed);
  if (ec != std::errc() || end != value.data() + value.size()) {
    throw ConfigError(std::string(key), "seed override must be a non-negative integer");
  }
  std::string pointer = "/";
  for (char c : key) pointer += c == '.' ? '/' : c;
  document[json::json_pointer(pointer)] = seed;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             std::span<const std::string> seed_overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string(), std::string("invalid JSON: ") + e.what());
  }
  for (const auto& o : seed_overrides) apply_seed_override(doc, o);
  return parse_config(doc, path.parent_path());
}

std::string config_hash(const ExperimentConfig& config) {
  json hashed = config.normalized;
  hashed.erase("output");
  const std::string text = hashed.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

}  // namespace fedsim::cli
