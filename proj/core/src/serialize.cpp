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

#include "fedsim/serialize.hpp"

#include <string>
#include <vector>

#include "fedsim/error.hpp"

namespace fedsim {
namespace {

template <typename F>
auto parse_or_throw(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

nlohmann::json model_to_json(const nn::SplitModel& model) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : model.layers()) {
    layers.push_back({
        {"in_dim", l.in_dim},
        {"out_dim", l.out_dim},
        {"activation", std::string(nn::to_string(l.activation))},
        {"weight", l.weight},
        {"bias", l.bias},
    });
  }
  return {{"split_index", model.split_index()}, {"layers", std::move(layers)}};
}

nn::SplitModel model_from_json(const nlohmann::json& j) {
  return parse_or_throw("model", [&] {
    std::vector<nn::DenseLayer> layers;
    for (const auto& lj : j.at("layers")) {
      nn::DenseLayer l;
      l.in_dim = lj.at("in_dim").get<std::size_t>();
      l.out_dim = lj.at("out_dim").get<std::size_t>();
      l.activation = nn::parse_activation(lj.at("activation").get<std::string>());
      l.weight = lj.at("weight").get<std::vector<double>>();
      l.bias = lj.at("bias").get<std::vector<double>>();
      layers.push_back(std::move(l));
    }
    return nn::SplitModel(std::move(layers), j.at("split_index").get<std::size_t>());
  });
}

nlohmann::json manifest_to_json(const data::PartitionManifest& manifest) {
  nlohmann::json clients = nlohmann::json::array();
  for (std::size_t m = 0; m < manifest.num_clients(); ++m) {
    clients.push_back({
        {"id", m},
        {"n", manifest.client_indices[m].size()},
        {"class_counts", manifest.class_counts[m]},
        {"indices", manifest.client_indices[m]},
    });
  }
  return {
      {"alpha", manifest.alpha},
      {"seed", manifest.seed},
      {"min_per_client", manifest.min_per_client},
      {"num_classes", manifest.num_classes},
      {"num_samples", manifest.num_samples},
      {"clients", std::move(clients)},
  };
}

data::PartitionManifest manifest_from_json(const nlohmann::json& j) {
  return parse_or_throw("manifest", [&] {
    data::PartitionManifest m;
    m.alpha = j.at("alpha").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.min_per_client = j.at("min_per_client").get<std::size_t>();
    m.num_classes = j.at("num_classes").get<int>();
    m.num_samples = j.at("num_samples").get<std::size_t>();
    for (const auto& c : j.at("clients")) {
      m.client_indices.push_back(c.at("indices").get<std::vector<std::size_t>>());
      m.class_counts.push_back(c.at("class_counts").get<std::vector<std::size_t>>());
    }
    return m;
  });
}

nlohmann::json checkpoint_to_json(const Checkpoint& checkpoint) {
  return {
      {"round", checkpoint.round},
      {"model", model_to_json(checkpoint.model)},
      {"global_stats", checkpoint.global_stats ? featstats::to_json(*checkpoint.global_stats)
                                               : nlohmann::json(nullptr)},
  };
}

Checkpoint checkpoint_from_json(const nlohmann::json& j, double beta_g) {
  return parse_or_throw("checkpoint", [&] {
    Checkpoint c{j.at("round").get<std::size_t>(), model_from_json(j.at("model")), std::nullopt};
    if (!j.at("global_stats").is_null()) {
      c.global_stats = featstats::stats_from_json(j.at("global_stats"), beta_g);
    }
    return c;
  });
}

}  // namespace fedsim
