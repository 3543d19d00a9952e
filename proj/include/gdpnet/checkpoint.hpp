// Copyright 2026 The Authors.
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
#include <fstream>

#include "json.hpp"

#include "gdpnet/graph_io.hpp"
#include "gdpnet/policy.hpp"
#include "gdpnet/representation.hpp"

namespace gdpnet {

inline constexpr int kCheckpointVersion = 1;

inline nlohmann::json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  try {
    return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(),
                  j.at("data").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed matrix: ") + e.what());
  }
}

/// Everything needed to decode, embed and classify.
struct GdpModel {
  PolicyParams policy;
  RepresentationModel rep;

  friend bool operator==(const GdpModel&, const GdpModel&) = default;
};

inline nlohmann::json model_to_json(const GdpModel& m) {
  nlohmann::json mats = nlohmann::json::object();
  for (std::size_t l = 0; l < m.policy.net.layers.size(); ++l) {
    mats["policy." + std::to_string(l)] = matrix_to_json(m.policy.net.layers[l]);
  }
  mats["aggregator"] = matrix_to_json(m.rep.agg.weight);
  mats["classifier"] = matrix_to_json(m.rep.clf.weight);
  return {{"format", "gdpnet-checkpoint"},
          {"version", kCheckpointVersion},
          {"activation", m.rep.agg.activation == Activation::kRelu ? "relu" : "tanh"},
          {"policy_layers", m.policy.net.layers.size()},
          {"matrices", std::move(mats)}};
}

inline GdpModel model_from_json(const nlohmann::json& j) {
  try {
    require(j.at("format") == "gdpnet-checkpoint", "not a gdpnet checkpoint");
    require(j.at("version").get<int>() == kCheckpointVersion, "unsupported checkpoint version");
    GdpModel m;
    const auto& mats = j.at("matrices");
    const auto layers = j.at("policy_layers").get<std::size_t>();
    for (std::size_t l = 0; l < layers; ++l) {
      m.policy.net.layers.push_back(matrix_from_json(mats.at("policy." + std::to_string(l))));
    }
    m.policy.validate();
    m.rep.agg.weight = matrix_from_json(mats.at("aggregator"));
    m.rep.agg.activation = j.at("activation") == "tanh" ? Activation::kTanh : Activation::kRelu;
    m.rep.clf.weight = matrix_from_json(mats.at("classifier"));
    require(m.rep.clf.weight.cols() == m.rep.agg.embed_dim(), "classifier/aggregator shape mismatch");
    require(m.policy.state_size() == 2 * m.rep.agg.embed_dim(), "policy/aggregator shape mismatch");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed checkpoint: ") + e.what());
  }
}

inline GdpModel load_model(const std::filesystem::path& path) {
  auto in = detail::open_input(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace gdpnet
