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

#include <vector>

#include "json.hpp"

#include "gdpnet/common.hpp"

namespace gdpnet {

enum class Termination { kEndingNeighbor, kExhaustedCandidates, kStepLimit };

inline const char* termination_name(Termination t) {
  switch (t) {
    case Termination::kEndingNeighbor: return "ending_neighbor";
    case Termination::kExhaustedCandidates: return "exhausted_candidates";
    case Termination::kStepLimit: return "step_limit";
  }
  return "unknown";
}

struct Transition {
  Vector state;      // [h_v^t, h_{u_t}]
  int action = 0;    // 1 = keep u_t as a signal neighbor
  double reward = 0.0;
  double log_prob = 0.0;  // log pi_behavior(action | state)
  NodeId candidate = 0;
};

struct Trajectory {
  NodeId target = 0;
  std::vector<Transition> transitions;
  Termination terminated_by = Termination::kExhaustedCandidates;

  std::vector<NodeId> selected() const {
    std::vector<NodeId> out;
    for (const auto& t : transitions)
      if (t.action == 1) out.push_back(t.candidate);
    return out;
  }
  double total_reward() const {
    double s = 0.0;
    for (const auto& t : transitions) s += t.reward;
    return s;
  }
};

/// One JSON-lines record for the debug trajectory dump.
inline nlohmann::json trajectory_to_json(const Trajectory& t) {
  nlohmann::json j;
  j["node"] = t.target;
  auto order = nlohmann::json::array();
  auto actions = nlohmann::json::array();
  auto rewards = nlohmann::json::array();
  for (const auto& tr : t.transitions) {
    order.push_back(tr.candidate);
    actions.push_back(tr.action);
    rewards.push_back(tr.reward);
  }
  j["candidates"] = std::move(order);
  j["actions"] = std::move(actions);
  j["rewards"] = std::move(rewards);
  j["terminated_by"] = termination_name(t.terminated_by);
  return j;
}

}  // namespace gdpnet
