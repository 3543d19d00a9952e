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

#include <limits>
#include <optional>

#include "gdpnet/parallel.hpp"
#include "gdpnet/policy.hpp"
#include "gdpnet/representation.hpp"

namespace gdpnet {

/// Sentinel id of the ending neighbor u_e. Its feature vector is all zeros.
inline constexpr NodeId kEndingNeighbor = std::numeric_limits<NodeId>::max();

struct EpisodeState {
  NodeId target = 0;
  std::vector<NodeId> selected;    // signal neighbors so far, in selection order
  std::vector<NodeId> rejected;
  std::vector<NodeId> candidates;  // not yet processed; may hold kEndingNeighbor
  Vector h_v;                      // embedding of the target over `selected`
  Vector s;                        // [h_v, h_{u_t}]
  std::optional<NodeId> current;  // u_t awaiting an action
  bool finished = false;
  std::size_t steps = 0;

  // Running aggregates for the incremental updates.
  Vector feature_sum;      // x_v + sum of selected features
  double score_sum = 0.0;  // sum of f_c over selected

  std::size_t real_candidates() const {
    return static_cast<std::size_t>(
        std::count_if(candidates.begin(), candidates.end(),
                      [](NodeId u) { return u != kEndingNeighbor; }));
  }
};

enum class ActionMode { kSample, kGreedy, kAlwaysSelect, kNeverSelect };
enum class OrderMode { kSample, kGreedy };

struct RolloutOptions {
  std::size_t max_steps = 0;  // 0 means |N(v)| + 1
  bool include_ending = true;
  ActionMode action = ActionMode::kSample;
  OrderMode order = OrderMode::kSample;
};

/// Softmax draw over regret scores; returns the chosen index.
inline std::size_t sample_candidate_index(std::span<const double> scores, Rng& rng) {
  require(!scores.empty(), "no candidates to sample from");
  require(all_finite(scores), "non-finite regret score");
  const Vector p = softmax(scores);
  double u = uniform01(rng);
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    if (u < p[i]) return i;
    u -= p[i];
  }
  return p.size() - 1;
}

/// Neighbor-selection MDP over a frozen graph and representation snapshot.
/// All member functions are const and safe to call concurrently.
class SelectionEnv {
 public:
  SelectionEnv(const Graph& g, const RepresentationModel& model, ScoreMode mode)
      : graph_(&g), model_(&model), mode_(mode) {
    require(model.agg.feature_dim() == g.feature_dim(),
            "aggregator input size " + std::to_string(model.agg.feature_dim()) +
                " != graph feature dimension " + std::to_string(g.feature_dim()));
    self_.reserve(g.num_nodes());
    for (NodeId u = 0; u < g.num_nodes(); ++u) self_.push_back(aggregate(model.agg, g.feature(u), {}));
    const Vector zeros(g.feature_dim(), 0.0);
    end_ = aggregate(model.agg, zeros, {});
  }

  const Graph& graph() const { return *graph_; }
  const RepresentationModel& model() const { return *model_; }
  ScoreMode score_mode() const { return mode_; }
  std::size_t embed_dim() const { return model_->agg.embed_dim(); }

  /// h_u = Agg(x_u, {}) ; the ending neighbor maps to Agg(0, {}).
  const Vector& self_embedding(NodeId u) const {
    return u == kEndingNeighbor ? end_ : self_.at(u);
  }

  /// f_c(Agg(x_v, {x_u})) against the true label of v.
  double item_score(NodeId v, NodeId u) const {
    const std::span<const double> rows[] = {graph_->feature(u)};
    return fc_score(model_->clf, model_->agg, graph_->feature(v), rows, graph_->label(v), mode_);
  }

  EpisodeState init_episode(NodeId v, bool include_ending = true) const {
    require(v < graph_->num_nodes(), "invalid node id " + std::to_string(v));
    EpisodeState st;
    st.target = v;
    const auto nbrs = graph_->neighbors(v);
    st.candidates.assign(nbrs.begin(), nbrs.end());
    if (include_ending) st.candidates.push_back(kEndingNeighbor);
    const auto x = graph_->feature(v);
    st.feature_sum.assign(x.begin(), x.end());
    st.h_v = self_[v];
    st.s = concat(st.h_v, Vector(embed_dim(), 0.0));
    return st;
  }

  /// l_k = net([h_v^t, h_{u_k}]) for every remaining candidate, in order.
  Vector regret_scores(const EpisodeState& st, const PolicyParams& policy) const {
    require(!st.candidates.empty(), "regret_scores: empty candidate set");
    Vector scores;
    scores.reserve(st.candidates.size());
    for (NodeId u : st.candidates) {
      scores.push_back(policy_logit(policy, concat(st.h_v, self_embedding(u))));
    }
    return scores;
  }

  /// Removes candidate `index` and makes it u_t. Drawing the ending neighbor
  /// finishes the episode.
  NodeId take_candidate(EpisodeState& st, std::size_t index) const {
    require(!st.finished, "episode already finished");
    require(index < st.candidates.size(), "candidate index out of range");
    const NodeId u = st.candidates[index];
    st.candidates.erase(st.candidates.begin() + static_cast<std::ptrdiff_t>(index));
    if (u == kEndingNeighbor) {
      st.finished = true;
      st.current.reset();
      return u;
    }
    st.current = u;
    st.s = concat(st.h_v, self_[u]);
    return u;
  }

  NodeId sample_next_candidate(EpisodeState& st, std::span<const double> scores, Rng& rng) const {
    require(scores.size() == st.candidates.size(), "one score per candidate expected");
    return take_candidate(st, sample_candidate_index(scores, rng));
  }

  /// Applies action a_t to u_t. Keeping u_t earns
  /// r_t = f_c(v, u_t) / sum_{u in selected incl. u_t} f_c(v, u), and refreshes
  /// h_v over the enlarged set; rejecting earns 0 and leaves h_v untouched.
  double step(EpisodeState& st, int action) const {
    require(!st.finished && st.current.has_value(), "step: no pending candidate");
    require(action == 0 || action == 1, "action must be 0 or 1");
    const NodeId u = *st.current;
    st.current.reset();
    ++st.steps;
    if (action == 0) {
      st.rejected.push_back(u);
      return 0.0;
    }
    st.selected.push_back(u);
    const double f = item_score(st.target, u);
    st.score_sum += f;
    const double reward = st.score_sum < 1e-12 ? 0.0 : f / st.score_sum;

    const auto xu = graph_->feature(u);
    for (std::size_t k = 0; k < xu.size(); ++k) st.feature_sum[k] += xu[k];
    Vector mean = st.feature_sum;
    const double inv = 1.0 / static_cast<double>(st.selected.size() + 1);
    for (double& m : mean) m *= inv;
    st.h_v = embed_mean(model_->agg, mean);
    std::copy(st.h_v.begin(), st.h_v.end(), st.s.begin());
    return reward;
  }

  Trajectory rollout(NodeId v, const PolicyParams& policy, Rng& rng,
                     const RolloutOptions& opt = {}) const {
    EpisodeState st = init_episode(v, opt.include_ending);
    const std::size_t max_steps = opt.max_steps == 0 ? graph_->degree(v) + 1 : opt.max_steps;
    require(max_steps >= 1, "max_steps must be at least 1");
    Trajectory traj;
    traj.target = v;
    while (true) {
      if (st.real_candidates() == 0) {
        traj.terminated_by = Termination::kExhaustedCandidates;
        break;
      }
      if (st.steps >= max_steps) {
        traj.terminated_by = Termination::kStepLimit;
        break;
      }
      const Vector scores = regret_scores(st, policy);
      const std::size_t idx = opt.order == OrderMode::kGreedy
                                  ? argmax(scores)
                                  : sample_candidate_index(scores, rng);
      const double logit = scores[idx];
      const NodeId u = take_candidate(st, idx);
      if (u == kEndingNeighbor) {
        traj.terminated_by = Termination::kEndingNeighbor;
        break;
      }
      // The regret score of u_t is the policy logit at s_t.
      const double prob = sigmoid(logit);
      ActionSample act;
      switch (opt.action) {
        case ActionMode::kSample: act = sample_action(prob, rng); break;
        case ActionMode::kGreedy: act.action = prob >= 0.5 ? 1 : 0; break;
        case ActionMode::kAlwaysSelect: act.action = 1; break;
        case ActionMode::kNeverSelect: act.action = 0; break;
      }
      if (opt.action != ActionMode::kSample) act.log_prob = action_log_prob(prob, act.action);
      Transition tr;
      tr.state = st.s;
      tr.action = act.action;
      tr.log_prob = act.log_prob;
      tr.candidate = u;
      tr.reward = step(st, act.action);
      traj.transitions.push_back(std::move(tr));
    }
    return traj;
  }

  /// Rollouts for many targets; node v draws from its own stream
  /// derive_seed(seed, v), so results do not depend on `threads`.
  std::vector<Trajectory> rollout_many(std::span<const NodeId> nodes, const PolicyParams& policy,
                                       std::uint64_t seed, const RolloutOptions& opt,
                                       std::size_t threads = 1) const {
    std::vector<Trajectory> out(nodes.size());
    parallel_for(nodes.size(), threads, [&](std::size_t i) {
      Rng rng(derive_seed(seed, nodes[i]));
      out[i] = rollout(nodes[i], policy, rng, opt);
    });
    return out;
  }

 private:
  const Graph* graph_;
  const RepresentationModel* model_;
  ScoreMode mode_;
  std::vector<Vector> self_;
  Vector end_;
};

/// Deterministic decode: highest regret score first, keep iff pi >= 0.5, stop
/// at the ending neighbor.
inline RolloutOptions greedy_decode_options() {
  return {0, true, ActionMode::kGreedy, OrderMode::kGreedy};
}

}  // namespace gdpnet
