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

#include <array>
#include <functional>

#include "json.hpp"

#include "gdpnet/checkpoint.hpp"
#include "gdpnet/selection_env.hpp"

namespace gdpnet {

/// How neighbor sets are produced. kSelectAll is the plain mean-aggregator
/// baseline run through the identical pipeline.
enum class SelectionRule { kLearned, kSelectAll, kSelectNone };

struct TrainConfig {
  std::size_t outer_iterations = 20;
  std::size_t rep_epochs = 100;
  std::size_t batch_size = 256;
  std::size_t embed_dim = 128;
  std::vector<std::size_t> policy_hidden{64, 36};
  PPOConfig ppo;
  double rep_learning_rate = 1e-3;
  ScoreMode fc_mode = ScoreMode::kSoft;
  Activation activation = Activation::kRelu;
  std::size_t rollouts_per_node = 1;
  SelectionRule selection = SelectionRule::kLearned;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const {
    require(rep_epochs >= 1, "representation epochs must be positive");
    require(batch_size >= 1, "batch size must be positive");
    require(embed_dim >= 1, "embedding dimension must be positive");
    require(rollouts_per_node >= 1, "rollouts per node must be positive");
    require(threads >= 1, "thread count must be positive");
    require(rep_learning_rate >= 0.0, "learning rate must be non-negative");
    for (auto h : policy_hidden) require(h >= 1, "hidden sizes must be positive");
    ppo.validate();
  }
};

inline const char* selection_rule_name(SelectionRule r) {
  switch (r) {
    case SelectionRule::kLearned: return "learned";
    case SelectionRule::kSelectAll: return "select-all";
    case SelectionRule::kSelectNone: return "select-none";
  }
  return "learned";
}

inline SelectionRule parse_selection_rule(const std::string& s) {
  if (s == "learned") return SelectionRule::kLearned;
  if (s == "select-all") return SelectionRule::kSelectAll;
  if (s == "select-none") return SelectionRule::kSelectNone;
  throw ValidationError("unknown selection rule '" + s + "'");
}

inline nlohmann::json config_to_json(const TrainConfig& c) {
  return {{"iters", c.outer_iterations},
          {"rep_epochs", c.rep_epochs},
          {"batch_size", c.batch_size},
          {"embed_dim", c.embed_dim},
          {"policy_hidden", c.policy_hidden},
          {"gamma", c.ppo.gamma},
          {"delta", c.ppo.kl_target},
          {"kl_penalty", c.ppo.initial_penalty},
          {"ppo_epochs", c.ppo.update_epochs},
          {"ppo_minibatch", c.ppo.minibatch_size},
          {"policy_lr", c.ppo.learning_rate},
          {"rep_lr", c.rep_learning_rate},
          {"fc_mode", c.fc_mode == ScoreMode::kSoft ? "soft" : "hard"},
          {"activation", c.activation == Activation::kRelu ? "relu" : "tanh"},
          {"rollouts_per_node", c.rollouts_per_node},
          {"selection", selection_rule_name(c.selection)},
          {"seed", c.seed}};
}

/// Applies the keys present in `j` on top of `c`; unknown keys are errors.
inline void apply_config_overrides(TrainConfig& c, const nlohmann::json& j) {
  require(j.is_object(), "config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "iters") c.outer_iterations = v.get<std::size_t>();
      else if (key == "rep_epochs") c.rep_epochs = v.get<std::size_t>();
      else if (key == "batch_size") c.batch_size = v.get<std::size_t>();
      else if (key == "embed_dim") c.embed_dim = v.get<std::size_t>();
      else if (key == "policy_hidden") c.policy_hidden = v.get<std::vector<std::size_t>>();
      else if (key == "gamma") c.ppo.gamma = v.get<double>();
      else if (key == "delta") c.ppo.kl_target = v.get<double>();
      else if (key == "kl_penalty") c.ppo.initial_penalty = v.get<double>();
      else if (key == "ppo_epochs") c.ppo.update_epochs = v.get<std::size_t>();
      else if (key == "ppo_minibatch") c.ppo.minibatch_size = v.get<std::size_t>();
      else if (key == "policy_lr") c.ppo.learning_rate = v.get<double>();
      else if (key == "rep_lr") c.rep_learning_rate = v.get<double>();
      else if (key == "fc_mode") {
        const auto s = v.get<std::string>();
        require(s == "soft" || s == "hard", "fc_mode must be soft or hard");
        c.fc_mode = s == "soft" ? ScoreMode::kSoft : ScoreMode::kHard;
      } else if (key == "activation") {
        const auto s = v.get<std::string>();
        require(s == "relu" || s == "tanh", "activation must be relu or tanh");
        c.activation = s == "relu" ? Activation::kRelu : Activation::kTanh;
      } else if (key == "rollouts_per_node") c.rollouts_per_node = v.get<std::size_t>();
      else if (key == "selection") c.selection = parse_selection_rule(v.get<std::string>());
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else throw ValidationError("unknown config key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("invalid config value: ") + e.what());
  }
}

inline GdpModel initial_model(const Graph& g, const TrainConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, 100));
  GdpModel m;
  m.rep = RepresentationModel::init(cfg.embed_dim, g.feature_dim(), std::max<std::size_t>(g.num_classes(), 1),
                                    rng, cfg.activation);
  m.policy = PolicyParams::glorot(cfg.embed_dim, cfg.policy_hidden, rng);
  return m;
}

/// Neighbor sets for `nodes` under the given rule. Learned selection uses the
/// deterministic greedy decode.
inline std::vector<std::vector<NodeId>> decode_selection(const GdpModel& m, const Graph& g,
                                                         std::span<const NodeId> nodes,
                                                         SelectionRule rule,
                                                         std::size_t threads = 1) {
  std::vector<std::vector<NodeId>> out(nodes.size());
  if (rule == SelectionRule::kSelectAll) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const auto nb = g.neighbors(nodes[i]);
      out[i].assign(nb.begin(), nb.end());
    }
    return out;
  }
  if (rule == SelectionRule::kSelectNone) return out;
  const SelectionEnv env(g, m.rep, ScoreMode::kSoft);
  const auto trajs = env.rollout_many(nodes, m.policy, 0, greedy_decode_options(), threads);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out[i] = trajs[i].selected();
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}

inline ClassId predict(const GdpModel& m, const Graph& g, NodeId v, std::span<const NodeId> selected) {
  return argmax(classify(m.rep.clf, aggregate_node(m.rep.agg, g, v, selected)));
}

/// Micro-F1 on a split: decode, embed, classify each node of the split.
inline double evaluate(const GdpModel& m, const Graph& g, Split split,
                       SelectionRule rule = SelectionRule::kLearned, std::size_t threads = 1) {
  const auto nodes = g.nodes_in(split);
  require(!nodes.empty(), std::string("evaluate: the ") + split_name(split) + " split is empty");
  const auto sets = decode_selection(m, g, nodes, rule, threads);
  std::vector<ClassId> preds, labels;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    preds.push_back(predict(m, g, nodes[i], sets[i]));
    labels.push_back(g.label(nodes[i]));
  }
  return micro_f1(preds, labels);
}

struct IterationMetrics {
  std::size_t iteration = 0;
  double train_loss = 0.0;
  double val_f1 = 0.0;
  double mean_reward = 0.0;
  double mean_kl = 0.0;
  PPODiagnostics ppo;
};

inline nlohmann::json metrics_to_json(const IterationMetrics& m) {
  return {{"iter", m.iteration},
          {"train_loss", m.train_loss},
          {"val_f1", m.val_f1},
          {"mean_reward", m.mean_reward},
          {"mean_kl", m.mean_kl}};
}

inline nlohmann::json ppo_diagnostics_to_json(const IterationMetrics& m) {
  return {{"iteration", m.iteration},
          {"mean_kl", m.ppo.mean_kl},
          {"mean_return", m.ppo.mean_return},
          {"objective", m.ppo.objective},
          {"penalty", m.ppo.penalty},
          {"epochs_accepted", m.ppo.epochs_accepted}};
}

struct TrainResult {
  GdpModel best;   // checkpoint with the highest validation micro-F1
  GdpModel last;
  std::vector<IterationMetrics> history;
  std::size_t best_iteration = 0;  // 0 = initialization
  double best_val_f1 = -1.0;
};

using IterationCallback = std::function<void(const IterationMetrics&)>;

/// Iteration-wise optimization. Each outer iteration:
///  1. freeze the policy, roll out on every train node and fit the
///     aggregator/classifier on the sampled neighbor sets;
///  2. freeze the aggregator/classifier, collect fresh trajectories on the
///     train nodes and run one PPO update;
///  3. score the validation split and keep the best checkpoint.
/// Labels of test nodes are never read.
inline TrainResult train(const Graph& g, const TrainConfig& cfg,
                         const IterationCallback& on_iteration = {}) {
  cfg.validate();
  const auto train_nodes = g.nodes_in(Split::kTrain);
  require(!train_nodes.empty(), "train: the graph has no train nodes");
  const bool has_val = !g.nodes_in(Split::kVal).empty();

  TrainResult result;
  GdpModel model = initial_model(g, cfg);
  result.best = model;

  RepresentationTrainer rep_trainer(AdamConfig{.learning_rate = cfg.rep_learning_rate});
  PpoLearner ppo(cfg.ppo);
  Rng rep_rng(derive_seed(cfg.seed, 300));
  Rng ppo_rng(derive_seed(cfg.seed, 400));
  const RolloutOptions sampling{};

  for (std::size_t iter = 1; iter <= cfg.outer_iterations; ++iter) {
    IterationMetrics metrics;
    metrics.iteration = iter;

    std::vector<std::vector<NodeId>> selected(g.num_nodes());
    if (cfg.selection == SelectionRule::kLearned) {
      const SelectionEnv env(g, model.rep, cfg.fc_mode);
      const auto trajs = env.rollout_many(train_nodes, model.policy,
                                          derive_seed(cfg.seed, 200, iter), sampling, cfg.threads);
      for (std::size_t i = 0; i < train_nodes.size(); ++i) selected[train_nodes[i]] = trajs[i].selected();
    } else {
      const auto sets = decode_selection(model, g, train_nodes, cfg.selection);
      for (std::size_t i = 0; i < train_nodes.size(); ++i) selected[train_nodes[i]] = sets[i];
    }
    const auto rep_report =
        rep_trainer.train(model.rep, g, selected, cfg.rep_epochs, cfg.batch_size, rep_rng);
    metrics.train_loss = rep_report.final_loss();

    if (cfg.selection == SelectionRule::kLearned) {
      const RepresentationModel frozen = model.rep;
      const SelectionEnv env(g, frozen, cfg.fc_mode);
      const PolicyParams old = model.policy;
      std::vector<Trajectory> batch;
      for (std::size_t r = 0; r < cfg.rollouts_per_node; ++r) {
        auto trajs = env.rollout_many(train_nodes, old, derive_seed(cfg.seed, 500 + r, iter),
                                      sampling, cfg.threads);
        std::move(trajs.begin(), trajs.end(), std::back_inserter(batch));
      }
      double reward_sum = 0.0;
      for (const auto& t : batch) reward_sum += t.total_reward();
      metrics.mean_reward = reward_sum / static_cast<double>(batch.size());
      metrics.ppo = ppo.update(model.policy, old, batch, ppo_rng);
      metrics.mean_kl = metrics.ppo.mean_kl;
    }

    metrics.val_f1 = has_val ? evaluate(model, g, Split::kVal, cfg.selection, cfg.threads) : 0.0;
    if (!std::isfinite(metrics.train_loss)) throw RuntimeFailure("training diverged");
    if (!has_val || metrics.val_f1 > result.best_val_f1) {
      result.best = model;
      result.best_val_f1 = metrics.val_f1;
      result.best_iteration = iter;
    }
    result.history.push_back(metrics);
    if (on_iteration) on_iteration(metrics);
  }
  result.last = model;
  return result;
}

/// Keeps edge (u, v) iff u is in v's decoded set or v is in u's. The result is
/// always a subgraph of `g`.
inline Graph denoised_graph(const GdpModel& m, const Graph& g, SelectionRule rule,
                            std::size_t threads = 1) {
  std::vector<NodeId> all(g.num_nodes());
  std::iota(all.begin(), all.end(), NodeId{0});
  const auto sets = decode_selection(m, g, all, rule, threads);
  std::vector<Edge> kept;
  for (NodeId v = 0; v < g.num_nodes(); ++v) {
    for (NodeId u : sets[v]) kept.emplace_back(std::min(u, v), std::max(u, v));
  }
  return g.with_edges(kept);
}

inline Graph export_denoised_graph(const GdpModel& m, const Graph& g,
                                   const std::filesystem::path& path,
                                   SelectionRule rule = SelectionRule::kLearned,
                                   std::size_t threads = 1) {
  Graph out = denoised_graph(m, g, rule, threads);
  write_text(path, edge_list_text(out.edges()));
  return out;
}

struct SelectionReport {
  std::vector<NodeId> nodes;       // non-isolated nodes
  std::vector<double> fractions;   // |selected(v)| / |N(v)|
  std::array<std::size_t, 10> histogram{};
};

/// Fraction of neighbors kept per node under the deterministic decode, with
/// a 10-bin histogram (fraction 1.0 falls in the last bin).
inline SelectionReport selection_report(const GdpModel& m, const Graph& g,
                                        SelectionRule rule = SelectionRule::kLearned,
                                        std::size_t threads = 1) {
  SelectionReport r;
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    if (g.degree(v) > 0) r.nodes.push_back(v);
  const auto sets = decode_selection(m, g, r.nodes, rule, threads);
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const double f = static_cast<double>(sets[i].size()) / static_cast<double>(g.degree(r.nodes[i]));
    r.fractions.push_back(f);
    ++r.histogram[std::min<std::size_t>(9, static_cast<std::size_t>(f * 10.0))];
  }
  return r;
}

inline nlohmann::json selection_report_to_json(const SelectionReport& r) {
  double mean = 0.0;
  for (double f : r.fractions) mean += f;
  if (!r.fractions.empty()) mean /= static_cast<double>(r.fractions.size());
  return {{"nodes", r.nodes}, {"fractions", r.fractions}, {"histogram", r.histogram},
          {"mean_fraction", mean}};
}

}  // namespace gdpnet
