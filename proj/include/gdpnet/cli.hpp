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

#include <iostream>
#include <ostream>

#include "CLI11.hpp"

#include "gdpnet/gdpnet.hpp"

namespace gdpnet::cli {

namespace fs = std::filesystem;

struct CommonOptions {
  std::uint64_t seed = 0;
  std::string config;
  std::string out_dir = ".";
  std::size_t threads = 1;
};

struct GraphOptions {
  std::string graph;
  std::string features;
  std::string labels;
  std::string splits;
  std::string format = "json";
};

inline void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--seed", o.seed, "Root random seed")->capture_default_str();
  cmd->add_option("--config", o.config, "JSON file of training config overrides");
  cmd->add_option("--out-dir", o.out_dir, "Directory for output artifacts")->capture_default_str();
  cmd->add_option("--threads", o.threads, "Worker threads for rollouts")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

inline void add_graph_inputs(CLI::App* cmd, GraphOptions& o, bool required = true) {
  auto* g = cmd->add_option("--graph", o.graph, "Graph file (JSON) or edge list");
  if (required) g->required();
  cmd->add_option("--features", o.features, "Feature file for edge-list input (tab-separated)");
  cmd->add_option("--labels", o.labels, "Label file for edge-list input (one per line)");
  cmd->add_option("--splits", o.splits, "Split file for edge-list input ('node train|val|test')");
  cmd->add_option("--format", o.format, "Input format")
      ->capture_default_str()
      ->check(CLI::IsMember({"json", "edgelist"}));
}

inline Graph load_input(const GraphOptions& o, std::uint64_t seed) {
  GraphSources src{o.graph, o.features, o.labels, o.splits, seed};
  return load_graph(src, o.format == "json" ? GraphFormat::kJson : GraphFormat::kEdgeList).graph;
}

inline nlohmann::json read_json_file(const fs::path& p) {
  auto in = detail::open_input(p);
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(p.string() + ": " + e.what());
  }
}

inline std::string jsonl(const std::vector<nlohmann::json>& rows) {
  std::string s;
  for (const auto& r : rows) s += r.dump() + "\n";
  return s;
}

/// Entry point shared by the executable and the tests. Returns 0 on success,
/// 1 on invalid input and 2 on runtime failure.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Signal-neighbor selection and mean-aggregator node representations"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  CommonOptions common;
  GraphOptions gin;
  std::string checkpoint;
  std::string selection = "learned";

  // synth
  PlantedPartitionSpec pp;
  std::string out_format = "json";
  auto* synth = app.add_subcommand("synth", "Generate a planted-partition graph");
  synth->add_option("--n", pp.num_nodes, "Number of nodes")->capture_default_str();
  synth->add_option("--classes", pp.num_classes, "Number of classes")->capture_default_str();
  synth->add_option("--p-in", pp.p_in, "Within-class edge probability")->capture_default_str();
  synth->add_option("--p-out", pp.p_out, "Cross-class edge probability")->capture_default_str();
  synth->add_option("--dim", pp.feature_dim, "Feature dimension")->capture_default_str();
  synth->add_option("--signal", pp.signal_strength, "Class-mean scale")->capture_default_str();
  synth->add_option("--format", out_format, "Output format")
      ->capture_default_str()
      ->check(CLI::IsMember({"json", "edgelist"}));
  add_common(synth, common);

  // noise
  NoiseSpec noise;
  std::string corrupt_mode = "zero";
  auto* noise_cmd = app.add_subcommand("noise", "Inject cross-class edges and corrupt features");
  add_graph_inputs(noise_cmd, gin);
  noise_cmd->add_option("--edge-noise", noise.edge_noise_rate, "Added cross-class edges / |E|")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  noise_cmd->add_option("--feature-noise", noise.feature_corrupt_rate, "Fraction of corrupted feature entries")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  noise_cmd->add_option("--corrupt-mode", corrupt_mode, "Corrupted entries become zero or random")
      ->capture_default_str()
      ->check(CLI::IsMember({"zero", "randomize"}));
  add_common(noise_cmd, common);

  // train
  TrainConfig defaults;
  TrainConfig flags = defaults;
  std::string fc_mode = "soft";
  auto* train_cmd = app.add_subcommand("train", "Jointly train the selection policy and the aggregator");
  add_graph_inputs(train_cmd, gin);
  std::vector<std::pair<CLI::Option*, std::function<void(TrainConfig&)>>> overrides;
  auto track = [&](CLI::Option* opt, std::function<void(TrainConfig&)> apply) {
    opt->capture_default_str();
    overrides.emplace_back(opt, std::move(apply));
  };
  track(train_cmd->add_option("--iters", flags.outer_iterations, "Outer iterations"),
        [&](TrainConfig& c) { c.outer_iterations = flags.outer_iterations; });
  track(train_cmd->add_option("--rep-epochs", flags.rep_epochs, "Representation epochs per iteration"),
        [&](TrainConfig& c) { c.rep_epochs = flags.rep_epochs; });
  track(train_cmd->add_option("--gamma", flags.ppo.gamma, "Discount factor"),
        [&](TrainConfig& c) { c.ppo.gamma = flags.ppo.gamma; });
  track(train_cmd->add_option("--delta", flags.ppo.kl_target, "KL trust-region threshold"),
        [&](TrainConfig& c) { c.ppo.kl_target = flags.ppo.kl_target; });
  track(train_cmd->add_option("--batch-size", flags.batch_size, "Representation mini-batch size"),
        [&](TrainConfig& c) { c.batch_size = flags.batch_size; });
  track(train_cmd->add_option("--embed-dim", flags.embed_dim, "Embedding dimension"),
        [&](TrainConfig& c) { c.embed_dim = flags.embed_dim; });
  track(train_cmd->add_option("--fc-mode", fc_mode, "Reward score: soft (true-class probability) or hard (0/1)")
            ->check(CLI::IsMember({"soft", "hard"})),
        [&](TrainConfig& c) { c.fc_mode = fc_mode == "soft" ? ScoreMode::kSoft : ScoreMode::kHard; });
  track(train_cmd->add_option("--rep-lr", flags.rep_learning_rate, "Aggregator/classifier learning rate"),
        [&](TrainConfig& c) { c.rep_learning_rate = flags.rep_learning_rate; });
  track(train_cmd->add_option("--policy-lr", flags.ppo.learning_rate, "Policy learning rate"),
        [&](TrainConfig& c) { c.ppo.learning_rate = flags.ppo.learning_rate; });
  track(train_cmd->add_option("--ppo-epochs", flags.ppo.update_epochs, "PPO epochs per update"),
        [&](TrainConfig& c) { c.ppo.update_epochs = flags.ppo.update_epochs; });
  track(train_cmd->add_option("--selection", selection, "Neighbor selection rule")
            ->check(CLI::IsMember({"learned", "select-all", "select-none"})),
        [&](TrainConfig& c) { c.selection = parse_selection_rule(selection); });
  add_common(train_cmd, common);

  // eval / denoise / report share inputs
  auto add_model_inputs = [&](CLI::App* cmd) {
    add_graph_inputs(cmd, gin);
    cmd->add_option("--checkpoint", checkpoint, "Checkpoint written by 'train'")->required();
    cmd->add_option("--selection", selection, "Neighbor selection rule")
        ->capture_default_str()
        ->check(CLI::IsMember({"learned", "select-all", "select-none"}));
    add_common(cmd, common);
  };
  auto* eval_cmd = app.add_subcommand("eval", "Micro-F1 on the validation and test splits");
  add_model_inputs(eval_cmd);
  auto* denoise_cmd = app.add_subcommand("denoise", "Export the graph restricted to selected neighbors");
  add_model_inputs(denoise_cmd);
  auto* report_cmd = app.add_subcommand("report", "Distribution of kept-neighbor fractions");
  add_model_inputs(report_cmd);

  // check-submodular
  std::size_t trials = 1000;
  std::size_t snapshots = 5;
  std::string order = "value";
  auto* check_cmd = app.add_subcommand("check-submodular", "Empirical monotonicity/submodularity checks of the selection reward");
  add_graph_inputs(check_cmd, gin, false);
  check_cmd->add_option("--trials", trials, "Random (A, B, c) draws per check")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  check_cmd->add_option("--snapshots", snapshots, "Random parameter snapshots")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  check_cmd->add_option("--order", order, "Canonical insertion order of the reward set function")
      ->capture_default_str()
      ->check(CLI::IsMember({"value", "id"}));
  check_cmd->add_option("--embed-dim", flags.embed_dim, "Embedding dimension of the snapshots")
      ->capture_default_str();
  check_cmd->add_option("--fc-mode", fc_mode, "Reward score mode")
      ->capture_default_str()
      ->check(CLI::IsMember({"soft", "hard"}));
  add_common(check_cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    const fs::path out_dir(common.out_dir);
    fs::create_directories(out_dir);

    if (*synth) {
      pp.seed = common.seed;
      const Graph g = generate_planted_partition(pp);
      if (out_format == "json") save_json_graph(g, out_dir / "graph.json");
      else save_edge_list_graph(g, out_dir);
      out << nlohmann::json{{"nodes", g.num_nodes()}, {"edges", g.num_edges()},
                            {"classes", g.num_classes()}, {"dim", g.feature_dim()}}.dump()
          << "\n";
      return 0;
    }

    if (*noise_cmd) {
      noise.seed = common.seed;
      noise.corruption = corrupt_mode == "zero" ? CorruptionMode::kZero : CorruptionMode::kRandomize;
      const Graph g = load_input(gin, common.seed);
      const Graph noisy = corrupt_features(inject_edge_noise(g, noise), noise);
      save_json_graph(noisy, out_dir / "graph.json");
      out << nlohmann::json{{"edges_before", g.num_edges()}, {"edges_after", noisy.num_edges()}}.dump()
          << "\n";
      return 0;
    }

    if (*train_cmd) {
      TrainConfig cfg = defaults;
      if (!common.config.empty()) apply_config_overrides(cfg, read_json_file(common.config));
      for (auto& [opt, apply] : overrides)
        if (opt->count() > 0) apply(cfg);
      // An explicit --seed beats the config file; an omitted one does not.
      if (train_cmd->get_option("--seed")->count() > 0) cfg.seed = common.seed;
      cfg.threads = common.threads;
      cfg.validate();

      const Graph g = load_input(gin, common.seed);
      std::vector<nlohmann::json> metric_rows, ppo_rows;
      const auto result = train(g, cfg, [&](const IterationMetrics& m) {
        metric_rows.push_back(metrics_to_json(m));
        if (cfg.selection == SelectionRule::kLearned) ppo_rows.push_back(ppo_diagnostics_to_json(m));
      });

      auto ckpt = model_to_json(result.best);
      ckpt["config"] = config_to_json(cfg);
      write_text(out_dir / "checkpoint.json", ckpt.dump() + "\n");
      write_text(out_dir / "metrics.jsonl", jsonl(metric_rows));
      write_text(out_dir / "ppo.jsonl", jsonl(ppo_rows));

      nlohmann::json summary{{"best_iteration", result.best_iteration},
                             {"best_val_f1", result.best_val_f1}};
      if (!g.nodes_in(Split::kTest).empty())
        summary["test_f1"] = evaluate(result.best, g, Split::kTest, cfg.selection, cfg.threads);
      write_text(out_dir / "summary.json", summary.dump() + "\n");
      out << summary.dump() << "\n";
      return 0;
    }

    if (*eval_cmd || *denoise_cmd || *report_cmd) {
      const Graph g = load_input(gin, common.seed);
      const GdpModel m = load_model(checkpoint);
      require(m.rep.agg.feature_dim() == g.feature_dim(), "checkpoint does not match the graph's feature dimension");
      const SelectionRule rule = parse_selection_rule(selection);

      if (*eval_cmd) {
        nlohmann::json j;
        for (Split s : {Split::kVal, Split::kTest})
          if (!g.nodes_in(s).empty()) j[std::string(split_name(s)) + "_f1"] = evaluate(m, g, s, rule, common.threads);
        std::vector<NodeId> all(g.num_nodes());
        std::iota(all.begin(), all.end(), NodeId{0});
        const auto sets = decode_selection(m, g, all, rule, common.threads);
        std::vector<Embedding> embs;
        for (NodeId v = 0; v < g.num_nodes(); ++v)
          embs.push_back({v, sets[v].size(), aggregate_node(m.rep.agg, g, v, sets[v])});
        write_text(out_dir / "embeddings.tsv", embeddings_tsv(embs));
        write_text(out_dir / "eval.json", j.dump() + "\n");
        out << j.dump() << "\n";
        return 0;
      }
      if (*denoise_cmd) {
        const Graph d = export_denoised_graph(m, g, out_dir / "denoised_edges.txt", rule, common.threads);
        save_json_graph(d, out_dir / "denoised_graph.json");
        out << nlohmann::json{{"edges_before", g.num_edges()}, {"edges_after", d.num_edges()}}.dump()
            << "\n";
        return 0;
      }
      const auto rep = selection_report(m, g, rule, common.threads);
      write_text(out_dir / "selection_report.json", selection_report_to_json(rep).dump() + "\n");
      if (rule == SelectionRule::kLearned) {
        const SelectionEnv env(g, m.rep, ScoreMode::kSoft);
        const auto trajs = env.rollout_many(rep.nodes, m.policy, 0, greedy_decode_options(), common.threads);
        std::vector<nlohmann::json> rows;
        for (const auto& t : trajs) rows.push_back(trajectory_to_json(t));
        write_text(out_dir / "trajectories.jsonl", jsonl(rows));
      }
      out << nlohmann::json{{"histogram", rep.histogram}}.dump() << "\n";
      return 0;
    }

    if (*check_cmd) {
      Graph g;
      if (gin.graph.empty()) {
        g = generate_planted_partition({50, 2, 0.3, 0.05, 16, 1.0, derive_seed(common.seed, 1)});
      } else {
        g = load_input(gin, common.seed);
      }
      TrainConfig cfg;
      cfg.embed_dim = flags.embed_dim;
      std::vector<RepresentationModel> models;
      for (std::size_t s = 0; s < snapshots; ++s) {
        Rng rng(derive_seed(common.seed, 700, s));
        models.push_back(RepresentationModel::init(cfg.embed_dim, g.feature_dim(), g.num_classes(), rng));
      }
      std::vector<SelectionEnv> envs;
      for (const auto& m : models)
        envs.emplace_back(g, m, fc_mode == "soft" ? ScoreMode::kSoft : ScoreMode::kHard);
      std::vector<const SelectionEnv*> ptrs;
      for (const auto& e : envs) ptrs.push_back(&e);
      Rng rng(derive_seed(common.seed, 800));
      const auto r = run_gdp_suite(ptrs, trials, rng,
                                   order == "value" ? CanonicalOrder::kAscendingValue : CanonicalOrder::kAscendingId);
      nlohmann::json j{{"order", order},
                       {"monotone", check_report_to_json(r.monotone)},
                       {"submodular", check_report_to_json(r.submodular)},
                       {"max_equivalence_error", r.max_equivalence_error},
                       {"max_order_discrepancy", r.max_order_discrepancy}};
      write_text(out_dir / "submodular_report.json", j.dump() + "\n");
      out << j.dump() << "\n";
      return 0;
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace gdpnet::cli
