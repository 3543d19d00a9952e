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

#include <gtest/gtest.h>

#include <set>

#include "test_util.hpp"

using namespace gdpnet;
using gdpnet::testing::random_vector;

namespace {

struct Fixture {
  Graph graph;
  RepresentationModel model;
  PolicyParams policy;
};

Fixture make_fixture(std::uint64_t seed, std::size_t embed = 6) {
  Fixture f;
  f.graph = gdpnet::testing::small_planted(seed, 40, 0.4, 0.1);
  Rng rng(seed + 1000);
  f.model = RepresentationModel::init(embed, f.graph.feature_dim(), 2, rng);
  f.policy = PolicyParams::glorot(embed, {7, 5}, rng);
  return f;
}

NodeId node_with_degree_at_least(const Graph& g, std::size_t k) {
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    if (g.degree(v) >= k) return v;
  throw std::logic_error("no node of the requested degree");
}

Vector relu_embed(const Matrix& w, std::span<const double> x) {
  Vector h(w.rows(), 0.0);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    for (std::size_t c = 0; c < w.cols(); ++c) h[r] += w(r, c) * x[c];
    h[r] = std::max(h[r], 0.0);
  }
  return h;
}

}  // namespace

TEST(EpisodeTest, IsolatedNodeHasOnlyEndingNeighbor) {
  const Graph g = gdpnet::testing::tiny_graph();
  Rng rng(1);
  const auto m = RepresentationModel::init(3, 2, 2, rng);
  const SelectionEnv env(g, m, ScoreMode::kSoft);
  const auto st = env.init_episode(3);
  ASSERT_EQ(st.candidates.size(), 1u);
  EXPECT_EQ(st.candidates[0], kEndingNeighbor);
  const auto policy = PolicyParams::glorot(3, {4}, rng);
  const auto traj = env.rollout(3, policy, rng);
  EXPECT_TRUE(traj.transitions.empty());
  EXPECT_EQ(traj.terminated_by, Termination::kExhaustedCandidates);
}

TEST(EpisodeTest, CandidatesIncludeEndingNeighbor) {
  // Star: node 0 with three neighbors.
  const std::vector<Edge> edges{{0, 1}, {0, 2}, {0, 3}};
  const Graph g = Graph::from_edges(4, edges, Matrix(4, 2, 1.0), {0, 0, 1, 1});
  Rng rng(2);
  const auto m = RepresentationModel::init(3, 2, 2, rng);
  const SelectionEnv env(g, m, ScoreMode::kSoft);
  const auto st = env.init_episode(0);
  EXPECT_EQ(st.candidates.size(), 4u);
  EXPECT_EQ(std::count(st.candidates.begin(), st.candidates.end(), kEndingNeighbor), 1);
  EXPECT_EQ(st.real_candidates(), 3u);
  EXPECT_TRUE(st.selected.empty());
  EXPECT_EQ(st.s.size(), 6u);
  EXPECT_THROW(env.init_episode(4), ValidationError);
}

TEST(EpisodeTest, InitialEmbeddingIsSelfOnly) {
  const auto f = make_fixture(3);
  const SelectionEnv env(f.graph, f.model, ScoreMode::kSoft);
  for (NodeId v = 0; v < 5; ++v) {
    const auto st = env.init_episode(v);
    EXPECT_EQ(st.h_v, relu_embed(f.model.agg.weight, f.graph.feature(v)));
  }
}

TEST(EpisodeTest, EndingNeighborEmbedsZeroFeatures) {
  const auto f = make_fixture(4);
  const SelectionEnv env(f.graph, f.model, ScoreMode::kSoft);
  EXPECT_EQ(env.self_embedding(kEndingNeighbor), Vector(6, 0.0));
}

TEST(RegretScoreTest, ZeroWeightsGiveZeroScores) {
  const auto f = make_fixture(5);
  const SelectionEnv env(f.graph, f.model, ScoreMode::kSoft);
  PolicyParams zero{MlpParams::zeros_like(f.policy.net)};
  const auto st = env.init_episode(node_with_degree_at_least(f.graph, 3));
  const Vector scores = env.regret_scores(st, zero);
  for (double s : scores) EXPECT_EQ(s, 0.0);
  const Vector p = softmax(scores);
  for (double v : p) EXPECT_NEAR(v, 1.0 / static_cast<double>(p.size()), 1e-15);
}

TEST(RegretScoreTest, IdenticalFeaturesGiveIdenticalScores) {
  Matrix x(3, 2, std::vector<double>{0.3, 0.7, 1.0, -1.0, 1.0, -1.0});
  const std::vector<Edge> edges{{0, 1}, {0, 2}};
  const Graph g = Graph::from_edges(3, edges, x, {0, 1, 1});
  Rng rng(6);
  const auto m = RepresentationModel::init(4, 2, 2, rng);
  const auto policy = PolicyParams::glorot(4, {5}, rng);
  const SelectionEnv env(g, m, ScoreMode::kSoft);
  const auto scores = env.regret_scores(env.init_episode(0), policy);
  ASSERT_EQ(scores.size(), 3u);
  EXPECT_EQ(scores[0], scores[1]);
}

TEST(RegretScoreTest, MatchesReferenceFormula) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto f = make_fixture(seed);
    const SelectionEnv env(f.graph, f.model, ScoreMode::kSoft);
    const NodeId v = node_with_degree_at_least(f.graph, 2);
    const auto st = env.init_episode(v);
    const Vector scores = env.regret_scores(st, f.policy);
    const Vector hv = relu_embed(f.model.agg.weight, f.graph.feature(v));
    for (std::size_t k = 0; k < st.candidates.size(); ++k) {
      const NodeId u = st.candidates[k];
      const Vector xu = u == kEndingNeighbor ? Vector(f.graph.feature_dim(), 0.0)
                                             : Vector(f.graph.feature(u).begin(), f.graph.feature(u).end());
      Vector a = hv;
      const Vector hu = relu_embed(f.model.agg.weight, xu);
      a.insert(a.end(), hu.begin(), hu.end());
      const auto& layers = f.policy.net.layers;
      for (std::size_t l = 0; l < layers.size(); ++l) {
        Vector z(layers[l].rows(), 0.0);
        for (std::size_t r = 0; r < z.size(); ++r)
          for (std::size_t c = 0; c < a.size(); ++c) z[r] += layers[l](r, c) * a[c];
        if (l + 1 < layers.size())
          for (double& e : z) e = std::max(e, 0.0);
        a = z;
      }
      EXPECT_NEAR(scores[k], a[0], 1e-12);
    }
  }
}

TEST(RegretScoreTest, EmptyCandidateSetRejected) {
  const auto f = make_fixture(7);
  const SelectionEnv env(f.graph, f.model, ScoreMode::kSoft);
  auto st = env.init_episode(0);
  st.candidates.clear();
  EXPECT_THROW(env.regret_scores(st, f.policy), ValidationError);
}

TEST(CandidateSamplingTest, SingleCandidateAlwaysChosen) {
  Rng rng(1);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample_candidate_index(Vector{3.7}, rng), 0u);
}

TEST(CandidateSamplingTest, EqualScoresSplitEvenly) {
  Rng rng(2);
  int first = 0;
  for (int i = 0; i < 10000; ++i) first += sample_candidate_index(Vector{0.0, 0.0}, rng) == 0;
  EXPECT_NEAR(first / 10000.0, 0.5, 0.02);
}

TEST(CandidateSamplingTest, FrequenciesFollowSoftmax) {
  Rng rng(3);
  const Vector scores{1.0, -0.5, 0.2, 2.0};
  const Vector p = softmax(scores);
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 20000; ++i) ++counts[sample_candidate_index(scores, rng)];
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(counts[k] / 20000.0, p[k], 0.015);
}

TEST(CandidateSamplingTest, DominantEndingScoreEndsEpisode) {
  const auto f = make_fixture(8);
  const SelectionEnv env(f.graph, f.model, ScoreMode::kSoft);
  const NodeId v = node_with_degree_at_least(f.graph, 3);
  Rng rng(4);
  int ended = 0;
  for (int i = 0; i < 1000; ++i) {
    auto st = env.init_episode(v);
    Vector scores(st.candidates.size(), 0.0);
    scores.back() = 50.0;  // the ending neighbor is appended last
    if (env.sample_next_candidate(st, scores, rng) == kEndingNeighbor) {
      ++ended;
      EXPECT_TRUE(st.finished);
    }
  }
  EXPECT_GT(ended, 990);
}

TEST(CandidateSamplingTest, NonFiniteScoreRejected) {
  Rng rng(5);
  EXPECT_THROW(sample_candidate_index(Vector{0.0, NAN}, rng), ValidationError);
  EXPECT_THROW(sample_candidate_index(Vector{}, rng), ValidationError);
}

TEST(StepTest, FirstSelectionEarnsOne) {
  const auto f = make_fixture(9);
  const SelectionEnv env(f.graph, f.model, ScoreMode::kSoft);
  auto st = env.init_episode(node_with_degree_at_least(f.graph, 2));
  env.take_candidate(st, 0);
  EXPECT_DOUBLE_EQ(env.step(st, 1), 1.0);
  EXPECT_EQ(st.selected.size(), 1u);
}

TEST(StepTest, EqualScoresGiveReciprocalRewards) {
  auto f = make_fixture(10);
  f.model.clf.weight.fill(0.0);  // every f_c is 1/2
  const SelectionEnv env(f.graph, f.model, ScoreMode::kSoft);
  const NodeId v = node_with_degree_at_least(f.graph, 4);
  auto st = env.init_episode(v, false);
  for (std::size_t t = 1; t <= 4; ++t) {
    env.take_candidate(st, 0);
    EXPECT_NEAR(env.step(st, 1), 1.0 / static_cast<double>(t), 1e-15);
  }
}

TEST(StepTest, RewardMatchesMarginalValueFormula) {
  const auto f = make_fixture(11);
  const SelectionEnv env(f.graph, f.model, ScoreMode::kSoft);
  const NodeId v = node_with_degree_at_least(f.graph, 5);
  auto st = env.init_episode(v, false);
  std::vector<NodeId> kept;
  Rng rng(1);
  while (st.real_candidates() > 0) {
    const NodeId u = env.take_candidate(st, 0);
    const int a = static_cast<int>(rng() % 2);
    const double r = env.step(st, a);
    if (a == 0) {
      EXPECT_EQ(r, 0.0);
      continue;
    }
    kept.push_back(u);
    double denom = 0.0;
    for (NodeId w : kept) {
      const std::span<const double> rows[] = {f.graph.feature(w)};
      denom += fc_score(f.model.clf, f.model.agg, f.graph.feature(v), rows, f.graph.label(v),
                        ScoreMode::kSoft);
    }
    const std::span<const double> rows[] = {f.graph.feature(u)};
    const double num = fc_score(f.model.clf, f.model.agg, f.graph.feature(v), rows,
                                f.graph.label(v), ScoreMode::kSoft);
    EXPECT_NEAR(r, num / denom, 1e-12);
  }
}

TEST(StepTest, ZeroDenominatorGivesZeroReward) {
  auto f = make_fixture(12);
  // Pick a class-1 node. With ReLU embeddings h >= 0, logits (sum h, -sum h)
  // make class 0 win or tie, and argmax breaks ties toward class 0, so hard
  // mode scores every pair 0.
  NodeId v = 0;
  while (f.graph.label(v) != 1 || f.graph.degree(v) < 2) ++v;
  f.model.clf.weight.fill(0.0);
  for (std::size_t k = 0; k < f.model.clf.weight.cols(); ++k) {
    f.model.clf.weight(0, k) = 1.0;
    f.model.clf.weight(1, k) = -1.0;
  }
  const SelectionEnv env(f.graph, f.model, ScoreMode::kHard);
  auto st = env.init_episode(v, false);
  while (st.real_candidates() > 0) {
    const NodeId u = env.take_candidate(st, 0);
    ASSERT_EQ(env.item_score(v, u), 0.0);
    EXPECT_EQ(env.step(st, 1), 0.0);
  }
  EXPECT_EQ(st.selected.size(), f.graph.degree(v));
}

TEST(StepTest, RejectionLeavesEmbeddingUntouched) {
  const auto f = make_fixture(13);
  const SelectionEnv env(f.graph, f.model, ScoreMode::kSoft);
  auto st = env.init_episode(node_with_degree_at_least(f.graph, 3), false);
  env.take_candidate(st, 0);
  env.step(st, 1);
  const Vector h = st.h_v;
  env.take_candidate(st, 0);
  const Vector s_before = st.s;
  EXPECT_EQ(env.step(st, 0), 0.0);
  EXPECT_EQ(st.h_v, h);
  EXPECT_EQ(st.s, s_before);
  const NodeId next = env.take_candidate(st, 0);
  EXPECT_EQ(Vector(st.s.begin(), st.s.begin() + 6), h);
  EXPECT_EQ(Vector(st.s.begin() + 6, st.s.end()), env.self_embedding(next));
}

TEST(StepTest, SteppingWithoutCandidateRejected) {
  const auto f = make_fixture(14);
  const SelectionEnv env(f.graph, f.model, ScoreMode::kSoft);
  auto st = env.init_episode(node_with_degree_at_least(f.graph, 1));
  EXPECT_THROW(env.step(st, 1), ValidationError);
  env.take_candidate(st, st.candidates.size() - 1);  // the ending neighbor
  EXPECT_TRUE(st.finished);
  EXPECT_THROW(env.step(st, 1), ValidationError);
  EXPECT_THROW(env.take_candidate(st, 0), ValidationError);
}

TEST(StepTest, IncrementalEmbeddingMatchesRecomputation) {
  const auto f = make_fixture(15);
  const SelectionEnv env(f.graph, f.model, ScoreMode::kSoft);
  Rng rng(3);
  for (NodeId v = 0; v < f.graph.num_nodes(); ++v) {
    auto st = env.init_episode(v, false);
    while (st.real_candidates() > 0) {
      env.take_candidate(st, rng() % st.candidates.size());
      env.step(st, static_cast<int>(rng() % 2));
      const Vector fresh = aggregate_node(f.model.agg, f.graph, v, st.selected);
      for (std::size_t k = 0; k < fresh.size(); ++k) ASSERT_NEAR(st.h_v[k], fresh[k], 1e-12);
    }
  }
}

TEST(RolloutTest, AlwaysSelectWithoutEndingKeepsWholeNeighborhood) {
  const auto f = make_fixture(16);
  const SelectionEnv env(f.graph, f.model, ScoreMode::kSoft);
  Rng rng(1);
  RolloutOptions opt;
  opt.include_ending = false;
  opt.action = ActionMode::kAlwaysSelect;
  for (NodeId v = 0; v < f.graph.num_nodes(); ++v) {
    auto sel = env.rollout(v, f.policy, rng, opt).selected();
    std::sort(sel.begin(), sel.end());
    EXPECT_EQ(sel, std::vector<NodeId>(f.graph.neighbors(v).begin(), f.graph.neighbors(v).end()));
  }
}

TEST(RolloutTest, TrajectoryInvariants) {
  const auto f = make_fixture(17);
  const SelectionEnv env(f.graph, f.model, ScoreMode::kSoft);
  Rng rng(2);
  for (int rep = 0; rep < 5; ++rep) {
    for (NodeId v = 0; v < f.graph.num_nodes(); ++v) {
      const auto t = env.rollout(v, f.policy, rng);
      EXPECT_LE(t.transitions.size(), f.graph.degree(v) + 1);
      std::set<NodeId> seen;
      double prefix = 0.0;
      for (const auto& tr : t.transitions) {
        EXPECT_TRUE(seen.insert(tr.candidate).second) << "candidate repeated";
        EXPECT_TRUE(f.graph.has_edge(v, tr.candidate));
        EXPECT_GE(tr.reward, 0.0);
        EXPECT_TRUE(tr.action == 0 || tr.action == 1);
        EXPECT_EQ(tr.state.size(), 12u);
        const double p1 = clamp_prob(policy_forward(f.policy, tr.state));
        EXPECT_NEAR(tr.log_prob, tr.action == 1 ? std::log(p1) : std::log1p(-p1), 1e-12);
        EXPECT_GE(prefix + tr.reward, prefix);
        prefix += tr.reward;
      }
      if (f.graph.degree(v) > 0 && t.terminated_by != Termination::kEndingNeighbor) {
        EXPECT_EQ(t.transitions.size(), f.graph.degree(v));
      }
    }
  }
}

TEST(RolloutTest, StepLimitRespected) {
  const auto f = make_fixture(18);
  const SelectionEnv env(f.graph, f.model, ScoreMode::kSoft);
  Rng rng(3);
  RolloutOptions opt;
  opt.max_steps = 2;
  opt.include_ending = false;
  const NodeId v = node_with_degree_at_least(f.graph, 4);
  const auto t = env.rollout(v, f.policy, rng, opt);
  EXPECT_EQ(t.transitions.size(), 2u);
  EXPECT_EQ(t.terminated_by, Termination::kStepLimit);
}

TEST(RolloutTest, GreedyDecodeIsDeterministicAndThresholded) {
  const auto f = make_fixture(19);
  const SelectionEnv env(f.graph, f.model, ScoreMode::kSoft);
  Rng a(1), b(999);
  for (NodeId v = 0; v < f.graph.num_nodes(); ++v) {
    const auto t1 = env.rollout(v, f.policy, a, greedy_decode_options());
    const auto t2 = env.rollout(v, f.policy, b, greedy_decode_options());
    EXPECT_EQ(t1.selected(), t2.selected());
    for (const auto& tr : t1.transitions)
      EXPECT_EQ(tr.action, policy_forward(f.policy, tr.state) >= 0.5 ? 1 : 0);
  }
}

TEST(RolloutTest, ParallelRolloutsMatchSerial) {
  const auto f = make_fixture(20);
  const SelectionEnv env(f.graph, f.model, ScoreMode::kSoft);
  std::vector<NodeId> nodes(f.graph.num_nodes());
  std::iota(nodes.begin(), nodes.end(), NodeId{0});
  const auto one = env.rollout_many(nodes, f.policy, 5, {}, 1);
  const auto four = env.rollout_many(nodes, f.policy, 5, {}, 4);
  ASSERT_EQ(one.size(), four.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(trajectory_to_json(one[i]), trajectory_to_json(four[i]));
  }
}

TEST(TrajectoryDumpTest, JsonFields) {
  Trajectory t;
  t.target = 4;
  t.transitions.push_back({{}, 1, 1.0, -0.1, 9});
  t.transitions.push_back({{}, 0, 0.0, -2.0, 2});
  t.terminated_by = Termination::kEndingNeighbor;
  EXPECT_EQ(trajectory_to_json(t).dump(),
            R"({"actions":[1,0],"candidates":[9,2],"node":4,"rewards":[1.0,0.0],"terminated_by":"ending_neighbor"})");
}
