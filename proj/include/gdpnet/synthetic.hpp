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

#include <cmath>
#include <numeric>
#include <unordered_set>

#include "gdpnet/graph.hpp"

namespace gdpnet {

struct PlantedPartitionSpec {
  std::size_t num_nodes = 200;
  std::size_t num_classes = 2;
  double p_in = 0.1;
  double p_out = 0.0;
  std::size_t feature_dim = 16;
  double signal_strength = 1.0;
  std::uint64_t seed = 0;
};

/// Planted-partition graph. Node v belongs to class v / (n / classes).
/// Features are signal_strength * e_class plus unit Gaussian noise; splits are
/// a class-stratified 60/20/20.
inline Graph generate_planted_partition(const PlantedPartitionSpec& spec) {
  require(spec.num_classes >= 1, "need at least one class");
  require(spec.num_nodes % spec.num_classes == 0,
          "node count must be divisible by class count");
  require(0.0 <= spec.p_out && spec.p_out <= spec.p_in && spec.p_in <= 1.0,
          "probabilities must satisfy 0 <= p_out <= p_in <= 1");
  require(spec.feature_dim >= spec.num_classes,
          "feature dimension must be at least the class count");

  const std::size_t n = spec.num_nodes;
  const std::size_t block = n / spec.num_classes;
  std::vector<ClassId> labels(n);
  for (NodeId v = 0; v < n; ++v) labels[v] = v / block;

  Rng edge_rng(derive_seed(spec.seed, 1));
  std::vector<Edge> edges;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) {
      const double p = labels[u] == labels[v] ? spec.p_in : spec.p_out;
      // A draw is consumed for every pair so streams stay aligned across p.
      if (uniform01(edge_rng) < p) edges.emplace_back(u, v);
    }
  }

  Rng feat_rng(derive_seed(spec.seed, 2));
  std::normal_distribution<double> noise(0.0, 1.0);
  Matrix features(n, spec.feature_dim);
  for (NodeId v = 0; v < n; ++v) {
    for (std::size_t j = 0; j < spec.feature_dim; ++j) {
      features(v, j) = noise(feat_rng) + (j == labels[v] ? spec.signal_strength : 0.0);
    }
  }

  Rng split_rng(derive_seed(spec.seed, 3));
  auto splits = stratified_split(labels, 0.6, 0.2, split_rng);
  return Graph::from_edges(n, edges, std::move(features), std::move(labels),
                           std::move(splits));
}

enum class CorruptionMode { kZero, kRandomize };

struct NoiseSpec {
  double edge_noise_rate = 0.0;
  double feature_corrupt_rate = 0.0;
  CorruptionMode corruption = CorruptionMode::kZero;
  std::uint64_t seed = 0;

  void validate() const {
    require(0.0 <= edge_noise_rate && edge_noise_rate <= 1.0,
            "edge noise rate must be in [0, 1]");
    require(0.0 <= feature_corrupt_rate && feature_corrupt_rate <= 1.0,
            "feature corruption rate must be in [0, 1]");
  }
};

/// Adds round(rate * |E|) edges, each joining two previously non-adjacent
/// nodes with different labels. Original edges and labels are preserved.
inline Graph inject_edge_noise(const Graph& g, const NoiseSpec& spec) {
  spec.validate();
  const auto to_add = static_cast<std::size_t>(
      std::llround(spec.edge_noise_rate * static_cast<double>(g.num_edges())));
  if (to_add == 0) return g;

  const std::size_t n = g.num_nodes();
  std::vector<std::size_t> class_size(g.num_classes(), 0);
  for (ClassId c : g.labels()) ++class_size[c];
  std::size_t cross_pairs = 0;
  for (std::size_t a = 0; a < class_size.size(); ++a)
    for (std::size_t b = a + 1; b < class_size.size(); ++b)
      cross_pairs += class_size[a] * class_size[b];
  std::size_t cross_edges = 0;
  for (const auto& [u, v] : g.edges())
    if (g.label(u) != g.label(v)) ++cross_edges;
  const std::size_t available = cross_pairs - cross_edges;
  require(to_add <= available,
          "cannot add " + std::to_string(to_add) + " cross-class edges; only " +
              std::to_string(available) + " absent cross-class pairs exist");

  Rng rng(derive_seed(spec.seed, 11));
  std::vector<Edge> added;
  added.reserve(to_add);
  if (2 * to_add <= available) {
    // Sparse regime: rejection sampling terminates quickly.
    std::unordered_set<std::uint64_t> taken;
    std::uniform_int_distribution<NodeId> pick(0, n - 1);
    while (added.size() < to_add) {
      NodeId u = pick(rng);
      NodeId v = pick(rng);
      if (g.label(u) == g.label(v) || g.has_edge(u, v)) continue;
      if (u > v) std::swap(u, v);
      if (taken.insert(static_cast<std::uint64_t>(u) * n + v).second) {
        added.emplace_back(u, v);
      }
    }
  } else {
    std::vector<Edge> pool;
    pool.reserve(available);
    for (NodeId u = 0; u < n; ++u)
      for (NodeId v = u + 1; v < n; ++v)
        if (g.label(u) != g.label(v) && !g.has_edge(u, v)) pool.emplace_back(u, v);
    for (std::size_t i = 0; i < to_add; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
      std::swap(pool[i], pool[pick(rng)]);
      added.push_back(pool[i]);
    }
  }

  auto all = g.edges();
  all.insert(all.end(), added.begin(), added.end());
  return g.with_edges(all);
}

/// Replaces round(rate * n * D) uniformly chosen feature entries with zero
/// (or a standard normal draw in randomize mode).
inline Graph corrupt_features(const Graph& g, const NoiseSpec& spec) {
  spec.validate();
  Matrix features = g.features();
  const std::size_t total = features.size();
  const auto k = static_cast<std::size_t>(
      std::llround(spec.feature_corrupt_rate * static_cast<double>(total)));
  if (k == 0) return g;

  Rng rng(derive_seed(spec.seed, 12));
  std::vector<std::size_t> idx(total);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, total - 1);
    std::swap(idx[i], idx[pick(rng)]);
    features.data()[idx[i]] =
        spec.corruption == CorruptionMode::kZero ? 0.0 : normal(rng);
  }
  return g.with_features(std::move(features));
}

}  // namespace gdpnet
