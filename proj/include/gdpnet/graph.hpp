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

#include <algorithm>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gdpnet/matrix.hpp"

namespace gdpnet {

enum class Split : std::uint8_t { kNone, kTrain, kVal, kTest };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
    case Split::kNone: break;
  }
  return "none";
}

using Edge = std::pair<NodeId, NodeId>;

/// Undirected attributed graph with labels and a train/val/test assignment.
///
/// Immutable once built: adjacency lists are sorted, symmetric, free of
/// self-loops and duplicates. Each node belongs to at most one split, so the
/// three masks are disjoint by construction.
class Graph {
 public:
  Graph() = default;

  /// Builds a graph from possibly directed, duplicated edges. Self-loops are
  /// dropped; every edge is symmetrized. Throws on ids >= num_nodes.
  static Graph from_edges(std::size_t num_nodes, std::span<const Edge> edges,
                          Matrix features, std::vector<ClassId> labels,
                          std::vector<Split> splits = {}) {
    require(features.rows() == num_nodes,
            "feature matrix has " + std::to_string(features.rows()) +
                " rows for " + std::to_string(num_nodes) + " nodes");
    require(features.all_finite(), "features contain non-finite values");
    if (labels.empty()) labels.assign(num_nodes, 0);
    require(labels.size() == num_nodes, "label count != node count");
    if (splits.empty()) splits.assign(num_nodes, Split::kNone);
    require(splits.size() == num_nodes, "split count != node count");

    Graph g;
    g.adjacency_.resize(num_nodes);
    for (const auto& [u, v] : edges) {
      if (u >= num_nodes || v >= num_nodes) {
        throw ValidationError("dangling node id in edge (" + std::to_string(u) +
                              ", " + std::to_string(v) + "); graph has " +
                              std::to_string(num_nodes) + " nodes");
      }
      if (u == v) continue;
      g.adjacency_[u].push_back(v);
      g.adjacency_[v].push_back(u);
    }
    for (auto& adj : g.adjacency_) {
      std::sort(adj.begin(), adj.end());
      adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
      g.num_edges_ += adj.size();
    }
    g.num_edges_ /= 2;
    g.features_ = std::move(features);
    g.labels_ = std::move(labels);
    g.splits_ = std::move(splits);
    g.num_classes_ =
        g.labels_.empty() ? 0 : *std::max_element(g.labels_.begin(), g.labels_.end()) + 1;
    return g;
  }

  std::size_t num_nodes() const { return adjacency_.size(); }
  std::size_t num_edges() const { return num_edges_; }
  std::size_t feature_dim() const { return features_.cols(); }
  std::size_t num_classes() const { return num_classes_; }

  std::span<const NodeId> neighbors(NodeId v) const { return adjacency_.at(v); }
  std::size_t degree(NodeId v) const { return adjacency_.at(v).size(); }
  bool has_edge(NodeId u, NodeId v) const {
    const auto& adj = adjacency_.at(u);
    return std::binary_search(adj.begin(), adj.end(), v);
  }

  const Matrix& features() const { return features_; }
  std::span<const double> feature(NodeId v) const { return features_.row(v); }

  const std::vector<ClassId>& labels() const { return labels_; }
  ClassId label(NodeId v) const { return labels_.at(v); }

  const std::vector<Split>& splits() const { return splits_; }
  Split split(NodeId v) const { return splits_.at(v); }

  std::vector<NodeId> nodes_in(Split s) const {
    std::vector<NodeId> out;
    for (NodeId v = 0; v < splits_.size(); ++v) {
      if (splits_[v] == s) out.push_back(v);
    }
    return out;
  }

  /// Each undirected edge once, as (u, v) with u < v, in lexicographic order.
  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    out.reserve(num_edges_);
    for (NodeId u = 0; u < adjacency_.size(); ++u) {
      for (NodeId v : adjacency_[u]) {
        if (u < v) out.emplace_back(u, v);
      }
    }
    return out;
  }

  Graph with_edges(std::span<const Edge> edges) const {
    return from_edges(num_nodes(), edges, features_, labels_, splits_);
  }
  Graph with_features(Matrix features) const {
    auto e = edges();
    return from_edges(num_nodes(), e, std::move(features), labels_, splits_);
  }
  Graph with_splits(std::vector<Split> splits) const {
    auto e = edges();
    return from_edges(num_nodes(), e, features_, labels_, std::move(splits));
  }
  Graph with_labels(std::vector<ClassId> labels) const {
    auto e = edges();
    return from_edges(num_nodes(), e, features_, std::move(labels), splits_);
  }

  /// Structural invariants; returns an empty string when they all hold.
  std::string check_invariants() const {
    for (NodeId u = 0; u < adjacency_.size(); ++u) {
      const auto& adj = adjacency_[u];
      for (std::size_t i = 0; i < adj.size(); ++i) {
        const NodeId v = adj[i];
        if (v >= num_nodes()) return "neighbor id out of range at node " + std::to_string(u);
        if (v == u) return "self-loop at node " + std::to_string(u);
        if (i > 0 && adj[i - 1] >= v) return "unsorted or duplicate neighbors at node " + std::to_string(u);
        if (!has_edge(v, u)) return "asymmetric edge " + std::to_string(u) + "-" + std::to_string(v);
      }
    }
    if (features_.rows() != num_nodes()) return "feature rows != nodes";
    if (labels_.size() != num_nodes()) return "labels != nodes";
    if (splits_.size() != num_nodes()) return "splits != nodes";
    return {};
  }

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  std::size_t num_edges_ = 0;
  Matrix features_;
  std::vector<ClassId> labels_;
  std::vector<Split> splits_;
  std::size_t num_classes_ = 0;
};

/// Stratified split: per class, shuffle then assign the first train_frac to
/// train, the next val_frac to val, the rest to test.
inline std::vector<Split> stratified_split(const std::vector<ClassId>& labels,
                                           double train_frac, double val_frac,
                                           Rng& rng) {
  require(train_frac >= 0 && val_frac >= 0 && train_frac + val_frac <= 1.0,
          "invalid split fractions");
  const std::size_t classes =
      labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::vector<NodeId>> by_class(classes);
  for (NodeId v = 0; v < labels.size(); ++v) by_class[labels[v]].push_back(v);
  std::vector<Split> out(labels.size(), Split::kTest);
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    const auto n = static_cast<double>(members.size());
    const auto n_train = static_cast<std::size_t>(std::llround(n * train_frac));
    const auto n_val = std::min(members.size() - n_train,
                                static_cast<std::size_t>(std::llround(n * val_frac)));
    for (std::size_t i = 0; i < members.size(); ++i) {
      out[members[i]] = i < n_train ? Split::kTrain
                        : i < n_train + n_val ? Split::kVal
                                              : Split::kTest;
    }
  }
  return out;
}

}  // namespace gdpnet
