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
#include <span>
#include <vector>

#include "gdpnet/graph.hpp"
#include "gdpnet/optimizer.hpp"

namespace gdpnet {

enum class Activation { kRelu, kTanh };
enum class ScoreMode { kSoft, kHard };

/// Mean aggregator: h = act(W * mean({x} u neighbors)), W is d x D.
struct AggregatorParams {
  Matrix weight;
  Activation activation = Activation::kRelu;

  std::size_t embed_dim() const { return weight.rows(); }
  std::size_t feature_dim() const { return weight.cols(); }

  static AggregatorParams glorot(std::size_t embed_dim, std::size_t feature_dim,
                                 Rng& rng, Activation act = Activation::kRelu) {
    return {glorot_uniform(embed_dim, feature_dim, rng), act};
  }
  friend bool operator==(const AggregatorParams&, const AggregatorParams&) = default;
};

/// Linear softmax head over embeddings, V is C x d.
struct ClassifierParams {
  Matrix weight;

  std::size_t num_classes() const { return weight.rows(); }

  static ClassifierParams glorot(std::size_t classes, std::size_t embed_dim, Rng& rng) {
    return {glorot_uniform(classes, embed_dim, rng)};
  }
  friend bool operator==(const ClassifierParams&, const ClassifierParams&) = default;
};

struct Embedding {
  NodeId node = 0;
  std::size_t step = 0;
  Vector values;
};

inline double activate(Activation a, double z) {
  return a == Activation::kRelu ? (z > 0.0 ? z : 0.0) : std::tanh(z);
}

inline double activate_derivative(Activation a, double z) {
  if (a == Activation::kRelu) return z > 0.0 ? 1.0 : 0.0;
  const double t = std::tanh(z);
  return 1.0 - t * t;
}

/// mean({x} u rows); `rows` may be empty.
inline Vector mean_with_self(std::span<const double> x,
                             std::span<const std::span<const double>> rows) {
  Vector m(x.begin(), x.end());
  for (const auto& r : rows) {
    require(r.size() == x.size(), "aggregate: neighbor feature length " +
                                      std::to_string(r.size()) + " != " +
                                      std::to_string(x.size()));
    for (std::size_t k = 0; k < m.size(); ++k) m[k] += r[k];
  }
  const double inv = 1.0 / static_cast<double>(rows.size() + 1);
  for (double& v : m) v *= inv;
  return m;
}

inline Vector embed_mean(const AggregatorParams& agg, std::span<const double> mean) {
  require(mean.size() == agg.feature_dim(),
          "aggregate: feature length " + std::to_string(mean.size()) +
              " != aggregator input " + std::to_string(agg.feature_dim()));
  Vector h = matvec(agg.weight, mean);
  for (double& v : h) v = activate(agg.activation, v);
  return h;
}

inline Vector aggregate(const AggregatorParams& agg, std::span<const double> x_v,
                        std::span<const std::span<const double>> neighbor_features) {
  return embed_mean(agg, mean_with_self(x_v, neighbor_features));
}

inline std::vector<std::span<const double>> feature_rows(const Graph& g,
                                                         std::span<const NodeId> nodes) {
  std::vector<std::span<const double>> rows;
  rows.reserve(nodes.size());
  for (NodeId u : nodes) rows.push_back(g.feature(u));
  return rows;
}

inline Vector aggregate_node(const AggregatorParams& agg, const Graph& g, NodeId v,
                             std::span<const NodeId> selected) {
  const auto rows = feature_rows(g, selected);
  return aggregate(agg, g.feature(v), rows);
}

inline Vector classify(const ClassifierParams& clf, std::span<const double> h) {
  require(h.size() == clf.weight.cols(),
          "classify: embedding length " + std::to_string(h.size()) + " != " +
              std::to_string(clf.weight.cols()));
  return softmax(matvec(clf.weight, h));
}

/// Per-node task score used by the selection reward. Soft mode is the
/// probability of the true class; hard mode is 1 iff the argmax is correct,
/// i.e. the micro-F1 of the single prediction {v}.
inline double fc_score(const ClassifierParams& clf, const AggregatorParams& agg,
                       std::span<const double> x_v,
                       std::span<const std::span<const double>> neighbor_features,
                       ClassId true_label, ScoreMode mode) {
  require(true_label < clf.num_classes(), "fc_score: label " + std::to_string(true_label) +
                                              " out of range");
  const Vector p = classify(clf, aggregate(agg, x_v, neighbor_features));
  if (mode == ScoreMode::kSoft) return p[true_label];
  return argmax(p) == true_label ? 1.0 : 0.0;
}

/// Micro-averaged F1 from pooled per-class TP/FP/FN counts.
inline double micro_f1(std::span<const ClassId> predictions,
                       std::span<const ClassId> labels) {
  require(!predictions.empty(), "micro_f1: empty input");
  require(predictions.size() == labels.size(), "micro_f1: length mismatch");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == labels[i]) {
      ++tp;
    } else {
      ++fp;  // counted against the predicted class
      ++fn;  // and against the true class
    }
  }
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

struct RepresentationModel {
  AggregatorParams agg;
  ClassifierParams clf;

  static RepresentationModel init(std::size_t embed_dim, std::size_t feature_dim,
                                  std::size_t classes, Rng& rng,
                                  Activation act = Activation::kRelu) {
    RepresentationModel m;
    m.agg = AggregatorParams::glorot(embed_dim, feature_dim, rng, act);
    m.clf = ClassifierParams::glorot(classes, embed_dim, rng);
    return m;
  }
  friend bool operator==(const RepresentationModel&, const RepresentationModel&) = default;
};

struct RepresentationGrads {
  Matrix agg;
  Matrix clf;
  double loss = 0.0;
};

/// Mean cross-entropy over (mean-feature, label) pairs and its gradient.
inline RepresentationGrads representation_loss_and_grad(
    const RepresentationModel& m, std::span<const Vector> means,
    std::span<const ClassId> labels) {
  require(means.size() == labels.size() && !means.empty(),
          "representation loss: bad batch");
  RepresentationGrads g{Matrix(m.agg.weight.rows(), m.agg.weight.cols()),
                        Matrix(m.clf.weight.rows(), m.clf.weight.cols()), 0.0};
  const double scale = 1.0 / static_cast<double>(means.size());
  for (std::size_t i = 0; i < means.size(); ++i) {
    const Vector z = matvec(m.agg.weight, means[i]);
    Vector h(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) h[k] = activate(m.agg.activation, z[k]);
    Vector p = classify(m.clf, h);
    g.loss -= scale * std::log(std::max(p[labels[i]], 1e-300));
    p[labels[i]] -= 1.0;  // d loss / d logits
    add_outer(g.clf, p, h, scale);
    Vector dh = matvec_transposed(m.clf.weight, p);
    for (std::size_t k = 0; k < dh.size(); ++k) dh[k] *= activate_derivative(m.agg.activation, z[k]);
    add_outer(g.agg, dh, means[i], scale);
  }
  return g;
}

struct RepresentationReport {
  std::vector<double> epoch_losses;
  double final_loss() const { return epoch_losses.empty() ? 0.0 : epoch_losses.back(); }
};

/// Owns the optimizer state for the aggregator and classifier.
class RepresentationTrainer {
 public:
  explicit RepresentationTrainer(AdamConfig cfg = {}) : opt_(cfg) {}

  /// Minimizes cross-entropy over train-split nodes, each aggregated over its
  /// selected neighbor set. Only train-split labels are read.
  RepresentationReport train(RepresentationModel& model, const Graph& g,
                             const std::vector<std::vector<NodeId>>& selected,
                             std::size_t epochs, std::size_t batch_size, Rng& rng) {
    require(batch_size >= 1, "batch size must be positive");
    require(selected.size() == g.num_nodes(), "selected sets must cover every node");
    const auto train_nodes = g.nodes_in(Split::kTrain);
    require(!train_nodes.empty(), "graph has no train nodes");

    std::vector<Vector> means(train_nodes.size());
    std::vector<ClassId> labels(train_nodes.size());
    for (std::size_t i = 0; i < train_nodes.size(); ++i) {
      const NodeId v = train_nodes[i];
      for (NodeId u : selected[v]) {
        require(g.has_edge(v, u), "selected neighbor " + std::to_string(u) +
                                      " is not adjacent to node " + std::to_string(v));
      }
      means[i] = mean_with_self(g.feature(v), feature_rows(g, selected[v]));
      labels[i] = g.label(v);
    }

    RepresentationReport report;
    std::vector<std::size_t> order(train_nodes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
      std::shuffle(order.begin(), order.end(), rng);
      double epoch_loss = 0.0;
      for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t end = std::min(order.size(), start + batch_size);
        std::vector<Vector> bm;
        std::vector<ClassId> bl;
        for (std::size_t i = start; i < end; ++i) {
          bm.push_back(means[order[i]]);
          bl.push_back(labels[order[i]]);
        }
        auto grads = representation_loss_and_grad(model, bm, bl);
        epoch_loss += grads.loss * static_cast<double>(end - start);
        opt_.step({&model.agg.weight, &model.clf.weight}, {&grads.agg, &grads.clf},
                  Direction::kMinimize);
      }
      epoch_loss /= static_cast<double>(order.size());
      if (!std::isfinite(epoch_loss)) throw RuntimeFailure("representation loss is not finite");
      report.epoch_losses.push_back(epoch_loss);
    }
    return report;
  }

 private:
  AdamOptimizer opt_;
};

inline RepresentationReport train_representation(
    RepresentationModel& model, const Graph& g,
    const std::vector<std::vector<NodeId>>& selected, std::size_t epochs,
    std::size_t batch_size, Rng& rng, AdamConfig cfg = {}) {
  RepresentationTrainer trainer(cfg);
  return trainer.train(model, g, selected, epochs, batch_size, rng);
}

/// Tab-separated embedding export: node id, then d values per line.
inline std::string embeddings_tsv(std::span<const Embedding> embeddings) {
  std::string s;
  char buf[32];
  for (const auto& e : embeddings) {
    s += std::to_string(e.node);
    for (double v : e.values) {
      std::snprintf(buf, sizeof buf, "\t%.17g", v);
      s += buf;
    }
    s += '\n';
  }
  return s;
}

}  // namespace gdpnet
